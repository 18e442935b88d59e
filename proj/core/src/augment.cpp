#include "occspot/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "occspot/rng.hpp"

namespace occspot {

ResampleFactor::ResampleFactor(double value) : value_(value) {
  if (!(value > 0.0 && value <= 1.0)) {
    throw std::invalid_argument("resample factor must lie in (0, 1]");
  }
}

void AugmentConfig::validate() const {
  for (const auto& b : target_beam_specs) b.validate();
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(flip_prob_x) || !prob_ok(flip_prob_y)) {
    throw std::invalid_argument("augment: flip probabilities must lie in [0, 1]");
  }
  if (!(rotation_range >= 0.0) || !std::isfinite(rotation_range)) {
    throw std::invalid_argument("augment: rotation_range must be >= 0");
  }
}

double beam_density(const BeamSpec& beams) {
  beams.validate();
  return beams.n_beams / (beams.alpha_up - beams.alpha_low);
}

ResampleFactorResult resample_factor(const BeamSpec& source, const BeamSpec& target) {
  const double raw = beam_density(target) / beam_density(source);
  if (raw > 1.0) {
    return {ResampleFactor(1.0), raw,
            "target beam density exceeds source (factor " + std::to_string(raw) +
                "); upsampling is impossible, clamped to 1"};
  }
  return {ResampleFactor(raw), raw, std::nullopt};
}

std::vector<BeamCluster> estimate_beams(const PointCloud& cloud, double merge_threshold_deg) {
  std::vector<BeamCluster> clusters;
  if (cloud.empty()) return clusters;
  const double threshold = merge_threshold_deg * std::numbers::pi / 180.0;

  std::vector<double> elevation(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) elevation[i] = to_spherical(cloud.xyz(i)).elevation;
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return elevation[a] < elevation[b]; });

  clusters.push_back({elevation[order[0]], elevation[order[0]], {order[0]}});
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double e = elevation[order[k]];
    if (e - clusters.back().elevation_max > threshold) {
      clusters.push_back({e, e, {}});
    }
    clusters.back().elevation_max = e;
    clusters.back().indices.push_back(order[k]);
  }
  for (auto& c : clusters) std::sort(c.indices.begin(), c.indices.end());
  return clusters;
}

std::vector<std::size_t> kept_beam_indices(std::size_t k, ResampleFactor r, std::uint64_t seed) {
  if (k == 0) return {};
  const auto kept = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r.value() * k)));
  const double stride = static_cast<double>(k) / static_cast<double>(kept);
  Rng rng(derive_seed(seed, "beam_resample"));
  const double offset = rng.uniform() * stride;
  std::vector<std::size_t> out;
  out.reserve(kept);
  for (std::size_t i = 0; i < kept; ++i) {
    auto idx = static_cast<std::size_t>(std::floor(offset + static_cast<double>(i) * stride));
    out.push_back(std::min(idx, k - 1));
  }
  return out;
}

LabeledCloud beam_resample(const PointCloud& cloud, const PointLabels& labels, ResampleFactor r,
                           std::uint64_t seed, double merge_threshold_deg) {
  check_aligned(cloud, labels);
  if (r.value() == 1.0 || cloud.empty()) return {cloud, labels};
  const auto clusters = estimate_beams(cloud, merge_threshold_deg);
  std::vector<std::size_t> keep;
  for (std::size_t c : kept_beam_indices(clusters.size(), r, seed)) {
    keep.insert(keep.end(), clusters[c].indices.begin(), clusters[c].indices.end());
  }
  std::sort(keep.begin(), keep.end());
  return {cloud.select(keep), labels.select(keep)};
}

namespace {

AugmentedFrame map_frame(const PointCloud& cloud, const PointLabels& labels,
                         const std::vector<BoxLabel>& boxes, const Mat3& linear,
                         double (*yaw_map)(double, double), double param) {
  check_aligned(cloud, labels);
  AugmentedFrame out{PointCloud(cloud.feature_dim()), labels, {}};
  out.cloud.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) out.cloud.push_back(linear * cloud.xyz(i), cloud.features(i));
  out.boxes.reserve(boxes.size());
  for (BoxLabel b : boxes) {
    b.center = linear * b.center;
    const Vec3 v = linear * Vec3(b.vx, b.vy, 0.0);
    b.vx = v.x();
    b.vy = v.y();
    b.yaw = yaw_map(b.yaw, param);
    out.boxes.push_back(b);
  }
  return out;
}

}  // namespace

AugmentedFrame random_flip(const PointCloud& cloud, const PointLabels& labels,
                           const std::vector<BoxLabel>& boxes, FlipAxis axis) {
  Mat3 m = Mat3::Identity();
  if (axis == FlipAxis::kX) {
    m(1, 1) = -1.0;
    return map_frame(cloud, labels, boxes, m, [](double yaw, double) { return wrap_angle(-yaw); }, 0.0);
  }
  m(0, 0) = -1.0;
  return map_frame(cloud, labels, boxes, m,
                   [](double yaw, double) { return wrap_angle(std::numbers::pi - yaw); }, 0.0);
}

AugmentedFrame random_flip(const PointCloud& cloud, const PointLabels& labels,
                           const std::vector<BoxLabel>& boxes, const AugmentConfig& config,
                           std::uint64_t seed, bool* flipped_x, bool* flipped_y) {
  Rng rng(derive_seed(seed, "flip"));
  const bool fx = rng.bernoulli(config.flip_prob_x);
  const bool fy = rng.bernoulli(config.flip_prob_y);
  if (flipped_x) *flipped_x = fx;
  if (flipped_y) *flipped_y = fy;
  AugmentedFrame out{cloud, labels, boxes};
  if (fx) out = random_flip(out.cloud, out.labels, out.boxes, FlipAxis::kX);
  if (fy) out = random_flip(out.cloud, out.labels, out.boxes, FlipAxis::kY);
  return out;
}

AugmentedFrame random_rotate(const PointCloud& cloud, const PointLabels& labels,
                             const std::vector<BoxLabel>& boxes, double angle) {
  if (angle == 0.0) {
    check_aligned(cloud, labels);
    return {cloud, labels, boxes};
  }
  const Mat3 m = Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
  return map_frame(cloud, labels, boxes, m,
                   [](double yaw, double a) { return wrap_angle(yaw + a); }, angle);
}

double draw_rotation(const AugmentConfig& config, std::uint64_t seed) {
  if (config.rotation_range == 0.0) return 0.0;
  Rng rng(derive_seed(seed, "rotate"));
  return rng.uniform(-config.rotation_range, config.rotation_range);
}

}  // namespace occspot
