#include "occspot/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "occspot/error.hpp"
#include "occspot/parallel.hpp"
#include "occspot/rng.hpp"

namespace occspot {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Footprint {
  double x, y, yaw, half_l, half_w;
};

std::array<Eigen::Vector2d, 2> axes_of(const Footprint& f) {
  return {Eigen::Vector2d(std::cos(f.yaw), std::sin(f.yaw)), Eigen::Vector2d(-std::sin(f.yaw), std::cos(f.yaw))};
}

// Separating-axis test on two oriented rectangles grown by `margin`.
bool footprints_overlap(const Footprint& a, const Footprint& b, double margin) {
  const Eigen::Vector2d d(b.x - a.x, b.y - a.y);
  const auto aa = axes_of(a);
  const auto ba = axes_of(b);
  for (const auto& axis : {aa[0], aa[1], ba[0], ba[1]}) {
    const double ra = (a.half_l + margin) * std::abs(aa[0].dot(axis)) + (a.half_w + margin) * std::abs(aa[1].dot(axis));
    const double rb = b.half_l * std::abs(ba[0].dot(axis)) + b.half_w * std::abs(ba[1].dot(axis));
    if (std::abs(d.dot(axis)) > ra + rb) return false;
  }
  return true;
}

// Distance from the origin to the rectangle (0 when inside).
double origin_distance(const Footprint& f) {
  const auto ax = axes_of(f);
  const Eigen::Vector2d rel(-f.x, -f.y);
  const double u = std::max(0.0, std::abs(rel.dot(ax[0])) - f.half_l);
  const double v = std::max(0.0, std::abs(rel.dot(ax[1])) - f.half_w);
  return std::hypot(u, v);
}

constexpr double kPlacementMargin = 0.1;

}  // namespace

void BeamSpec::validate() const {
  if (n_beams < 1) throw std::invalid_argument("beam spec: n_beams must be >= 1");
  if (azimuth_steps < 1) throw std::invalid_argument("beam spec: azimuth_steps must be >= 1");
  if (!std::isfinite(alpha_up) || !std::isfinite(alpha_low)) {
    throw std::invalid_argument("beam spec: non-finite VFOV limit");
  }
  if (alpha_up == alpha_low) throw std::invalid_argument("beam spec: degenerate VFOV");
  if (alpha_up < alpha_low) {
    throw std::invalid_argument("beam spec: degenerate VFOV (alpha_up < alpha_low)");
  }
  if (alpha_up > 90.0 || alpha_low < -90.0) {
    throw std::invalid_argument("beam spec: VFOV limits must lie in [-90, 90] degrees");
  }
}

std::vector<double> BeamSpec::elevations() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(n_beams));
  if (n_beams == 1) {
    out[0] = 0.5 * (alpha_up + alpha_low) * kDegToRad;
    return out;
  }
  const double step = (alpha_up - alpha_low) / (n_beams - 1);
  for (int i = 0; i < n_beams; ++i) out[static_cast<std::size_t>(i)] = (alpha_low + i * step) * kDegToRad;
  return out;
}

double BeamSpec::azimuth(int k) const {
  return wrap_angle(2.0 * std::numbers::pi * k / azimuth_steps);
}

void SceneParams::validate() const {
  if (n_objects < 0) throw std::invalid_argument("scene: n_objects must be >= 0");
  if (!(arena.x_max > arena.x_min && arena.y_max > arena.y_min)) {
    throw std::invalid_argument("scene: arena bounds are empty");
  }
  if (n_cls < 1 || n_cls > 255) throw std::invalid_argument("scene: n_cls must be in [1, 255]");
  if (ground_class < 1 || ground_class > n_cls) {
    throw std::invalid_argument("scene: ground_class outside [1, n_cls]");
  }
  if (n_objects > 0) {
    if (static_cast<int>(class_mix.size()) != n_cls + 1) {
      throw std::invalid_argument("scene: class_mix must have n_cls + 1 entries");
    }
    double total = 0.0;
    for (int c = 1; c <= n_cls; ++c) {
      const double w = class_mix[static_cast<std::size_t>(c)];
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("scene: class_mix weights must be >= 0");
      if (c != ground_class) total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("scene: class_mix weights sum to zero");
  }
  if (dynamic_probability < 0.0 || dynamic_probability > 1.0) {
    throw std::invalid_argument("scene: dynamic_probability outside [0, 1]");
  }
  if (size_jitter < 0.0 || size_jitter >= 1.0) {
    throw std::invalid_argument("scene: size_jitter outside [0, 1)");
  }
  if (max_attempts < 1) throw std::invalid_argument("scene: max_attempts must be >= 1");
}

std::vector<double> default_class_mix() {
  using namespace schema;
  std::vector<double> mix(kNumClasses + 1, 0.0);
  mix[kCar] = 6.0;
  mix[kPedestrian] = 3.0;
  mix[kCyclist] = 1.0;
  mix[kBicycle] = 0.8;
  mix[kMotorcycle] = 0.6;
  mix[kTruck] = 0.8;
  mix[kBus] = 0.3;
  mix[kBarrier] = 2.0;
  mix[kTrafficCone] = 2.0;
  mix[kPole] = 2.0;
  mix[kBuilding] = 0.6;
  mix[kVegetation] = 3.0;
  mix[kTerrain] = 1.5;
  mix[kSidewalk] = 1.5;
  return mix;
}

SceneParams default_scene_params() {
  SceneParams p;
  p.class_mix = default_class_mix();
  return p;
}

Scene Scene::at_time(double seconds) const {
  Scene out = *this;
  for (auto& obj : out.objects) {
    if (obj.box.is_dynamic) {
      obj.box.center.x() += obj.box.vx * seconds;
      obj.box.center.y() += obj.box.vy * seconds;
    }
  }
  return out;
}

std::vector<BoxLabel> Scene::boxes() const {
  std::vector<BoxLabel> out;
  out.reserve(objects.size());
  for (const auto& obj : objects) out.push_back(obj.box);
  return out;
}

Scene build_scene(const SceneParams& params, std::uint64_t seed) {
  params.validate();
  Scene scene;
  scene.ground_z = params.ground_z;
  scene.has_ground = params.has_ground;
  scene.ground_class = params.ground_class;
  scene.rng_seed = seed;
  if (params.n_objects == 0) return scene;

  Rng rng(derive_seed(seed, "scene"));
  std::vector<double> cumulative;
  double total = 0.0;
  for (int c = 0; c <= params.n_cls; ++c) {
    const bool eligible = c >= 1 && c != params.ground_class;
    total += eligible ? params.class_mix[static_cast<std::size_t>(c)] : 0.0;
    cumulative.push_back(total);
  }

  auto template_for = [&](int c) {
    if (c <= schema::kNumClasses) return schema::kTemplates[static_cast<std::size_t>(c)];
    return schema::ClassTemplate{1.0, 1.0, 1.0, 0.0};
  };

  struct Pending {
    int cls;
    Vec3 size;
  };
  std::vector<Pending> pending;
  for (int k = 0; k < params.n_objects; ++k) {
    const double pick = rng.uniform() * total;
    const int cls = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                     cumulative.begin());
    const auto tpl = template_for(cls);
    const double j = params.size_jitter;
    pending.push_back({cls, Vec3(tpl.length * (1.0 + j * rng.uniform(-1.0, 1.0)),
                                 tpl.width * (1.0 + j * rng.uniform(-1.0, 1.0)),
                                 tpl.height * (1.0 + j * rng.uniform(-1.0, 1.0)))});
  }
  // Largest footprints first.
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return a.size.x() * a.size.y() > b.size.x() * b.size.y();
  });

  std::vector<Footprint> placed;
  for (std::size_t k = 0; k < pending.size(); ++k) {
    const int cls = pending[k].cls;
    const auto tpl = template_for(cls);
    bool ok = false;
    for (int attempt = 0; attempt < params.max_attempts && !ok; ++attempt) {
      BoxLabel box;
      box.class_id = cls;
      box.size = pending[k].size;
      box.yaw = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
      const double c = std::abs(std::cos(box.yaw));
      const double s = std::abs(std::sin(box.yaw));
      const double ext_x = 0.5 * (box.size.x() * c + box.size.y() * s);
      const double ext_y = 0.5 * (box.size.x() * s + box.size.y() * c);
      const double x_lo = params.arena.x_min + ext_x;
      const double x_hi = params.arena.x_max - ext_x;
      const double y_lo = params.arena.y_min + ext_y;
      const double y_hi = params.arena.y_max - ext_y;
      if (x_lo > x_hi || y_lo > y_hi) continue;
      const Footprint fp{rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), box.yaw, 0.5 * box.size.x(),
                         0.5 * box.size.y()};
      if (origin_distance(fp) < params.ego_clearance) continue;
      const bool overlaps = std::any_of(placed.begin(), placed.end(), [&](const Footprint& f) {
        return footprints_overlap(fp, f, kPlacementMargin);
      });
      if (overlaps) continue;

      box.center = {fp.x, fp.y, params.ground_z + 0.5 * box.size.z()};
      if (tpl.max_speed > 0.0 && rng.bernoulli(params.dynamic_probability)) {
        const double speed = rng.uniform(0.3 * tpl.max_speed, tpl.max_speed);
        box.vx = speed * std::cos(box.yaw);
        box.vy = speed * std::sin(box.yaw);
        box.is_dynamic = true;
      }
      scene.objects.push_back({box, cls});
      placed.push_back(fp);
      ok = true;
    }
    if (!ok) {
      throw ConfigError("build_scene: cannot place object " + std::to_string(k) + " (class " +
                        std::to_string(cls) + ") inside the arena without footprint overlap or "
                        "ego-clearance violation after " + std::to_string(params.max_attempts) +
                        " attempts");
    }
  }
  return scene;
}

namespace {

/// Entry distance of a ray into an oriented box, or +inf on a miss or when the
/// origin is inside the box.
double ray_box(const BoxLabel& box, double cos_yaw, double sin_yaw, const Vec3& origin,
               const Vec3& dir) {
  const Vec3 d0 = origin - box.center;
  const double o[3] = {cos_yaw * d0.x() + sin_yaw * d0.y(), -sin_yaw * d0.x() + cos_yaw * d0.y(),
                       d0.z()};
  const double v[3] = {cos_yaw * dir.x() + sin_yaw * dir.y(), -sin_yaw * dir.x() + cos_yaw * dir.y(),
                       dir.z()};
  const double half[3] = {0.5 * box.size.x(), 0.5 * box.size.y(), 0.5 * box.size.z()};
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (v[a] == 0.0) {
      if (o[a] < -half[a] || o[a] > half[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (-half[a] - o[a]) / v[a];
    double t1 = (half[a] - o[a]) / v[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_enter <= 0.0) return std::numeric_limits<double>::infinity();
  return t_enter;
}

}  // namespace

ScanResult scan(const Scene& scene, const BeamSpec& beams, const Pose& sensor_pose,
                const ScanOptions& options) {
  beams.validate();
  const auto elevations = beams.elevations();
  std::vector<double> az_sin(static_cast<std::size_t>(beams.azimuth_steps));
  std::vector<double> az_cos(az_sin.size());
  for (int k = 0; k < beams.azimuth_steps; ++k) {
    const double az = beams.azimuth(k);
    az_sin[static_cast<std::size_t>(k)] = std::sin(az);
    az_cos[static_cast<std::size_t>(k)] = std::cos(az);
  }
  std::vector<double> yaw_cos, yaw_sin;
  for (const auto& obj : scene.objects) {
    yaw_cos.push_back(std::cos(obj.box.yaw));
    yaw_sin.push_back(std::sin(obj.box.yaw));
  }

  ScanResult out;
  out.cloud.reserve(elevations.size() * az_sin.size() / 2);
  const Vec3& origin = sensor_pose.translation();
  for (double el : elevations) {
    const double ce = std::cos(el);
    const double se = std::sin(el);
    for (std::size_t k = 0; k < az_sin.size(); ++k) {
      const Vec3 dir_sensor(ce * az_sin[k], ce * az_cos[k], se);
      const Vec3 dir = sensor_pose.apply_direction(dir_sensor);
      double best = std::numeric_limits<double>::infinity();
      int label = 0;
      if (scene.has_ground && dir.z() < 0.0) {
        const double t = (scene.ground_z - origin.z()) / dir.z();
        if (t > 0.0) {
          best = t;
          label = scene.ground_class;
        }
      }
      for (std::size_t b = 0; b < scene.objects.size(); ++b) {
        const double t = ray_box(scene.objects[b].box, yaw_cos[b], yaw_sin[b], origin, dir);
        if (t < best) {
          best = t;
          label = scene.objects[b].surface_class;
        }
      }
      if (!(best <= options.max_range) || best < options.min_range) continue;
      const double feature = best / options.max_range;
      out.cloud.push_back(best * dir_sensor, std::span(&feature, 1));
      out.labels.values.push_back(static_cast<std::uint8_t>(label));
    }
  }
  return out;
}

void SequenceMeta::validate() const {
  if (n_frames < 1) throw std::invalid_argument("sequence: n_frames must be >= 1");
  if (!(keyframe_hz > 0.0) || !std::isfinite(keyframe_hz)) {
    throw std::invalid_argument("sequence: keyframe_hz must be positive");
  }
  if (static_cast<int>(ego_poses.size()) != n_frames) {
    throw std::invalid_argument("sequence: ego_poses length must equal n_frames");
  }
}

SequenceMeta linear_sequence_meta(int n_frames, double keyframe_hz, double speed,
                                  double sensor_height) {
  SequenceMeta meta;
  meta.n_frames = n_frames;
  meta.keyframe_hz = keyframe_hz;
  for (int t = 0; t < n_frames; ++t) {
    meta.ego_poses.push_back(Pose::from_yaw(0.0, Vec3(speed * t / keyframe_hz, 0.0, sensor_height)));
  }
  meta.validate();
  return meta;
}

std::vector<SequenceFrame> generate_sequence(const Scene& scene, const BeamSpec& beams,
                                             const SequenceMeta& meta, const ScanOptions& options) {
  meta.validate();
  beams.validate();
  std::vector<SequenceFrame> frames(static_cast<std::size_t>(meta.n_frames));
  parallel_for(frames.size(), [&](std::size_t t) {
    const Scene moved = scene.at_time(static_cast<double>(t) / meta.keyframe_hz);
    auto result = scan(moved, beams, meta.ego_poses[t], options);
    frames[t] = {std::move(result.cloud), std::move(result.labels), moved.boxes()};
  });
  return frames;
}

}  // namespace occspot
