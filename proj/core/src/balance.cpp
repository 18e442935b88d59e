#include "occspot/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "occspot/rng.hpp"
#include "occspot/schema.hpp"

namespace occspot {

void ClassStats::validate() const {
  if (class_ids.size() != counts.size()) throw std::invalid_argument("class stats: size mismatch");
  if (class_ids.empty()) throw std::invalid_argument("class stats: no foreground classes");
  for (auto c : counts) {
    if (c == 0) throw std::invalid_argument("class stats: zero count for a retained class");
  }
}

ClassStats class_stats(std::span<const FrameSummary> frames, std::span<const int> foreground) {
  std::set<int> schema(foreground.begin(), foreground.end());
  std::map<int, std::uint64_t> totals;
  for (int c : schema) totals[c] = 0;
  for (const auto& f : frames) {
    for (const auto& [cls, n] : f.instances) {
      if (schema.contains(cls)) totals[cls] += n;
    }
  }
  ClassStats stats;
  for (const auto& [cls, n] : totals) {
    if (n == 0) {
      stats.excluded.push_back(cls);
    } else {
      stats.class_ids.push_back(cls);
      stats.counts.push_back(n);
    }
  }
  if (stats.class_ids.empty()) {
    throw std::invalid_argument("class_stats: every foreground class has zero instances");
  }
  return stats;
}

double SamplingWeights::weight_of(int class_id) const {
  const auto it = std::find(class_ids.begin(), class_ids.end(), class_id);
  if (it == class_ids.end()) throw std::out_of_range("sampling weights: unknown class");
  return s[static_cast<std::size_t>(it - class_ids.begin())];
}

double SamplingWeights::max() const { return *std::max_element(s.begin(), s.end()); }
double SamplingWeights::min() const { return *std::min_element(s.begin(), s.end()); }

SamplingWeights sampling_weights(const ClassStats& stats) {
  stats.validate();
  // m / n_i = (sum_j N_j) / (N_fg * N_i), evaluated from integers in one division.
  const auto total = std::accumulate(stats.counts.begin(), stats.counts.end(), std::uint64_t{0});
  const auto n_fg = static_cast<double>(stats.n_fg());
  SamplingWeights out;
  out.class_ids = stats.class_ids;
  out.s.reserve(stats.counts.size());
  for (auto count : stats.counts) {
    out.s.push_back(std::sqrt(static_cast<double>(total) / (n_fg * static_cast<double>(count))));
  }
  return out;
}

std::vector<double> frame_weights(std::span<const FrameSummary> frames, const SamplingWeights& s) {
  const double fallback = s.min();
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    double w = 0.0;
    bool any = false;
    for (const auto& [cls, n] : f.instances) {
      if (n == 0) continue;
      const auto it = std::find(s.class_ids.begin(), s.class_ids.end(), cls);
      if (it == s.class_ids.end()) continue;
      w = std::max(w, s.s[static_cast<std::size_t>(it - s.class_ids.begin())]);
      any = true;
    }
    out.push_back(any ? w : fallback);
  }
  return out;
}

std::vector<std::size_t> resample_frames(std::span<const double> weights, std::size_t epoch_size,
                                         std::uint64_t seed) {
  if (weights.empty()) throw std::invalid_argument("resample_frames: no frames");
  if (epoch_size == 0) throw std::invalid_argument("resample_frames: epoch_size must be >= 1");
  std::vector<double> cumulative;
  cumulative.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("resample_frames: weights must be > 0");
    total += w;
    cumulative.push_back(total);
  }
  Rng rng(derive_seed(seed, "sampler"));
  std::vector<std::size_t> out;
  out.reserve(epoch_size);
  for (std::size_t i = 0; i < epoch_size; ++i) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    out.push_back(std::min(static_cast<std::size_t>(it - cumulative.begin()), weights.size() - 1));
  }
  return out;
}

void LossWeights::validate() const {
  if (w.size() < 2) throw std::invalid_argument("loss weights: need at least two classes");
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("loss weights must be > 0");
  }
}

LossWeights class_loss_weights(int n_cls, std::span<const int> foreground,
                               std::span<const int> background) {
  if (n_cls < 1) throw std::invalid_argument("class_loss_weights: n_cls must be >= 1");
  std::vector<int> seen(static_cast<std::size_t>(n_cls) + 1, 0);
  LossWeights out{std::vector<double>(static_cast<std::size_t>(n_cls) + 1, 0.0)};
  out.w[0] = kEmptyWeight;
  auto assign = [&](std::span<const int> ids, double weight, const char* which) {
    for (int c : ids) {
      if (c < 1 || c > n_cls) {
        throw std::invalid_argument(std::string("class_loss_weights: ") + which + " class " +
                                    std::to_string(c) + " outside [1, n_cls]");
      }
      if (seen[static_cast<std::size_t>(c)]++) {
        throw std::invalid_argument("class_loss_weights: class " + std::to_string(c) +
                                    " listed more than once across foreground/background");
      }
      out.w[static_cast<std::size_t>(c)] = weight;
    }
  };
  assign(foreground, kForegroundWeight, "foreground");
  assign(background, kBackgroundWeight, "background");
  for (int c = 1; c <= n_cls; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw std::invalid_argument("class_loss_weights: class " + std::to_string(c) +
                                  " is neither foreground nor background");
    }
  }
  return out;
}

LossWeights default_loss_weights() {
  std::vector<int> background;
  for (int c = 1; c <= schema::kNumClasses; ++c) {
    if (std::find(schema::kForeground.begin(), schema::kForeground.end(), c) == schema::kForeground.end()) {
      background.push_back(c);
    }
  }
  return class_loss_weights(schema::kNumClasses, schema::kForeground, background);
}

}  // namespace occspot
