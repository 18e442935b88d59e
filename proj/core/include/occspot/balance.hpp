#ifndef OCCSPOT_BALANCE_HPP
#define OCCSPOT_BALANCE_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace occspot {

/// Foreground instance counts of one frame, keyed by class id.
struct FrameSummary {
  std::map<int, std::uint64_t> instances;
};

/// Per-class instance totals over a dataset. Only classes with a nonzero
/// total are kept; `excluded` lists the schema classes that were dropped.
struct ClassStats {
  std::vector<int> class_ids;          // ascending
  std::vector<std::uint64_t> counts;   // N_i, all > 0
  std::vector<int> excluded;

  std::size_t n_fg() const noexcept { return class_ids.size(); }
  void validate() const;
};

/// Sums instance counts over frames for the given foreground schema. Throws
/// std::invalid_argument when every class has zero instances.
ClassStats class_stats(std::span<const FrameSummary> frames, std::span<const int> foreground);

/// s_i = sqrt(m / n_i) with m = 1 / N_fg and n_i = N_i / sum_j N_j.
struct SamplingWeights {
  std::vector<int> class_ids;
  std::vector<double> s;

  double weight_of(int class_id) const;  // throws std::out_of_range for unknown classes
  double max() const;
  double min() const;
};

SamplingWeights sampling_weights(const ClassStats& stats);

/// Frame weight = max s_i over the foreground classes present in the frame;
/// frames without foreground get min_i s_i. Classes without a weight are ignored.
std::vector<double> frame_weights(std::span<const FrameSummary> frames, const SamplingWeights& s);

/// epoch_size draws with replacement, P(frame j) proportional to weights[j].
/// Deterministic in `seed`.
std::vector<std::size_t> resample_frames(std::span<const double> weights, std::size_t epoch_size,
                                         std::uint64_t seed);

inline constexpr double kForegroundWeight = 2.0;
inline constexpr double kBackgroundWeight = 1.0;
inline constexpr double kEmptyWeight = 0.01;

/// Per-class cross-entropy weights, index 0 = empty.
struct LossWeights {
  std::vector<double> w;
  void validate() const;
};

/// Foreground and background must partition [1, n_cls]; throws
/// std::invalid_argument on overlap, gaps, or out-of-range ids.
LossWeights class_loss_weights(int n_cls, std::span<const int> foreground,
                               std::span<const int> background);

/// Default 15-class schema weights.
LossWeights default_loss_weights();

}  // namespace occspot

#endif  // OCCSPOT_BALANCE_HPP
