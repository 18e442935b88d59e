#ifndef OCCSPOT_AUGMENT_HPP
#define OCCSPOT_AUGMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "occspot/cloud.hpp"
#include "occspot/synth.hpp"

namespace occspot {

/// Fraction of beams to keep, in (0, 1].
class ResampleFactor {
 public:
  explicit ResampleFactor(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

struct AugmentConfig {
  std::vector<BeamSpec> target_beam_specs;
  double flip_prob_x = 0.5;
  double flip_prob_y = 0.5;
  double rotation_range = 0.0;  // radians, symmetric about 0
  std::uint64_t seed = 0;

  void validate() const;
};

/// Beams per degree of vertical field of view.
double beam_density(const BeamSpec& beams);

struct ResampleFactorResult {
  ResampleFactor factor;
  double raw = 1.0;                      // unclamped density ratio
  std::optional<std::string> warning;    // set when raw > 1 (upsampling is impossible)
};

/// density(target) / density(source), clamped to 1.
ResampleFactorResult resample_factor(const BeamSpec& source, const BeamSpec& target);

inline constexpr double kDefaultBeamMergeThresholdDeg = 0.05;

struct BeamCluster {
  double elevation_min = 0.0;  // radians
  double elevation_max = 0.0;
  std::vector<std::size_t> indices;  // ascending point indices
};

/// Gap clustering of per-point elevations: consecutive sorted elevations more
/// than `merge_threshold_deg` apart start a new cluster. Clusters are ordered
/// by elevation and partition the cloud.
std::vector<BeamCluster> estimate_beams(const PointCloud& cloud,
                                        double merge_threshold_deg = kDefaultBeamMergeThresholdDeg);

struct LabeledCloud {
  PointCloud cloud;
  PointLabels labels;
};

/// Keeps max(1, round(r K)) of the K estimated beams at uniformly spaced
/// cluster indices with a seeded phase offset. Surviving points keep their
/// original relative order.
LabeledCloud beam_resample(const PointCloud& cloud, const PointLabels& labels, ResampleFactor r,
                           std::uint64_t seed,
                           double merge_threshold_deg = kDefaultBeamMergeThresholdDeg);

/// Indices of the cluster positions kept for K beams at factor r.
std::vector<std::size_t> kept_beam_indices(std::size_t k, ResampleFactor r, std::uint64_t seed);

enum class FlipAxis { kX, kY };

struct AugmentedFrame {
  PointCloud cloud;
  PointLabels labels;
  std::vector<BoxLabel> boxes;
};

/// Mirror across the given axis. kX mirrors across the x-axis (y -> -y,
/// yaw -> -yaw); kY mirrors across the y-axis (x -> -x, yaw -> pi - yaw).
/// Velocities are mirrored with the coordinates; labels are unchanged.
AugmentedFrame random_flip(const PointCloud& cloud, const PointLabels& labels,
                           const std::vector<BoxLabel>& boxes, FlipAxis axis);

/// Flips along each axis with the configured probabilities (seeded).
AugmentedFrame random_flip(const PointCloud& cloud, const PointLabels& labels,
                           const std::vector<BoxLabel>& boxes, const AugmentConfig& config,
                           std::uint64_t seed, bool* flipped_x = nullptr, bool* flipped_y = nullptr);

/// Rotation about +z applied to points, box centers, yaws and velocities.
AugmentedFrame random_rotate(const PointCloud& cloud, const PointLabels& labels,
                             const std::vector<BoxLabel>& boxes, double angle);

/// Draws the angle uniformly from [-rotation_range, rotation_range].
double draw_rotation(const AugmentConfig& config, std::uint64_t seed);

}  // namespace occspot

#endif  // OCCSPOT_AUGMENT_HPP
