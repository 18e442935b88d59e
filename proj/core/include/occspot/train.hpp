#ifndef OCCSPOT_TRAIN_HPP
#define OCCSPOT_TRAIN_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "occspot/augment.hpp"
#include "occspot/balance.hpp"
#include "occspot/loss.hpp"
#include "occspot/metrics.hpp"
#include "occspot/model.hpp"
#include "occspot/occ_gt.hpp"
#include "occspot/optim.hpp"
#include "occspot/synth.hpp"

namespace occspot {

enum class TargetKind {
  kOccupancy,    // multi-frame aggregated, densified occupancy
  kSingleFrame,  // voxelized labels of the keyframe scan only
};

SceneParams toy_scene_params();
/// Occupancy options whose voting ties follow the default loss weights.
OccupancyOptions balanced_occupancy_options();

struct DatasetConfig {
  SceneParams scene = toy_scene_params();
  BeamSpec beams;
  ScanOptions scan;
  int sequence_frames = 3;
  double keyframe_hz = 10.0;
  double ego_speed = 3.0;
  double sensor_height = 1.8;
  GridSpec grid = GridSpec::centered(32, 32, 0.75, -2.5, 3.0);
  OccupancyOptions occupancy = balanced_occupancy_options();
  TargetKind target = TargetKind::kOccupancy;

  void validate() const;
};

/// One keyframe: its sensor-frame scan plus the BEV target in the same frame.
struct Sample {
  PointCloud cloud{1};
  PointLabels labels;
  OccupancyGrid target;
  FrameSummary summary;  // object instances per class inside the grid
};

Sample build_sample(const DatasetConfig& config, std::uint64_t scene_seed);
/// Scenes `first .. first + n - 1`, scene seeds derived from `seed` on the "scene" stream.
std::vector<Sample> build_dataset(const DatasetConfig& config, std::size_t n_scenes, std::uint64_t seed,
                                  std::size_t first = 0);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 4;
  std::uint64_t seed = 0;
  OneCycle schedule;
  AdamConfig adam;
  double lambda = 1.0;
  LovaszOptions lovasz;
  LossWeights loss_weights = default_loss_weights();
  bool class_balance = true;
  std::vector<int> foreground{schema::kForeground.begin(), schema::kForeground.end()};
  bool augment = false;
  BeamSpec source_beams;
  AugmentConfig augment_config;
  std::size_t max_steps = 0;  // 0: epochs x ceil(N / batch_size)

  void validate() const;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean per-sample loss per epoch
  std::vector<double> step_loss;
  std::size_t steps = 0;
};

/// Total loss of one sample and its gradient, accumulated into `grad` scaled by `scale`.
TotalLoss loss_and_gradient(const ModelParams& params, const Tensor3& pillars, const OccupancyGrid& target,
                            const LossWeights& weights, double lambda, const LovaszOptions& lovasz,
                            std::span<double> grad, double scale = 1.0);

struct PreparedInput {
  Tensor3 pillars;
  OccupancyGrid target;
};

/// Beam re-sampling toward a randomly drawn target spec, then flip and
/// rotation applied jointly to the cloud and the target grid.
PreparedInput augment_sample(const Sample& sample, const GridSpec& spec, const TrainConfig& config,
                             std::uint64_t seed);

/// Adam + one-cycle over class-balanced epochs. Throws NumericalError on a
/// non-finite loss.
TrainResult train(std::span<const Sample> data, ModelParams init, const GridSpec& spec,
                  const TrainConfig& config);

enum class ReinitScope { kDecoder, kHead };

/// Downstream training from a pre-trained encoder (or from scratch when
/// `pretrained` is null). Re-initialized blocks use the same seed either way.
TrainResult finetune_segmentation(const ModelParams* pretrained, std::span<const Sample> labeled,
                                  const ModelShape& shape, const GridSpec& spec, const TrainConfig& config,
                                  ReinitScope scope = ReinitScope::kHead);

/// With `labeled_only`, cells whose target is empty are skipped and the
/// prediction is the argmax over classes 1..n_cls.
ConfusionMatrix evaluate(const ModelParams& params, std::span<const Sample> data, const GridSpec& spec,
                         bool labeled_only = false);

}  // namespace occspot

#endif  // OCCSPOT_TRAIN_HPP
