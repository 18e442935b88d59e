#ifndef OCCSPOT_CONFIG_HPP
#define OCCSPOT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "occspot/augment.hpp"
#include "occspot/model.hpp"
#include "occspot/occ_gt.hpp"
#include "occspot/synth.hpp"
#include "occspot/train.hpp"

namespace occspot {

struct SequenceSettings {
  int frames = 3;
  double keyframe_hz = 10.0;
  double ego_speed = 3.0;
  double sensor_height = 1.8;
  double max_range = 60.0;
  double min_range = 0.5;
  friend bool operator==(const SequenceSettings&, const SequenceSettings&) = default;
};

struct BalanceSettings {
  bool enabled = true;
  std::vector<int> foreground{schema::kForeground.begin(), schema::kForeground.end()};
  std::vector<int> background{6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  friend bool operator==(const BalanceSettings&, const BalanceSettings&) = default;
};

struct LossSettings {
  double w_fg = kForegroundWeight;
  double w_bg = kBackgroundWeight;
  double w_empty = kEmptyWeight;
  double lambda = 1.0;
  bool lovasz_all_classes = false;
  friend bool operator==(const LossSettings&, const LossSettings&) = default;
};

struct AugmentSettings {
  bool enabled = true;
  double flip_prob_x = 0.5;
  double flip_prob_y = 0.5;
  double rotation_deg = 0.0;
  friend bool operator==(const AugmentSettings&, const AugmentSettings&) = default;
};

struct PhaseSettings {
  int scenes = 200;
  int epochs = 30;
  int batch_size = 2;
  double lr_peak = kPeakLearningRate;
  friend bool operator==(const PhaseSettings&, const PhaseSettings&) = default;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  SceneParams scene = toy_scene_params();
  BeamSpec source_beams;
  std::vector<BeamSpec> target_beams{BeamSpec{32, 10.67, -30.67, 720}};
  SequenceSettings sequence;
  GridSpec grid = GridSpec::centered(32, 32, 0.75, -2.5, 3.0);
  OccupancyOptions occupancy;
  BalanceSettings balance;
  LossSettings loss;
  ModelShape model;
  AugmentSettings augment;
  PhaseSettings pretrain;
  PhaseSettings finetune{10, 100, 2, kPeakLearningRate};
  std::string finetune_reinit = "head";
  int eval_scenes = 50;

  /// Runs every component validator; throws ConfigError.
  void validate() const;
};

bool operator==(const PipelineConfig& a, const PipelineConfig& b);

/// Strict parse: unknown keys and type mismatches raise ConfigError naming the field path.
PipelineConfig parse_config(const nlohmann::ordered_json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const PipelineConfig& config);
/// A small configuration for smoke runs.
PipelineConfig tiny_config();

/// Hex FNV-1a of the canonical JSON serialization.
std::string config_hash(const PipelineConfig& config);
std::string fnv_hex(std::string_view bytes);

DatasetConfig dataset_config(const PipelineConfig& config, const BeamSpec& beams, TargetKind target);
TrainConfig train_config(const PipelineConfig& config, const PhaseSettings& phase, bool augment,
                         std::uint64_t seed);
LossWeights loss_weights(const PipelineConfig& config);
ReinitScope reinit_scope(const PipelineConfig& config);

}  // namespace occspot

#endif  // OCCSPOT_CONFIG_HPP
