#ifndef OCCSPOT_PIPELINE_HPP
#define OCCSPOT_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "occspot/config.hpp"
#include "occspot/occ_gt.hpp"

namespace occspot {

inline constexpr const char* kVersion = "0.1.0";

// Scene index offsets keep the pre-train, fine-tune and evaluation splits disjoint.
inline constexpr std::size_t kFinetuneSceneOffset = 1'000'000;
inline constexpr std::size_t kEvalSceneOffset = 2'000'000;

struct RunManifest {
  std::string command;
  nlohmann::ordered_json args = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::optional<PipelineConfig> config;
  std::vector<std::filesystem::path> outputs;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();

  /// Outputs are listed with their FNV-1a content hash; no timestamps.
  nlohmann::ordered_json to_json() const;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Dataset layout:
///   <out>/manifest.json
///   <out>/scene_XXXX/poses.json
///   <out>/scene_XXXX/frame_XXX.{sptc,sptl,boxes.jsonl}
/// The tree is built in a sibling temporary directory and renamed into place.
RunManifest gen_scenes(const PipelineConfig& config, const std::filesystem::path& out, std::size_t scenes,
                       bool target_beams);

struct SequenceOnDisk {
  std::vector<LabeledFrame> frames;
  std::vector<Pose> poses;
};
SequenceOnDisk read_sequence(const std::filesystem::path& dir);
void write_poses(const std::filesystem::path& path, std::span<const Pose> poses);
std::vector<Pose> read_poses(const std::filesystem::path& path);

/// Keyframe defaults to the middle frame.
RunManifest make_occ(const PipelineConfig& config, const std::filesystem::path& sequence_dir,
                     const std::filesystem::path& out, std::optional<std::size_t> keyframe);

/// Re-samples a frame (and its sibling .sptl labels when present).
RunManifest resample(double factor, std::uint64_t seed, const std::filesystem::path& in,
                     const std::filesystem::path& out);

/// stats JSON: {"foreground": [ids], "frames": [{"<class>": count, ...}, ...]}.
RunManifest balance_weights(const std::filesystem::path& stats);

RunManifest pretrain(const PipelineConfig& config, const std::filesystem::path& out);

/// `ckpt` empty -> from scratch.
RunManifest finetune(const PipelineConfig& config, const std::optional<std::filesystem::path>& ckpt,
                     std::size_t labels, const std::filesystem::path& out);

RunManifest eval_miou(const PipelineConfig& config, const std::filesystem::path& ckpt,
                      const std::filesystem::path& dataset, bool all_cells);

RunManifest theory_check(std::size_t sweeps, std::uint64_t seed);

}  // namespace occspot

#endif  // OCCSPOT_PIPELINE_HPP
