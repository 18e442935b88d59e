#include "occspot/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "occspot/augment.hpp"
#include "occspot/balance.hpp"
#include "occspot/checkpoint.hpp"
#include "occspot/error.hpp"
#include "occspot/io.hpp"
#include "occspot/parallel.hpp"
#include "occspot/rng.hpp"
#include "occspot/theory.hpp"
#include "occspot/train.hpp"

namespace occspot {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

std::string file_hash(const fs::path& p) {
  if (fs::is_directory(p)) {
    // Hash of the sorted (relative path, content hash) listing.
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file()) entries.emplace_back(fs::relative(e.path(), p).generic_string(), file_hash(e.path()));
    }
    std::sort(entries.begin(), entries.end());
    std::string listing;
    for (const auto& [name, h] : entries) listing += name + " " + h + "\n";
    return fnv_hex(listing);
  }
  const auto bytes = read_file(p);
  return fnv_hex({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

fs::path temp_sibling(const fs::path& out) {
  fs::path tmp = out;
  tmp += ".tmp";
  return tmp;
}

ordered_json iou_json(const MiouResult& r) {
  ordered_json per = ordered_json::array();
  for (const auto& v : r.per_class) per.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
  return {{"miou", r.miou}, {"classes_counted", r.n_counted}, {"per_class", per}};
}

}  // namespace

ordered_json RunManifest::to_json() const {
  ordered_json outs = ordered_json::array();
  for (const auto& p : outputs) outs.push_back({{"path", p.generic_string()}, {"fnv64", file_hash(p)}});
  ordered_json j{{"tool", "occspot"}, {"version", kVersion}, {"command", command}, {"args", args}, {"seed", seed}};
  if (config) {
    j["config_hash"] = config_hash(*config);
    j["config"] = config_to_json(*config);
  }
  j["outputs"] = outs;
  j["results"] = results;
  return j;
}

void write_manifest(const fs::path& path, const RunManifest& manifest) {
  write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

void write_poses(const fs::path& path, std::span<const Pose> poses) {
  ordered_json j = ordered_json::array();
  for (const auto& p : poses) {
    const Mat3& r = p.rotation();
    const Vec3& t = p.translation();
    j.push_back({{"R", {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2)}},
                 {"t", {t.x(), t.y(), t.z()}}});
  }
  write_file_atomic(path, j.dump() + "\n");
}

std::vector<Pose> read_poses(const fs::path& path) {
  const auto bytes = read_file(path);
  std::vector<Pose> out;
  try {
    const auto j = ordered_json::parse(bytes.begin(), bytes.end());
    for (const auto& e : j) {
      const auto r = e.at("R").get<std::vector<double>>();
      const auto t = e.at("t").get<std::vector<double>>();
      if (r.size() != 9 || t.size() != 3) throw DataError("poses: malformed entry in " + path.string());
      Mat3 m;
      m << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
      out.emplace_back(m, Vec3(t[0], t[1], t[2]));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("poses: " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("poses: " + path.string() + ": " + e.what());
  }
  return out;
}

RunManifest gen_scenes(const PipelineConfig& config, const fs::path& out, std::size_t scenes, bool target_beams) {
  config.validate();
  const BeamSpec& beams = target_beams ? config.target_beams.front() : config.source_beams;
  const DatasetConfig dc = dataset_config(config, beams, TargetKind::kSingleFrame);
  const SequenceMeta meta = linear_sequence_meta(dc.sequence_frames, dc.keyframe_hz, dc.ego_speed, dc.sensor_height);

  const fs::path tmp = temp_sibling(out);
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    std::vector<Scene> built(scenes);
    for (std::size_t s = 0; s < scenes; ++s) built[s] = build_scene(dc.scene, derive_seed(config.seed, "scene", s));
    parallel_for(scenes, [&](std::size_t s) {
      const fs::path dir = tmp / numbered("scene_", s, 4);
      fs::create_directories(dir);
      const auto seq = generate_sequence(built[s], dc.beams, meta, dc.scan);
      for (std::size_t f = 0; f < seq.size(); ++f) {
        const std::string stem = numbered("frame_", f, 3);
        write_frame(dir / (stem + ".sptc"), seq[f].cloud);
        write_labels(dir / (stem + ".sptl"), seq[f].labels);
        write_boxes(dir / (stem + ".boxes.jsonl"), seq[f].boxes);
      }
      write_poses(dir / "poses.json", meta.ego_poses);
    });
    RunManifest m;
    m.command = "gen-scenes";
    m.args = {{"scenes", scenes}, {"beams", target_beams ? "target" : "source"}};
    m.seed = config.seed;
    m.config = config;
    write_manifest(tmp / "manifest.json", m);
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  fs::remove_all(out);
  fs::rename(tmp, out);

  RunManifest m;
  m.command = "gen-scenes";
  m.args = {{"out", out.generic_string()}, {"scenes", scenes}, {"beams", target_beams ? "target" : "source"}};
  m.seed = config.seed;
  m.config = config;
  m.outputs = {out};
  return m;
}

SequenceOnDisk read_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("sequence: not a directory: " + dir.string());
  SequenceOnDisk seq;
  seq.poses = read_poses(dir / "poses.json");
  for (std::size_t f = 0; f < seq.poses.size(); ++f) {
    const std::string stem = numbered("frame_", f, 3);
    LabeledFrame frame;
    frame.cloud = read_frame(dir / (stem + ".sptc"));
    frame.labels = read_labels(dir / (stem + ".sptl"));
    const fs::path boxes = dir / (stem + ".boxes.jsonl");
    if (fs::exists(boxes)) frame.boxes = read_boxes(boxes);
    seq.frames.push_back(std::move(frame));
  }
  if (seq.frames.empty()) throw DataError("sequence: no frames in " + dir.string());
  return seq;
}

RunManifest make_occ(const PipelineConfig& config, const fs::path& sequence_dir, const fs::path& out,
                     std::optional<std::size_t> keyframe) {
  config.validate();
  const auto seq = read_sequence(sequence_dir);
  const std::size_t key = keyframe.value_or(seq.frames.size() / 2);
  if (key >= seq.frames.size()) throw DataError("make-occ: keyframe index out of range");
  const auto grid = make_occupancy(seq.frames, seq.poses, config.grid, key,
                                   dataset_config(config, config.source_beams, TargetKind::kOccupancy).occupancy);
  write_grid(out, grid);
  RunManifest m;
  m.command = "make-occ";
  m.args = {{"sequence", sequence_dir.generic_string()}, {"out", out.generic_string()}, {"keyframe", key}};
  m.seed = config.seed;
  m.config = config;
  m.outputs = {out};
  m.results = {{"nonzero_cells", grid.nonzero()}};
  return m;
}

RunManifest resample(double factor, std::uint64_t seed, const fs::path& in, const fs::path& out) {
  const ResampleFactor r(factor);
  const PointCloud cloud = read_frame(in);
  fs::path labels_in = in;
  labels_in.replace_extension(".sptl");
  const bool has_labels = fs::exists(labels_in);
  PointLabels labels;
  if (has_labels) {
    labels = read_labels(labels_in);
  } else {
    labels.values.assign(cloud.size(), 0);
  }
  const auto res = beam_resample(cloud, labels, r, derive_seed(seed, "augment"));
  write_frame(out, res.cloud);
  RunManifest m;
  m.command = "resample";
  m.args = {{"factor", factor}, {"in", in.generic_string()}, {"out", out.generic_string()}};
  m.seed = seed;
  m.outputs = {out};
  if (has_labels) {
    fs::path labels_out = out;
    labels_out.replace_extension(".sptl");
    write_labels(labels_out, res.labels);
    m.outputs.push_back(labels_out);
  }
  m.results = {{"points_in", cloud.size()}, {"points_out", res.cloud.size()},
               {"beams_in", estimate_beams(cloud).size()}, {"beams_out", estimate_beams(res.cloud).size()}};
  return m;
}

RunManifest balance_weights(const fs::path& stats) {
  const auto bytes = read_file(stats);
  std::vector<FrameSummary> frames;
  std::vector<int> foreground;
  try {
    const auto j = ordered_json::parse(bytes.begin(), bytes.end());
    foreground = j.at("foreground").get<std::vector<int>>();
    for (const auto& f : j.at("frames")) {
      FrameSummary s;
      for (const auto& [key, value] : f.items()) s.instances[std::stoi(key)] = value.get<std::uint64_t>();
      frames.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("balance-weights: " + stats.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw DataError("balance-weights: " + stats.string() + ": bad class id");
  }
  const auto stats_ = class_stats(frames, foreground);
  const auto s = sampling_weights(stats_);
  ordered_json weights = ordered_json::object();
  for (std::size_t i = 0; i < s.class_ids.size(); ++i) weights[std::to_string(s.class_ids[i])] = s.s[i];
  RunManifest m;
  m.command = "balance-weights";
  m.args = {{"stats", stats.generic_string()}};
  m.results = {{"s", weights}, {"excluded", stats_.excluded}, {"frame_weights", frame_weights(frames, s)}};
  return m;
}

namespace {

void write_trained(const fs::path& out, const TrainResult& r, const PipelineConfig& config, const char* phase,
                   RunManifest& m) {
  Checkpoint ckpt{r.params, {{"phase", phase}, {"seed", config.seed}, {"config_hash", config_hash(config)}}};
  write_checkpoint(out, ckpt);
  m.outputs = {out};
  m.results = {{"steps", r.steps}, {"epoch_loss", r.epoch_loss}};
}

}  // namespace

RunManifest pretrain(const PipelineConfig& config, const fs::path& out) {
  config.validate();
  const auto dc = dataset_config(config, config.source_beams, TargetKind::kOccupancy);
  const auto data = build_dataset(dc, static_cast<std::size_t>(config.pretrain.scenes), config.seed);
  const auto tc = train_config(config, config.pretrain, true, config.seed);
  const auto r = train(data, init_params(config.model, derive_seed(config.seed, "init")), config.grid, tc);
  RunManifest m;
  m.command = "pretrain";
  m.args = {{"out", out.generic_string()}};
  m.seed = config.seed;
  m.config = config;
  write_trained(out, r, config, "pretrain", m);
  return m;
}

RunManifest finetune(const PipelineConfig& config, const std::optional<fs::path>& ckpt, std::size_t labels,
                     const fs::path& out) {
  config.validate();
  std::optional<Checkpoint> pre;
  if (ckpt) pre = read_checkpoint(*ckpt);
  const auto dc = dataset_config(config, config.target_beams.front(), TargetKind::kSingleFrame);
  const auto data = build_dataset(dc, labels, config.seed, kFinetuneSceneOffset);
  const auto tc = train_config(config, config.finetune, false, config.seed);
  const auto r = finetune_segmentation(pre ? &pre->params : nullptr, data, config.model, config.grid, tc,
                                       reinit_scope(config));
  RunManifest m;
  m.command = "finetune";
  m.args = {{"ckpt", ckpt ? ckpt->generic_string() : std::string()}, {"labels", labels}, {"out", out.generic_string()}};
  m.seed = config.seed;
  m.config = config;
  write_trained(out, r, config, "finetune", m);
  return m;
}

RunManifest eval_miou(const PipelineConfig& config, const fs::path& ckpt, const fs::path& dataset, bool all_cells) {
  config.validate();
  const auto model = read_checkpoint(ckpt);
  if (!fs::is_directory(dataset)) throw DataError("eval-miou: not a directory: " + dataset.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(dataset)) {
    if (e.is_directory() && e.path().filename().string().starts_with("scene_")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw DataError("eval-miou: no scene directories in " + dataset.string());
  std::vector<Sample> samples;
  for (const auto& d : dirs) {
    auto seq = read_sequence(d);
    const std::size_t key = seq.frames.size() / 2;
    Sample s;
    s.cloud = std::move(seq.frames[key].cloud);
    s.labels = std::move(seq.frames[key].labels);
    s.target = voxelize_bev(s.cloud, s.labels, config.grid,
                            dataset_config(config, config.source_beams, TargetKind::kSingleFrame).occupancy.tie_weights);
    samples.push_back(std::move(s));
  }
  const auto cm = evaluate(model.params, samples, config.grid, !all_cells);
  RunManifest m;
  m.command = "eval-miou";
  m.args = {{"ckpt", ckpt.generic_string()}, {"dataset", dataset.generic_string()}, {"all_cells", all_cells}};
  m.seed = config.seed;
  m.config = config;
  m.results = iou_json(miou(cm, true));
  m.results["scenes"] = samples.size();
  return m;
}

RunManifest theory_check(std::size_t sweeps, std::uint64_t seed) {
  const auto s = theory::run_sweeps(sweeps, sweeps, sweeps, seed);
  RunManifest m;
  m.command = "theory-check";
  m.args = {{"sweeps", sweeps}};
  m.seed = seed;
  m.results = {{"bound_cases", s.bound_cases},
               {"min_slack", s.min_slack},
               {"bound_counterexamples", s.bound_violations},
               {"lemma1_cases", s.lemma_cases},
               {"lemma1_max_difference", s.lemma_max_difference},
               {"lemma1_counterexamples", s.lemma_violations},
               {"risk_cases", s.risk_cases},
               {"risk_counterexamples", s.risk_violations}};
  return m;
}

}  // namespace occspot
