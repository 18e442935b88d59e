#include "occspot/config.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <stdexcept>

#include "occspot/error.hpp"
#include "occspot/io.hpp"
#include "occspot/rng.hpp"

namespace occspot {

using nlohmann::ordered_json;

namespace {

const char* type_name(const ordered_json& j) { return j.type_name(); }

// Reads the keys of one JSON object and rejects whatever was not read.
class Fields {
 public:
  Fields(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected object, got " + type_name(j));
  }

  std::string at(std::string_view key) const { return path_ + "." + std::string(key); }

  const ordered_json* find(std::string_view key) {
    seen_.insert(std::string(key));
    const auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  void get(std::string_view key, double& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) throw ConfigError(at(key) + ": expected number, got " + type_name(*v));
      out = v->get<double>();
    }
  }

  void get(std::string_view key, int& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key) + ": expected integer, got " + type_name(*v));
      const auto x = v->get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(at(key) + ": integer out of range");
      out = static_cast<int>(x);
    }
  }

  void get(std::string_view key, std::size_t& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(at(key) + ": expected non-negative integer, got " + type_name(*v));
      out = v->get<std::size_t>();
    }
  }

  void get(std::string_view key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key) + ": expected boolean, got " + type_name(*v));
      out = v->get<bool>();
    }
  }

  void get(std::string_view key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key) + ": expected string, got " + type_name(*v));
      out = v->get<std::string>();
    }
  }

  template <typename T>
  void get(std::string_view key, std::vector<T>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) throw ConfigError(at(key) + ": expected array, got " + type_name(*v));
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        const std::string p = at(key) + "[" + std::to_string(i) + "]";
        if constexpr (std::is_integral_v<T>) {
          if (!e.is_number_integer()) throw ConfigError(p + ": expected integer, got " + type_name(e));
        } else {
          if (!e.is_number()) throw ConfigError(p + ": expected number, got " + type_name(e));
        }
        out.push_back(e.get<T>());
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(at(key) + ": unknown key");
    }
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

BeamSpec parse_beams(const ordered_json& j, const std::string& path) {
  BeamSpec b;
  Fields f(j, path);
  f.get("n_beams", b.n_beams);
  f.get("alpha_up_deg", b.alpha_up);
  f.get("alpha_low_deg", b.alpha_low);
  f.get("azimuth_steps", b.azimuth_steps);
  f.finish();
  return b;
}

ordered_json beams_json(const BeamSpec& b) {
  return {{"n_beams", b.n_beams}, {"alpha_up_deg", b.alpha_up}, {"alpha_low_deg", b.alpha_low},
          {"azimuth_steps", b.azimuth_steps}};
}

PhaseSettings parse_phase(const ordered_json& j, const std::string& path, PhaseSettings p, std::string* reinit) {
  Fields f(j, path);
  f.get("scenes", p.scenes);
  f.get("epochs", p.epochs);
  f.get("batch_size", p.batch_size);
  f.get("lr_peak", p.lr_peak);
  if (reinit) f.get("reinit", *reinit);
  f.finish();
  return p;
}

ordered_json phase_json(const PhaseSettings& p) {
  return {{"scenes", p.scenes}, {"epochs", p.epochs}, {"batch_size", p.batch_size}, {"lr_peak", p.lr_peak}};
}

template <typename Fn>
void check(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

PipelineConfig parse_config(const ordered_json& j) {
  PipelineConfig c;
  Fields root(j, "config");
  std::size_t seed = c.seed;
  root.get("seed", seed);
  c.seed = seed;
  if (const auto* s = root.find("scene")) {
    Fields f(*s, "config.scene");
    if (const auto* a = f.find("arena")) {
      Fields af(*a, "config.scene.arena");
      af.get("x_min", c.scene.arena.x_min);
      af.get("x_max", c.scene.arena.x_max);
      af.get("y_min", c.scene.arena.y_min);
      af.get("y_max", c.scene.arena.y_max);
      af.finish();
    }
    f.get("n_objects", c.scene.n_objects);
    f.get("n_cls", c.scene.n_cls);
    f.get("class_mix", c.scene.class_mix);
    f.get("ground_z", c.scene.ground_z);
    f.get("has_ground", c.scene.has_ground);
    f.get("ground_class", c.scene.ground_class);
    f.get("dynamic_probability", c.scene.dynamic_probability);
    f.get("ego_clearance", c.scene.ego_clearance);
    f.get("size_jitter", c.scene.size_jitter);
    f.get("max_attempts", c.scene.max_attempts);
    f.finish();
  }
  if (const auto* s = root.find("source_beams")) c.source_beams = parse_beams(*s, "config.source_beams");
  if (const auto* s = root.find("target_beams")) {
    if (!s->is_array()) throw ConfigError("config.target_beams: expected array, got " + std::string(type_name(*s)));
    c.target_beams.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      c.target_beams.push_back(parse_beams((*s)[i], "config.target_beams[" + std::to_string(i) + "]"));
    }
  }
  if (const auto* s = root.find("sequence")) {
    Fields f(*s, "config.sequence");
    f.get("frames", c.sequence.frames);
    f.get("keyframe_hz", c.sequence.keyframe_hz);
    f.get("ego_speed", c.sequence.ego_speed);
    f.get("sensor_height", c.sequence.sensor_height);
    f.get("max_range", c.sequence.max_range);
    f.get("min_range", c.sequence.min_range);
    f.finish();
  }
  if (const auto* s = root.find("grid")) {
    Fields f(*s, "config.grid");
    f.get("H", c.grid.H);
    f.get("W", c.grid.W);
    f.get("cell_size", c.grid.cell_size);
    c.grid.origin_x = -0.5 * c.grid.W * c.grid.cell_size;
    c.grid.origin_y = -0.5 * c.grid.H * c.grid.cell_size;
    f.get("origin_x", c.grid.origin_x);
    f.get("origin_y", c.grid.origin_y);
    f.get("z_min", c.grid.z_min);
    f.get("z_max", c.grid.z_max);
    f.get("n_cls", c.grid.n_cls);
    f.finish();
  }
  if (const auto* s = root.find("occupancy")) {
    Fields f(*s, "config.occupancy");
    f.get("densify", c.occupancy.densify);
    f.get("radius", c.occupancy.radius);
    f.get("k", c.occupancy.k);
    f.get("tie_weights", c.occupancy.tie_weights);
    f.finish();
  }
  if (const auto* s = root.find("balance")) {
    Fields f(*s, "config.balance");
    f.get("enabled", c.balance.enabled);
    f.get("foreground", c.balance.foreground);
    f.get("background", c.balance.background);
    f.finish();
  }
  if (const auto* s = root.find("loss")) {
    Fields f(*s, "config.loss");
    f.get("w_fg", c.loss.w_fg);
    f.get("w_bg", c.loss.w_bg);
    f.get("w_empty", c.loss.w_empty);
    f.get("lambda", c.loss.lambda);
    f.get("lovasz_all_classes", c.loss.lovasz_all_classes);
    f.finish();
  }
  if (const auto* s = root.find("model")) {
    Fields f(*s, "config.model");
    f.get("point_features", c.model.point_features);
    f.get("embed", c.model.embed);
    f.get("enc1", c.model.enc1);
    f.get("enc2", c.model.enc2);
    f.get("dec1", c.model.dec1);
    f.get("dec2", c.model.dec2);
    f.get("dec3", c.model.dec3);
    f.get("n_out", c.model.n_out);
    f.finish();
  }
  if (const auto* s = root.find("augment")) {
    Fields f(*s, "config.augment");
    f.get("enabled", c.augment.enabled);
    f.get("flip_prob_x", c.augment.flip_prob_x);
    f.get("flip_prob_y", c.augment.flip_prob_y);
    f.get("rotation_deg", c.augment.rotation_deg);
    f.finish();
  }
  if (const auto* s = root.find("pretrain")) c.pretrain = parse_phase(*s, "config.pretrain", c.pretrain, nullptr);
  if (const auto* s = root.find("finetune")) {
    c.finetune = parse_phase(*s, "config.finetune", c.finetune, &c.finetune_reinit);
  }
  if (const auto* s = root.find("eval")) {
    Fields f(*s, "config.eval");
    f.get("scenes", c.eval_scenes);
    f.finish();
  }
  root.finish();
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  check("config.scene", [&] { scene.validate(); });
  check("config.source_beams", [&] { source_beams.validate(); });
  if (target_beams.empty()) throw ConfigError("config.target_beams: at least one target spec is required");
  for (std::size_t i = 0; i < target_beams.size(); ++i) {
    check("config.target_beams[" + std::to_string(i) + "]", [&] { target_beams[i].validate(); });
  }
  if (sequence.frames < 1) throw ConfigError("config.sequence.frames: must be >= 1");
  if (!(sequence.keyframe_hz > 0.0)) throw ConfigError("config.sequence.keyframe_hz: must be > 0");
  if (!(sequence.min_range >= 0.0 && sequence.max_range > sequence.min_range)) {
    throw ConfigError("config.sequence: need 0 <= min_range < max_range");
  }
  check("config.grid", [&] { grid.validate(); });
  if (grid.H % 4 != 0 || grid.W % 4 != 0) throw ConfigError("config.grid: H and W must be multiples of 4");
  if (grid.n_cls != scene.n_cls) throw ConfigError("config.grid.n_cls: must equal config.scene.n_cls");
  if (occupancy.k == 0) throw ConfigError("config.occupancy.k: must be >= 1");
  if (!(occupancy.radius >= 0.0)) throw ConfigError("config.occupancy.radius: must be >= 0");
  if (!occupancy.tie_weights.empty() && occupancy.tie_weights.size() != static_cast<std::size_t>(grid.n_cls) + 1) {
    throw ConfigError("config.occupancy.tie_weights: must have n_cls + 1 entries");
  }
  check("config.balance", [&] { (void)class_loss_weights(grid.n_cls, balance.foreground, balance.background); });
  if (!(loss.w_fg > 0.0 && loss.w_bg > 0.0 && loss.w_empty > 0.0)) throw ConfigError("config.loss: weights must be > 0");
  if (!(loss.lambda >= 0.0)) throw ConfigError("config.loss.lambda: must be >= 0");
  check("config.model", [&] { model.validate(); });
  if (model.n_out != grid.n_cls + 1) throw ConfigError("config.model.n_out: must equal grid.n_cls + 1");
  if (model.point_features != 1) throw ConfigError("config.model.point_features: synthetic scans carry 1 feature");
  for (const auto* p : {&augment.flip_prob_x, &augment.flip_prob_y}) {
    if (!(*p >= 0.0 && *p <= 1.0)) throw ConfigError("config.augment: flip probabilities must lie in [0, 1]");
  }
  if (!(augment.rotation_deg >= 0.0 && augment.rotation_deg <= 180.0)) {
    throw ConfigError("config.augment.rotation_deg: must lie in [0, 180]");
  }
  for (const auto& [name, p] : {std::pair<const char*, const PhaseSettings*>{"pretrain", &pretrain}, {"finetune", &finetune}}) {
    const std::string path = std::string("config.") + name;
    if (p->scenes < 0) throw ConfigError(path + ".scenes: must be >= 0");
    if (p->epochs < 1) throw ConfigError(path + ".epochs: must be >= 1");
    if (p->batch_size < 1) throw ConfigError(path + ".batch_size: must be >= 1");
    if (!(p->lr_peak >= 0.0)) throw ConfigError(path + ".lr_peak: must be >= 0");
  }
  if (finetune_reinit != "head" && finetune_reinit != "decoder") {
    throw ConfigError("config.finetune.reinit: expected \"head\" or \"decoder\"");
  }
  if (eval_scenes < 0) throw ConfigError("config.eval.scenes: must be >= 0");
}

ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json targets = ordered_json::array();
  for (const auto& b : c.target_beams) targets.push_back(beams_json(b));
  ordered_json finetune = phase_json(c.finetune);
  finetune["reinit"] = c.finetune_reinit;
  return {
      {"seed", c.seed},
      {"scene",
       {{"arena", {{"x_min", c.scene.arena.x_min}, {"x_max", c.scene.arena.x_max},
                   {"y_min", c.scene.arena.y_min}, {"y_max", c.scene.arena.y_max}}},
        {"n_objects", c.scene.n_objects},
        {"n_cls", c.scene.n_cls},
        {"class_mix", c.scene.class_mix},
        {"ground_z", c.scene.ground_z},
        {"has_ground", c.scene.has_ground},
        {"ground_class", c.scene.ground_class},
        {"dynamic_probability", c.scene.dynamic_probability},
        {"ego_clearance", c.scene.ego_clearance},
        {"size_jitter", c.scene.size_jitter},
        {"max_attempts", c.scene.max_attempts}}},
      {"source_beams", beams_json(c.source_beams)},
      {"target_beams", targets},
      {"sequence",
       {{"frames", c.sequence.frames}, {"keyframe_hz", c.sequence.keyframe_hz},
        {"ego_speed", c.sequence.ego_speed}, {"sensor_height", c.sequence.sensor_height},
        {"max_range", c.sequence.max_range}, {"min_range", c.sequence.min_range}}},
      {"grid",
       {{"H", c.grid.H}, {"W", c.grid.W}, {"cell_size", c.grid.cell_size}, {"origin_x", c.grid.origin_x},
        {"origin_y", c.grid.origin_y}, {"z_min", c.grid.z_min}, {"z_max", c.grid.z_max}, {"n_cls", c.grid.n_cls}}},
      {"occupancy",
       {{"densify", c.occupancy.densify}, {"radius", c.occupancy.radius}, {"k", c.occupancy.k},
        {"tie_weights", c.occupancy.tie_weights}}},
      {"balance",
       {{"enabled", c.balance.enabled}, {"foreground", c.balance.foreground}, {"background", c.balance.background}}},
      {"loss",
       {{"w_fg", c.loss.w_fg}, {"w_bg", c.loss.w_bg}, {"w_empty", c.loss.w_empty}, {"lambda", c.loss.lambda},
        {"lovasz_all_classes", c.loss.lovasz_all_classes}}},
      {"model",
       {{"point_features", c.model.point_features}, {"embed", c.model.embed}, {"enc1", c.model.enc1},
        {"enc2", c.model.enc2}, {"dec1", c.model.dec1}, {"dec2", c.model.dec2}, {"dec3", c.model.dec3},
        {"n_out", c.model.n_out}}},
      {"augment",
       {{"enabled", c.augment.enabled}, {"flip_prob_x", c.augment.flip_prob_x},
        {"flip_prob_y", c.augment.flip_prob_y}, {"rotation_deg", c.augment.rotation_deg}}},
      {"pretrain", phase_json(c.pretrain)},
      {"finetune", finetune},
      {"eval", {{"scenes", c.eval_scenes}}},
  };
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) { return config_to_json(a) == config_to_json(b); }

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    const auto bytes = read_file(path);
    text.assign(bytes.begin(), bytes.end());
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

PipelineConfig tiny_config() {
  PipelineConfig c;
  c.scene.n_objects = 8;
  c.source_beams.azimuth_steps = 360;
  c.target_beams[0].azimuth_steps = 360;
  c.grid = GridSpec::centered(16, 16, 1.5, -2.5, 3.0);
  c.pretrain = {8, 3, 2, kPeakLearningRate};
  c.finetune = {3, 5, 2, kPeakLearningRate};
  c.eval_scenes = 4;
  c.model = ModelShape{1, 8, 12, 16, 16, 12, 8, schema::kNumClasses + 1};
  return c;
}

std::string fnv_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const PipelineConfig& config) { return fnv_hex(config_to_json(config).dump()); }

DatasetConfig dataset_config(const PipelineConfig& c, const BeamSpec& beams, TargetKind target) {
  DatasetConfig d;
  d.scene = c.scene;
  d.beams = beams;
  d.scan = ScanOptions{c.sequence.max_range, c.sequence.min_range};
  d.sequence_frames = c.sequence.frames;
  d.keyframe_hz = c.sequence.keyframe_hz;
  d.ego_speed = c.sequence.ego_speed;
  d.sensor_height = c.sequence.sensor_height;
  d.grid = c.grid;
  d.occupancy = c.occupancy;
  if (d.occupancy.tie_weights.empty()) d.occupancy.tie_weights = loss_weights(c).w;
  d.target = target;
  return d;
}

LossWeights loss_weights(const PipelineConfig& c) {
  LossWeights w{std::vector<double>(static_cast<std::size_t>(c.grid.n_cls) + 1, c.loss.w_bg)};
  w.w[0] = c.loss.w_empty;
  for (int f : c.balance.foreground) w.w[static_cast<std::size_t>(f)] = c.loss.w_fg;
  return w;
}

TrainConfig train_config(const PipelineConfig& c, const PhaseSettings& phase, bool augment, std::uint64_t seed) {
  TrainConfig t;
  t.epochs = phase.epochs;
  t.batch_size = phase.batch_size;
  t.seed = seed;
  t.schedule.peak = phase.lr_peak;
  t.lambda = c.loss.lambda;
  t.lovasz.all_classes = c.loss.lovasz_all_classes;
  t.loss_weights = loss_weights(c);
  t.class_balance = c.balance.enabled;
  t.foreground = c.balance.foreground;
  t.augment = augment && c.augment.enabled;
  t.source_beams = c.source_beams;
  t.augment_config.target_beam_specs = c.target_beams;
  t.augment_config.flip_prob_x = c.augment.flip_prob_x;
  t.augment_config.flip_prob_y = c.augment.flip_prob_y;
  t.augment_config.rotation_range = c.augment.rotation_deg * std::numbers::pi / 180.0;
  t.augment_config.seed = seed;
  return t;
}

ReinitScope reinit_scope(const PipelineConfig& c) {
  return c.finetune_reinit == "decoder" ? ReinitScope::kDecoder : ReinitScope::kHead;
}

}  // namespace occspot
