#include "occspot/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "occspot/error.hpp"
#include "occspot/parallel.hpp"
#include "occspot/rng.hpp"

namespace occspot {

SceneParams toy_scene_params() {
  SceneParams p = default_scene_params();
  p.arena = {-14.0, 14.0, -14.0, 14.0};
  p.n_objects = 12;
  return p;
}

OccupancyOptions balanced_occupancy_options() {
  OccupancyOptions o;
  o.tie_weights = default_loss_weights().w;
  return o;
}

void DatasetConfig::validate() const {
  scene.validate();
  beams.validate();
  grid.validate();
  if (sequence_frames < 1) throw ConfigError("dataset.sequence_frames must be >= 1");
  if (!(keyframe_hz > 0.0)) throw ConfigError("dataset.keyframe_hz must be > 0");
  if (!(sensor_height >= 0.0)) throw ConfigError("dataset.sensor_height must be >= 0");
  if (occupancy.k == 0) throw ConfigError("dataset.occupancy.k must be >= 1");
}

Sample build_sample(const DatasetConfig& config, std::uint64_t scene_seed) {
  const Scene scene = build_scene(config.scene, scene_seed);
  const SequenceMeta meta =
      linear_sequence_meta(config.sequence_frames, config.keyframe_hz, config.ego_speed, config.sensor_height);
  const auto seq = generate_sequence(scene, config.beams, meta, config.scan);
  const std::size_t key = seq.size() / 2;

  Sample s;
  s.cloud = seq[key].cloud;
  s.labels = seq[key].labels;
  if (config.target == TargetKind::kOccupancy) {
    std::vector<LabeledFrame> frames;
    frames.reserve(seq.size());
    for (const auto& f : seq) frames.push_back({f.cloud, f.labels, f.boxes});
    s.target = make_occupancy(frames, meta.ego_poses, config.grid, key, config.occupancy);
  } else {
    s.target = voxelize_bev(s.cloud, s.labels, config.grid, config.occupancy.tie_weights);
  }
  const Pose to_sensor = meta.ego_poses[key].inverse();
  for (const auto& b : seq[key].boxes) {
    const Vec3 c = to_sensor.apply(b.center);
    if (config.grid.cell_of(c.x(), c.y()) >= 0) ++s.summary.instances[b.class_id];
  }
  return s;
}

std::vector<Sample> build_dataset(const DatasetConfig& config, std::size_t n_scenes, std::uint64_t seed,
                                  std::size_t first) {
  config.validate();
  std::vector<Sample> out(n_scenes);
  parallel_for(n_scenes, [&](std::size_t i) { out[i] = build_sample(config, derive_seed(seed, "scene", first + i)); });
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(schedule.peak >= 0.0)) throw ConfigError("train.lr_peak must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("train.lambda must be >= 0");
  loss_weights.validate();
  if (augment) {
    source_beams.validate();
    augment_config.validate();
  }
}

TotalLoss loss_and_gradient(const ModelParams& params, const Tensor3& pillars, const OccupancyGrid& target,
                            const LossWeights& weights, double lambda, const LovaszOptions& lovasz,
                            std::span<double> grad, double scale) {
  ForwardCache cache;
  const Tensor3 logits = model_forward(pillars, params, cache);
  TotalLoss total = total_loss(logits, target, weights, lambda, lovasz);
  if (scale != 1.0) {
    for (double& g : total.grad_logits.data) g *= scale;
  }
  model_backward(cache, params, total.grad_logits, grad);
  return total;
}

PreparedInput augment_sample(const Sample& sample, const GridSpec& spec, const TrainConfig& config,
                             std::uint64_t seed) {
  if (!config.augment) return {pillarize(sample.cloud, spec), sample.target};
  const AugmentConfig& ac = config.augment_config;
  Rng rng(derive_seed(seed, "augment"));
  PointCloud cloud = sample.cloud;
  PointLabels labels = sample.labels;
  if (!ac.target_beam_specs.empty()) {
    const auto& target = ac.target_beam_specs[rng.below(ac.target_beam_specs.size())];
    const auto factor = resample_factor(config.source_beams, target);
    auto resampled = beam_resample(cloud, labels, factor.factor, derive_seed(seed, "augment", 1));
    cloud = std::move(resampled.cloud);
    labels = std::move(resampled.labels);
  }
  OccupancyGrid grid = sample.target;
  bool fx = false;
  bool fy = false;
  auto flipped = random_flip(cloud, labels, {}, ac, derive_seed(seed, "augment", 2), &fx, &fy);
  if (fx) grid = flip_grid(grid, FlipAxis::kX);
  if (fy) grid = flip_grid(grid, FlipAxis::kY);
  if (ac.rotation_range > 0.0) {
    const double angle = draw_rotation(ac, derive_seed(seed, "augment", 3));
    flipped = random_rotate(flipped.cloud, flipped.labels, {}, angle);
    grid = rotate_grid(grid, angle);
  }
  return {pillarize(flipped.cloud, spec), std::move(grid)};
}

namespace {

std::vector<double> balance_weights(std::span<const Sample> data, const TrainConfig& config) {
  std::vector<FrameSummary> summaries;
  summaries.reserve(data.size());
  for (const auto& s : data) summaries.push_back(s.summary);
  bool any = false;
  for (const auto& f : summaries) {
    for (int c : config.foreground) {
      const auto it = f.instances.find(c);
      if (it != f.instances.end() && it->second > 0) any = true;
    }
  }
  if (!any) return std::vector<double>(data.size(), 1.0);
  return frame_weights(summaries, sampling_weights(class_stats(summaries, config.foreground)));
}

}  // namespace

TrainResult train(std::span<const Sample> data, ModelParams init, const GridSpec& spec, const TrainConfig& config) {
  config.validate();
  init.validate();
  if (data.empty()) throw DataError("train: empty dataset");
  const std::size_t n = data.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t per_epoch = (n + batch - 1) / batch;
  std::size_t total_steps = per_epoch * static_cast<std::size_t>(config.epochs);
  if (config.max_steps > 0) total_steps = std::min(total_steps, config.max_steps);

  const std::vector<double> weights = config.class_balance ? balance_weights(data, config)
                                                           : std::vector<double>(n, 1.0);
  TrainResult result;
  result.params = std::move(init);
  result.params.lambda = config.lambda;
  Adam adam(result.params.values.size(), config.adam);
  const std::size_t n_params = result.params.values.size();
  std::vector<double> grad(n_params);
  std::vector<std::vector<double>> sample_grads(batch, std::vector<double>(n_params));
  std::vector<double> sample_loss(batch);

  std::size_t step = 0;
  for (int epoch = 0; epoch < config.epochs && step < total_steps; ++epoch) {
    const auto e = static_cast<std::uint64_t>(epoch);
    std::vector<std::size_t> order = config.class_balance
                                         ? resample_frames(weights, n, derive_seed(config.seed, "sampler", e))
                                         : [&] {
                                             std::vector<std::size_t> v(n);
                                             std::iota(v.begin(), v.end(), std::size_t{0});
                                             return v;
                                           }();
    Rng order_rng(derive_seed(config.seed, "batch-order", e));
    shuffle(order.begin(), order.end(), order_rng);

    double epoch_sum = 0.0;
    std::size_t epoch_count = 0;
    for (std::size_t b = 0; b < per_epoch && step < total_steps; ++b, ++step) {
      const std::size_t begin = b * batch;
      const std::size_t count = std::min(batch, n - begin);
      const double scale = 1.0 / static_cast<double>(count);
      try {
        parallel_for(count, [&](std::size_t j) {
          auto& g = sample_grads[j];
          std::fill(g.begin(), g.end(), 0.0);
          const std::uint64_t aug_seed = derive_seed(config.seed, "augment", e * n + begin + j);
          const auto input = augment_sample(data[order[begin + j]], spec, config, aug_seed);
          sample_loss[j] = loss_and_gradient(result.params, input.pillars, input.target, config.loss_weights,
                                             config.lambda, config.lovasz, g, scale)
                               .loss;
        });
      } catch (const NumericalError& err) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + ": " + err.what());
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        batch_loss += sample_loss[j];
        for (std::size_t i = 0; i < n_params; ++i) grad[i] += sample_grads[j][i];
      }
      for (double g : grad) {
        if (!std::isfinite(g)) {
          throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                               std::to_string(step) + ": non-finite gradient");
        }
      }
      adam.step(result.params.values, grad, config.schedule(step, total_steps));
      result.step_loss.push_back(batch_loss * scale);
      epoch_sum += batch_loss;
      epoch_count += count;
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(epoch_count));
  }
  result.steps = step;
  return result;
}

TrainResult finetune_segmentation(const ModelParams* pretrained, std::span<const Sample> labeled,
                                  const ModelShape& shape, const GridSpec& spec, const TrainConfig& config,
                                  ReinitScope scope) {
  if (labeled.empty()) throw DataError("empty fine-tune set");
  ModelParams params = init_params(shape, derive_seed(config.seed, "init"));
  if (pretrained) {
    pretrained->validate();
    const ModelShape& p = pretrained->shape;
    const bool encoder_ok = p.point_features == shape.point_features && p.embed == shape.embed &&
                            p.enc1 == shape.enc1 && p.enc2 == shape.enc2;
    if (!encoder_ok || (scope == ReinitScope::kHead && !(p == shape))) {
      throw DataError("finetune: checkpoint shape is incompatible with the requested model");
    }
    const ParamLayout layout(shape);
    const std::size_t keep = scope == ReinitScope::kDecoder ? layout.encoder_size() : layout.offset(Block::kHeadW);
    std::copy_n(pretrained->values.begin(), keep, params.values.begin());
  }
  return train(labeled, std::move(params), spec, config);
}

ConfusionMatrix evaluate(const ModelParams& params, std::span<const Sample> data, const GridSpec& spec,
                         bool labeled_only) {
  params.validate();
  const int n = params.shape.n_out;
  std::vector<ConfusionMatrix> parts(data.size(), ConfusionMatrix(n));
  parallel_for(data.size(), [&](std::size_t i) {
    ForwardCache cache;
    const auto logits = model_forward(pillarize(data[i].cloud, spec), params, cache);
    const auto& gt = data[i].target.labels;
    if (!labeled_only) {
      parts[i].add(gt, predict_labels(logits));
      return;
    }
    for (std::size_t c = 0; c < logits.cells(); ++c) {
      if (gt[c] == 0) continue;
      const auto z = logits.cell(c);
      std::size_t best = 1;
      for (std::size_t k = 2; k < z.size(); ++k) {
        if (z[k] > z[best]) best = k;
      }
      parts[i].add(gt[c], static_cast<int>(best));
    }
  });
  ConfusionMatrix cm(n);
  for (const auto& p : parts) cm.merge(p);
  return cm;
}

}  // namespace occspot
