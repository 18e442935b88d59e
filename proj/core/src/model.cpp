#include "occspot/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "occspot/layers.hpp"
#include "occspot/rng.hpp"

namespace occspot {

namespace {

constexpr layers::ConvGeometry kDown{3, 2, 1, 0};
constexpr layers::ConvGeometry kUp{3, 2, 1, 1};
constexpr layers::ConvGeometry kSame{3, 1, 1, 0};

struct BlockInit {
  Block block;
  double fan_in;
  bool is_bias;
};

std::vector<BlockInit> init_plan(const ModelShape& s) {
  const double k2 = 9.0;
  // A stride-2 transposed conv feeds each output from ~k^2/4 taps.
  return {
      {Block::kEmbedW, static_cast<double>(s.pillar_channels()), false},
      {Block::kConv1W, k2 * s.embed, false},        {Block::kConv1B, k2 * s.embed, true},
      {Block::kConv2W, k2 * s.enc1, false},         {Block::kConv2B, k2 * s.enc1, true},
      {Block::kDec1W, k2 * s.enc2 / 4.0, false},    {Block::kDec1B, k2 * s.enc2 / 4.0, true},
      {Block::kDec2W, k2 * s.dec1 / 4.0, false},    {Block::kDec2B, k2 * s.dec1 / 4.0, true},
      {Block::kDec3W, k2 * s.dec2, false},          {Block::kDec3B, k2 * s.dec2, true},
      {Block::kHeadW, static_cast<double>(s.dec3), false}, {Block::kHeadB, static_cast<double>(s.dec3), true},
  };
}

void init_blocks(ModelParams& p, std::uint64_t seed, bool decoder_only) {
  const ParamLayout layout(p.shape);
  for (const auto& b : init_plan(p.shape)) {
    if (decoder_only && static_cast<int>(b.block) < static_cast<int>(Block::kDec1W)) continue;
    Rng rng(derive_seed(seed, "init", static_cast<std::uint64_t>(b.block)));
    const double bound = b.is_bias ? 1.0 / std::sqrt(b.fan_in) : std::sqrt(6.0 / b.fan_in);
    auto span = p.block(b.block);
    for (double& v : span) v = rng.uniform(-bound, bound);
  }
}

}  // namespace

void ModelShape::validate() const {
  if (point_features < 0 || embed < 1 || enc1 < 1 || enc2 < 1 || dec1 < 1 || dec2 < 1 || dec3 < 1 ||
      n_out < 2) {
    throw std::invalid_argument("model shape: channel counts must be positive (n_out >= 2)");
  }
}

ParamLayout::ParamLayout(const ModelShape& s) {
  s.validate();
  const std::size_t k2 = 9;
  auto u = [](int v) { return static_cast<std::size_t>(v); };
  const std::array<std::size_t, static_cast<std::size_t>(Block::kCount)> sizes = {
      u(s.pillar_channels()) * u(s.embed),
      k2 * u(s.embed) * u(s.enc1), u(s.enc1),
      k2 * u(s.enc1) * u(s.enc2), u(s.enc2),
      k2 * u(s.enc2) * u(s.dec1), u(s.dec1),
      k2 * u(s.dec1) * u(s.dec2), u(s.dec2),
      k2 * u(s.dec2) * u(s.dec3), u(s.dec3),
      u(s.dec3) * u(s.n_out), u(s.n_out)};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    offsets_[i] = total_;
    sizes_[i] = sizes[i];
    total_ += sizes[i];
  }
}

std::span<const double> ModelParams::block(Block b) const {
  const ParamLayout l(shape);
  return std::span<const double>(values).subspan(l.offset(b), l.size(b));
}

std::span<double> ModelParams::block(Block b) {
  const ParamLayout l(shape);
  return std::span<double>(values).subspan(l.offset(b), l.size(b));
}

void ModelParams::validate() const {
  const ParamLayout l(shape);
  if (values.size() != l.total()) {
    throw std::invalid_argument("model params: " + std::to_string(values.size()) +
                                " values, shape requires " + std::to_string(l.total()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("model params: non-finite value");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("model params: lambda must be >= 0");
}

ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  ModelParams p;
  p.shape = shape;
  p.values.assign(ParamLayout(shape).total(), 0.0);
  init_blocks(p, seed, false);
  return p;
}

void reinit_decoder(ModelParams& params, std::uint64_t seed) { init_blocks(params, seed, true); }

Tensor3 pillarize(const PointCloud& cloud, const GridSpec& spec) {
  spec.validate();
  if (spec.H % 4 != 0 || spec.W % 4 != 0) {
    throw std::invalid_argument("pillarize: grid H and W must be multiples of 4");
  }
  const int d = static_cast<int>(cloud.feature_dim());
  const int channels = d + 4;
  Tensor3 out(spec.H, spec.W, channels);
  std::vector<std::uint32_t> counts(out.cells(), 0);
  const double z_span = spec.z_max - spec.z_min;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.xyz(i);
    if (p.z() < spec.z_min || p.z() > spec.z_max) continue;
    const auto cell = spec.cell_of(p.x(), p.y());
    if (cell < 0) continue;
    const auto c = static_cast<std::size_t>(cell);
    const int row = static_cast<int>(cell / spec.W);
    const int col = static_cast<int>(cell % spec.W);
    const Vec3 center = spec.cell_center(row, col);
    auto dst = out.cell(c);
    const auto f = cloud.features(i);
    for (int k = 0; k < d; ++k) dst[static_cast<std::size_t>(k)] += f[static_cast<std::size_t>(k)];
    dst[static_cast<std::size_t>(d)] += (p.x() - center.x()) / spec.cell_size;
    dst[static_cast<std::size_t>(d + 1)] += (p.y() - center.y()) / spec.cell_size;
    dst[static_cast<std::size_t>(d + 2)] += (p.z() - spec.z_min) / z_span;
    dst[static_cast<std::size_t>(d + 3)] += 1.0;
    ++counts[c];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    for (double& v : out.cell(c)) v /= counts[c];
  }
  return out;
}

BevFeatures encoder_forward(const Tensor3& pillars, const ModelParams& params, ForwardCache* cache) {
  const auto& s = params.shape;
  if (pillars.c != s.pillar_channels()) {
    throw std::invalid_argument("encoder_forward: pillar channels " + std::to_string(pillars.c) +
                                " != model expects " + std::to_string(s.pillar_channels()));
  }
  if (pillars.h % 4 != 0 || pillars.w % 4 != 0 || pillars.h == 0 || pillars.w == 0) {
    throw std::invalid_argument("encoder_forward: grid H and W must be positive multiples of 4");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.pillars = pillars;
  c.embed_pre = layers::pointwise(pillars, params.block(Block::kEmbedW), {}, s.embed);
  c.embed = layers::relu(c.embed_pre);
  c.conv1_pre = layers::conv2d(c.embed, params.block(Block::kConv1W), params.block(Block::kConv1B), s.enc1, kDown);
  c.conv1 = layers::relu(c.conv1_pre);
  c.conv2_pre = layers::conv2d(c.conv1, params.block(Block::kConv2W), params.block(Block::kConv2B), s.enc2, kDown);
  c.conv2 = layers::relu(c.conv2_pre);
  return c.conv2;
}

BevFeatures encoder_forward(const PointCloud& cloud, const GridSpec& spec, const ModelParams& params) {
  if (static_cast<int>(cloud.feature_dim()) != params.shape.point_features) {
    throw std::invalid_argument("encoder_forward: cloud feature_dim does not match model");
  }
  return encoder_forward(pillarize(cloud, spec), params);
}

Tensor3 decoder_forward(const BevFeatures& features, const ModelParams& params, ForwardCache* cache) {
  const auto& s = params.shape;
  if (features.c != s.enc2) {
    throw std::invalid_argument("decoder_forward: feature channels " + std::to_string(features.c) +
                                " != model expects " + std::to_string(s.enc2));
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  if (!cache) c.conv2 = features;
  const Tensor3& in = cache ? c.conv2 : features;
  c.dec1_pre = layers::deconv2d(in, params.block(Block::kDec1W), params.block(Block::kDec1B), s.dec1, kUp);
  c.dec1 = layers::relu(c.dec1_pre);
  c.dec2_pre = layers::deconv2d(c.dec1, params.block(Block::kDec2W), params.block(Block::kDec2B), s.dec2, kUp);
  c.dec2 = layers::relu(c.dec2_pre);
  c.dec3_pre = layers::deconv2d(c.dec2, params.block(Block::kDec3W), params.block(Block::kDec3B), s.dec3, kSame);
  c.dec3 = layers::relu(c.dec3_pre);
  c.logits = layers::pointwise(c.dec3, params.block(Block::kHeadW), params.block(Block::kHeadB), s.n_out);
  return c.logits;
}

Tensor3 model_forward(const Tensor3& pillars, const ModelParams& params, ForwardCache& cache) {
  encoder_forward(pillars, params, &cache);
  return decoder_forward(cache.conv2, params, &cache);
}

void decoder_backward(const ForwardCache& c, const ModelParams& params, const Tensor3& grad_logits,
                      std::span<double> grad_params, Tensor3* grad_bev) {
  const ParamLayout l(params.shape);
  auto g = [&](Block b) { return grad_params.subspan(l.offset(b), l.size(b)); };
  Tensor3 g_dec3;
  layers::pointwise_backward(c.dec3, params.block(Block::kHeadW), grad_logits, &g_dec3, g(Block::kHeadW),
                             g(Block::kHeadB));
  Tensor3 g_dec2;
  layers::deconv2d_backward(c.dec2, params.block(Block::kDec3W), layers::relu_backward(c.dec3_pre, g_dec3),
                            kSame, &g_dec2, g(Block::kDec3W), g(Block::kDec3B));
  Tensor3 g_dec1;
  layers::deconv2d_backward(c.dec1, params.block(Block::kDec2W), layers::relu_backward(c.dec2_pre, g_dec2),
                            kUp, &g_dec1, g(Block::kDec2W), g(Block::kDec2B));
  Tensor3 g_bev;
  layers::deconv2d_backward(c.conv2, params.block(Block::kDec1W), layers::relu_backward(c.dec1_pre, g_dec1),
                            kUp, &g_bev, g(Block::kDec1W), g(Block::kDec1B));
  if (grad_bev) *grad_bev = std::move(g_bev);
}

void model_backward(const ForwardCache& c, const ModelParams& params, const Tensor3& grad_logits,
                    std::span<double> grad_params, Tensor3* grad_bev) {
  if (grad_params.size() != params.values.size()) {
    throw std::invalid_argument("model_backward: gradient buffer size mismatch");
  }
  const ParamLayout l(params.shape);
  auto g = [&](Block b) { return grad_params.subspan(l.offset(b), l.size(b)); };
  Tensor3 g_bev;
  decoder_backward(c, params, grad_logits, grad_params, &g_bev);
  Tensor3 g_conv1;
  layers::conv2d_backward(c.conv1, params.block(Block::kConv2W), layers::relu_backward(c.conv2_pre, g_bev),
                          kDown, &g_conv1, g(Block::kConv2W), g(Block::kConv2B));
  Tensor3 g_embed;
  layers::conv2d_backward(c.embed, params.block(Block::kConv1W), layers::relu_backward(c.conv1_pre, g_conv1),
                          kDown, &g_embed, g(Block::kConv1W), g(Block::kConv1B));
  layers::pointwise_backward(c.pillars, params.block(Block::kEmbedW), layers::relu_backward(c.embed_pre, g_embed),
                             nullptr, g(Block::kEmbedW), {});
  if (grad_bev) *grad_bev = std::move(g_bev);
}

std::vector<std::uint8_t> predict_labels(const Tensor3& logits) {
  std::vector<std::uint8_t> out(logits.cells());
  for (std::size_t i = 0; i < logits.cells(); ++i) {
    const auto z = logits.cell(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < z.size(); ++k) {
      if (z[k] > z[best]) best = k;
    }
    out[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

}  // namespace occspot
