#ifndef OCCSPOT_MODEL_HPP
#define OCCSPOT_MODEL_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "occspot/cloud.hpp"
#include "occspot/occ_gt.hpp"
#include "occspot/tensor.hpp"

namespace occspot {

// Toy BEV encoder-decoder.
//
//   pillars (H x W x P) -> pointwise embed -> relu
//     -> conv 3x3 s2 -> relu -> conv 3x3 s2 -> relu           = BEV features (H/4 x W/4)
//     -> deconv 3x3 s2 -> relu -> deconv 3x3 s2 -> relu -> deconv 3x3 s1 -> relu
//     -> pointwise head                                        = logits (H x W x n_out)
//
// Pillar features per cell are the mean over its points of
// [point features..., dx, dy, z_norm, 1] where dx, dy are offsets from the
// cell center in cell units and z_norm maps [z_min, z_max] to [0, 1]. Empty
// cells are all zero, and the embed has no bias, so empty pillars stay zero.

using BevFeatures = Tensor3;

struct ModelShape {
  int point_features = 1;  // d
  int embed = 16;
  int enc1 = 24;
  int enc2 = 32;
  int dec1 = 32;
  int dec2 = 24;
  int dec3 = 16;
  int n_out = schema::kNumClasses + 1;

  int pillar_channels() const { return point_features + 4; }
  void validate() const;
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

enum class Block : int {
  kEmbedW, kConv1W, kConv1B, kConv2W, kConv2B,
  kDec1W, kDec1B, kDec2W, kDec2B, kDec3W, kDec3B, kHeadW, kHeadB,
  kCount
};

inline constexpr std::array<std::string_view, static_cast<int>(Block::kCount)> kBlockNames = {
    "embed.w", "conv1.w", "conv1.b", "conv2.w", "conv2.b", "dec1.w", "dec1.b",
    "dec2.w",  "dec2.b",  "dec3.w",  "dec3.b",  "head.w",  "head.b"};

/// Offsets of each parameter block inside the flat parameter vector. The
/// encoder blocks come first, so the encoder is a prefix of the vector.
class ParamLayout {
 public:
  explicit ParamLayout(const ModelShape& shape);
  std::size_t offset(Block b) const { return offsets_[static_cast<std::size_t>(b)]; }
  std::size_t size(Block b) const { return sizes_[static_cast<std::size_t>(b)]; }
  std::size_t total() const { return total_; }
  std::size_t encoder_size() const { return offset(Block::kDec1W); }

 private:
  std::array<std::size_t, static_cast<std::size_t>(Block::kCount)> offsets_{};
  std::array<std::size_t, static_cast<std::size_t>(Block::kCount)> sizes_{};
  std::size_t total_ = 0;
};

struct ModelParams {
  ModelShape shape;
  std::vector<double> values;
  double lambda = 1.0;

  ParamLayout layout() const { return ParamLayout(shape); }
  std::span<const double> block(Block b) const;
  std::span<double> block(Block b);
  /// Throws std::invalid_argument on size mismatch, non-finite values or lambda < 0.
  void validate() const;
};

/// Fan-in scaled uniform initialization (He-uniform weights, small uniform biases).
ModelParams init_params(const ModelShape& shape, std::uint64_t seed);
/// Re-draws decoder and head blocks; encoder blocks are left untouched.
void reinit_decoder(ModelParams& params, std::uint64_t seed);

/// H x W x P pillar features (see file comment). H and W must be multiples of 4.
Tensor3 pillarize(const PointCloud& cloud, const GridSpec& spec);

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
  Tensor3 pillars;
  Tensor3 embed_pre, embed;
  Tensor3 conv1_pre, conv1;
  Tensor3 conv2_pre, conv2;
  Tensor3 dec1_pre, dec1;
  Tensor3 dec2_pre, dec2;
  Tensor3 dec3_pre, dec3;
  Tensor3 logits;
};

BevFeatures encoder_forward(const Tensor3& pillars, const ModelParams& params,
                            ForwardCache* cache = nullptr);
BevFeatures encoder_forward(const PointCloud& cloud, const GridSpec& spec, const ModelParams& params);
Tensor3 decoder_forward(const BevFeatures& features, const ModelParams& params,
                        ForwardCache* cache = nullptr);
/// Full network; fills `cache`.
Tensor3 model_forward(const Tensor3& pillars, const ModelParams& params, ForwardCache& cache);

/// Backpropagates dL/dlogits. Accumulates into `grad_params` (same layout as
/// params.values). When `grad_bev` is non-null it receives dL/dBEV features.
void model_backward(const ForwardCache& cache, const ModelParams& params, const Tensor3& grad_logits,
                    std::span<double> grad_params, Tensor3* grad_bev = nullptr);

/// Decoder-only backward (cache must hold conv2 and the decoder activations).
void decoder_backward(const ForwardCache& cache, const ModelParams& params, const Tensor3& grad_logits,
                      std::span<double> grad_params, Tensor3* grad_bev);

/// Argmax class per cell.
std::vector<std::uint8_t> predict_labels(const Tensor3& logits);

}  // namespace occspot

#endif  // OCCSPOT_MODEL_HPP
