#ifndef OCCSPOT_LOSS_HPP
#define OCCSPOT_LOSS_HPP

#include <cstdint>
#include <span>

#include "occspot/balance.hpp"
#include "occspot/occ_gt.hpp"
#include "occspot/tensor.hpp"

namespace occspot {

/// Per-cell class probabilities, H x W x (n_cls + 1).
struct OccupancyPrediction {
  Tensor3 probs;
  /// Throws std::invalid_argument unless every cell sums to 1 within `tol`
  /// and all entries lie in [0, 1].
  void validate(double tol = 1e-6) const;
};

/// Numerically stable softmax over the channel axis of every cell.
/// Throws NumericalError on non-finite logits.
OccupancyPrediction softmax_field(const Tensor3& logits);

struct LossResult {
  double loss = 0.0;
  Tensor3 grad;
};

/// Class-weighted cross entropy, normalized by the sum of applied weights:
///   L = sum_c w[gt_c] (-ln p_c[gt_c]) / sum_c w[gt_c].
/// `grad` is dL/dlogits, i.e. composed with the softmax that produced `pred`.
LossResult weighted_ce(const OccupancyPrediction& pred, const OccupancyGrid& gt, const LossWeights& w);

struct LovaszOptions {
  /// false: average over classes 1..n_cls present in the ground truth.
  /// true: average over all classes 1..n_cls (divide by n_cls).
  bool all_classes = false;
};

/// Lovasz extension of the Jaccard loss for one class. `errors` are per-cell
/// errors in [0, 1]; `foreground` marks ground-truth membership. Cells are
/// visited in descending error order (ties by index). When `grad` is non-empty
/// it receives dL/derrors.
double lovasz_extension(std::span<const double> errors, std::span<const std::uint8_t> foreground,
                        std::span<double> grad = {});

/// Lovasz-Softmax over classes 1..n_cls with error maps 1 - p (ground-truth
/// class) or p (otherwise). `grad` is dL/dprobabilities. Throws
/// std::invalid_argument when a ground-truth label is out of range.
LossResult lovasz_softmax(const OccupancyPrediction& pred, const OccupancyGrid& gt,
                          const LovaszOptions& options = {});

struct TotalLoss {
  double loss = 0.0;
  double ce = 0.0;
  double lovasz = 0.0;
  Tensor3 grad_logits;
};

/// L = L_ce + lambda * L_lov evaluated from logits; the gradient is with
/// respect to the logits.
TotalLoss total_loss(const Tensor3& logits, const OccupancyGrid& gt, const LossWeights& w,
                     double lambda, const LovaszOptions& options = {});

/// Chains a probability-space gradient through the softmax: returns dL/dlogits.
Tensor3 softmax_backward(const OccupancyPrediction& pred, const Tensor3& grad_probs);

}  // namespace occspot

#endif  // OCCSPOT_LOSS_HPP
