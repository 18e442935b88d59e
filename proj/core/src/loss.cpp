#include "occspot/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "occspot/error.hpp"

namespace occspot {

void OccupancyPrediction::validate(double tol) const {
  for (std::size_t i = 0; i < probs.cells(); ++i) {
    double sum = 0.0;
    for (double p : probs.cell(i)) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("prediction: probability outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("prediction: cell does not sum to 1");
  }
}

OccupancyPrediction softmax_field(const Tensor3& logits) {
  OccupancyPrediction out{Tensor3(logits.h, logits.w, logits.c)};
  for (std::size_t i = 0; i < logits.cells(); ++i) {
    const auto z = logits.cell(i);
    auto p = out.probs.cell(i);
    double max_z = -std::numeric_limits<double>::infinity();
    for (double v : z) {
      if (!std::isfinite(v)) throw NumericalError("softmax_field: non-finite logit");
      max_z = std::max(max_z, v);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      p[k] = std::exp(z[k] - max_z);
      sum += p[k];
    }
    for (double& v : p) v /= sum;
  }
  return out;
}

namespace {

void check_shapes(const Tensor3& t, const OccupancyGrid& gt, const char* what) {
  if (t.h != gt.spec.H || t.w != gt.spec.W || gt.labels.size() != t.cells()) {
    throw std::invalid_argument(std::string(what) + ": prediction " + std::to_string(t.h) + "x" +
                                std::to_string(t.w) + " does not match ground truth " +
                                std::to_string(gt.spec.H) + "x" + std::to_string(gt.spec.W));
  }
  for (auto v : gt.labels) {
    if (v >= t.c) {
      throw std::invalid_argument(std::string(what) + ": ground-truth class " + std::to_string(v) +
                                  " out of range for " + std::to_string(t.c) + " channels");
    }
  }
}

}  // namespace

LossResult weighted_ce(const OccupancyPrediction& pred, const OccupancyGrid& gt, const LossWeights& w) {
  const Tensor3& p = pred.probs;
  check_shapes(p, gt, "weighted_ce");
  if (w.w.size() < static_cast<std::size_t>(p.c)) throw std::invalid_argument("weighted_ce: too few loss weights");
  double weight_sum = 0.0;
  double weighted_nll = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const auto label = gt.labels[i];
    const double wi = w.w[label];
    weight_sum += wi;
    weighted_nll += wi * -std::log(std::max(p.cell(i)[label], std::numeric_limits<double>::min()));
  }
  LossResult out{0.0, Tensor3(p.h, p.w, p.c)};
  if (weight_sum == 0.0) return out;
  out.loss = weighted_nll / weight_sum;
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const auto label = gt.labels[i];
    const double scale = w.w[label] / weight_sum;
    const auto pi = p.cell(i);
    auto gi = out.grad.cell(i);
    for (std::size_t k = 0; k < pi.size(); ++k) gi[k] = scale * pi[k];
    gi[label] -= scale;
  }
  return out;
}

double lovasz_extension(std::span<const double> errors, std::span<const std::uint8_t> foreground,
                        std::span<double> grad) {
  const std::size_t n = errors.size();
  if (foreground.size() != n) throw std::invalid_argument("lovasz_extension: size mismatch");
  if (!grad.empty() && grad.size() != n) throw std::invalid_argument("lovasz_extension: grad size mismatch");
  if (n == 0) return 0.0;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return errors[a] > errors[b]; });
  const double gts = static_cast<double>(std::count_if(foreground.begin(), foreground.end(),
                                                       [](std::uint8_t f) { return f != 0; }));
  double cum_fg = 0.0;
  double cum_bg = 0.0;
  double prev_jaccard = 0.0;
  double loss = 0.0;
  for (std::uint32_t idx : order) {
    if (foreground[idx]) {
      cum_fg += 1.0;
    } else {
      cum_bg += 1.0;
    }
    const double intersection = gts - cum_fg;
    const double union_ = gts + cum_bg;
    const double jaccard = 1.0 - intersection / union_;
    const double g = jaccard - prev_jaccard;
    prev_jaccard = jaccard;
    loss += errors[idx] * g;
    if (!grad.empty()) grad[idx] = g;
  }
  return loss;
}

LossResult lovasz_softmax(const OccupancyPrediction& pred, const OccupancyGrid& gt,
                          const LovaszOptions& options) {
  const Tensor3& p = pred.probs;
  check_shapes(p, gt, "lovasz_softmax");
  const std::size_t cells = p.cells();
  const int n_cls = p.c - 1;
  LossResult out{0.0, Tensor3(p.h, p.w, p.c)};

  std::vector<int> classes;
  for (int n = 1; n <= n_cls; ++n) {
    const bool present = std::find(gt.labels.begin(), gt.labels.end(), n) != gt.labels.end();
    if (present || options.all_classes) classes.push_back(n);
  }
  if (classes.empty()) return out;
  const double inv = 1.0 / static_cast<double>(options.all_classes ? n_cls : static_cast<int>(classes.size()));

  std::vector<double> errors(cells);
  std::vector<std::uint8_t> fg(cells);
  std::vector<double> g(cells);
  for (int n : classes) {
    const auto ch = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < cells; ++i) {
      fg[i] = gt.labels[i] == n ? 1 : 0;
      const double pn = p.data[i * static_cast<std::size_t>(p.c) + ch];
      errors[i] = fg[i] ? 1.0 - pn : pn;
    }
    out.loss += inv * lovasz_extension(errors, fg, g);
    for (std::size_t i = 0; i < cells; ++i) {
      out.grad.data[i * static_cast<std::size_t>(p.c) + ch] += inv * (fg[i] ? -g[i] : g[i]);
    }
  }
  return out;
}

Tensor3 softmax_backward(const OccupancyPrediction& pred, const Tensor3& grad_probs) {
  const Tensor3& p = pred.probs;
  Tensor3 out(p.h, p.w, p.c);
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const auto pi = p.cell(i);
    const auto gi = grad_probs.cell(i);
    double dot = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) dot += pi[k] * gi[k];
    auto oi = out.cell(i);
    for (std::size_t k = 0; k < pi.size(); ++k) oi[k] = pi[k] * (gi[k] - dot);
  }
  return out;
}

TotalLoss total_loss(const Tensor3& logits, const OccupancyGrid& gt, const LossWeights& w,
                     double lambda, const LovaszOptions& options) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("total_loss: lambda must be >= 0");
  const auto pred = softmax_field(logits);
  auto ce = weighted_ce(pred, gt, w);
  TotalLoss out;
  out.ce = ce.loss;
  out.grad_logits = std::move(ce.grad);
  if (lambda != 0.0) {
    const auto lov = lovasz_softmax(pred, gt, options);
    out.lovasz = lov.loss;
    const Tensor3 chained = softmax_backward(pred, lov.grad);
    for (std::size_t i = 0; i < chained.data.size(); ++i) out.grad_logits.data[i] += lambda * chained.data[i];
  }
  out.loss = out.ce + lambda * out.lovasz;
  if (!std::isfinite(out.loss)) throw NumericalError("total_loss: non-finite loss");
  return out;
}

}  // namespace occspot
