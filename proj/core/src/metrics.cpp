#include "occspot/metrics.hpp"

#include <stdexcept>
#include <string>

namespace occspot {

ConfusionMatrix::ConfusionMatrix(int n_classes) : n_(n_classes) {
  if (n_classes < 0) throw std::invalid_argument("confusion matrix: negative size");
  counts_.assign(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_classes), 0);
}

std::size_t ConfusionMatrix::index(int gt, int pred) const {
  if (gt < 0 || gt >= n_ || pred < 0 || pred >= n_) {
    throw std::out_of_range("confusion matrix: class (" + std::to_string(gt) + ", " + std::to_string(pred) +
                            ") outside " + std::to_string(n_) + " classes");
  }
  return static_cast<std::size_t>(gt) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(pred);
}

void ConfusionMatrix::add(std::span<const std::uint8_t> gt, std::span<const std::uint8_t> pred) {
  if (gt.size() != pred.size()) throw std::invalid_argument("confusion matrix: label count mismatch");
  for (std::size_t i = 0; i < gt.size(); ++i) add(gt[i], pred[i]);
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw std::invalid_argument("confusion matrix: size mismatch in merge");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

MiouResult miou(const ConfusionMatrix& cm, bool ignore_empty) {
  const int n = cm.size();
  MiouResult out;
  out.per_class.assign(static_cast<std::size_t>(n), std::nullopt);
  double sum = 0.0;
  for (int i = ignore_empty ? 1 : 0; i < n; ++i) {
    const std::uint64_t tp = cm.at(i, i);
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      fp += cm.at(j, i);
      fn += cm.at(i, j);
    }
    const std::uint64_t denom = tp + fp + fn;
    if (denom == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    out.per_class[static_cast<std::size_t>(i)] = iou;
    sum += iou;
    ++out.n_counted;
  }
  if (out.n_counted > 0) out.miou = sum / out.n_counted;
  return out;
}

}  // namespace occspot
