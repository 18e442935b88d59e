#ifndef OCCSPOT_METRICS_HPP
#define OCCSPOT_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace occspot {

/// Square count matrix, rows = ground truth, cols = prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int n_classes = 0);

  int size() const noexcept { return n_; }
  std::uint64_t at(int gt, int pred) const { return counts_[index(gt, pred)]; }
  std::uint64_t& at(int gt, int pred) { return counts_[index(gt, pred)]; }
  void add(int gt, int pred, std::uint64_t count = 1) { at(gt, pred) += count; }
  void add(std::span<const std::uint8_t> gt, std::span<const std::uint8_t> pred);
  void merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t index(int gt, int pred) const;
  int n_;
  std::vector<std::uint64_t> counts_;
};

struct MiouResult {
  std::vector<std::optional<double>> per_class;  // nullopt when TP+FP+FN = 0 or ignored
  double miou = 0.0;                             // 0 when no class qualifies
  int n_counted = 0;
};

/// IoU_i = TP/(TP+FP+FN). Class 0 is skipped when `ignore_empty`.
MiouResult miou(const ConfusionMatrix& cm, bool ignore_empty);

}  // namespace occspot

#endif  // OCCSPOT_METRICS_HPP
