#ifndef OCCSPOT_OPTIM_HPP
#define OCCSPOT_OPTIM_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace occspot {

inline constexpr double kPeakLearningRate = 0.003;

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(std::size_t n_params, AdamConfig config = {});

  /// One bias-corrected update. A learning rate of 0 leaves `params` unchanged.
  void step(std::span<double> params, std::span<const double> grad, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

/// One-cycle schedule: linear warm-up over `warmup_fraction` of the steps from
/// peak/div_factor to peak, then cosine decay to peak/final_div.
struct OneCycle {
  double peak = kPeakLearningRate;
  double warmup_fraction = 0.3;
  double div_factor = 25.0;
  double final_div = 25.0;

  double operator()(std::size_t step, std::size_t total_steps) const;
};

}  // namespace occspot

#endif  // OCCSPOT_OPTIM_HPP
