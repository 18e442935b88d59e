#include "occspot/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace occspot {

Adam::Adam(std::size_t n_params, AdamConfig config)
    : config_(config), m_(n_params, 0.0), v_(n_params, 0.0) {
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0 &&
        config.eps > 0.0)) {
    throw std::invalid_argument("adam: betas must lie in [0, 1) and eps > 0");
  }
}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("adam: parameter/gradient size mismatch");
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    if (lr == 0.0) continue;
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.eps);
  }
}

double OneCycle::operator()(std::size_t step, std::size_t total_steps) const {
  if (total_steps == 0) throw std::invalid_argument("one-cycle: total_steps must be > 0");
  const double start = peak / div_factor;
  const double end = peak / final_div;
  const double total = static_cast<double>(total_steps);
  const double warm = std::max(1.0, std::round(warmup_fraction * total));
  const double s = std::min(static_cast<double>(step), total - 1.0);
  if (s < warm) return start + (peak - start) * s / warm;
  const double span = std::max(1.0, total - 1.0 - warm);
  const double t = std::min(1.0, (s - warm) / span);
  return end + 0.5 * (peak - end) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace occspot
