#ifndef OCCSPOT_TENSOR_HPP
#define OCCSPOT_TENSOR_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace occspot {

/// Dense H x W x C field of doubles, channel-last (HWC) layout.
struct Tensor3 {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int h_, int w_, int c_, double fill = 0.0)
      : h(h_), w(w_), c(c_), data(static_cast<std::size_t>(h_) * w_ * c_, fill) {
    if (h_ < 0 || w_ < 0 || c_ < 0) throw std::invalid_argument("tensor: negative dimension");
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t cells() const noexcept { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
  std::size_t offset(int y, int x) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(c);
  }
  double& at(int y, int x, int ch) noexcept { return data[offset(y, x) + static_cast<std::size_t>(ch)]; }
  double at(int y, int x, int ch) const noexcept { return data[offset(y, x) + static_cast<std::size_t>(ch)]; }
  std::span<double> cell(std::size_t i) noexcept { return {data.data() + i * static_cast<std::size_t>(c), static_cast<std::size_t>(c)}; }
  std::span<const double> cell(std::size_t i) const noexcept {
    return {data.data() + i * static_cast<std::size_t>(c), static_cast<std::size_t>(c)};
  }
  bool same_shape(const Tensor3& o) const noexcept { return h == o.h && w == o.w && c == o.c; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

}  // namespace occspot

#endif  // OCCSPOT_TENSOR_HPP
