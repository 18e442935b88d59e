#include "occspot/layers.hpp"

#include <stdexcept>
#include <string>

namespace occspot::layers {

namespace {

void check_weight(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": weight size " + std::to_string(got) +
                                " != expected " + std::to_string(want));
  }
}

}  // namespace

int conv_out_size(int in, const ConvGeometry& g) { return (in + 2 * g.pad - g.kernel) / g.stride + 1; }

int deconv_out_size(int in, const ConvGeometry& g) {
  return (in - 1) * g.stride - 2 * g.pad + g.kernel + g.output_pad;
}

Tensor3 conv2d(const Tensor3& in, std::span<const double> weight, std::span<const double> bias,
               int c_out, const ConvGeometry& g) {
  const std::size_t ci_n = static_cast<std::size_t>(in.c);
  const std::size_t co_n = static_cast<std::size_t>(c_out);
  check_weight(weight.size(), static_cast<std::size_t>(g.kernel * g.kernel) * ci_n * co_n, "conv2d");
  if (bias.size() != co_n) throw std::invalid_argument("conv2d: bias size mismatch");
  Tensor3 out(conv_out_size(in.h, g), conv_out_size(in.w, g), c_out);
  for (int oy = 0; oy < out.h; ++oy) {
    for (int ox = 0; ox < out.w; ++ox) {
      double* o = out.data.data() + out.offset(oy, ox);
      for (std::size_t co = 0; co < co_n; ++co) o[co] = bias[co];
      for (int ky = 0; ky < g.kernel; ++ky) {
        const int iy = oy * g.stride - g.pad + ky;
        if (iy < 0 || iy >= in.h) continue;
        for (int kx = 0; kx < g.kernel; ++kx) {
          const int ix = ox * g.stride - g.pad + kx;
          if (ix < 0 || ix >= in.w) continue;
          const double* x = in.data.data() + in.offset(iy, ix);
          const double* wk = weight.data() + static_cast<std::size_t>(ky * g.kernel + kx) * ci_n * co_n;
          for (std::size_t ci = 0; ci < ci_n; ++ci) {
            const double xv = x[ci];
            if (xv == 0.0) continue;
            const double* wr = wk + ci * co_n;
            for (std::size_t co = 0; co < co_n; ++co) o[co] += xv * wr[co];
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor3& in, std::span<const double> weight, const Tensor3& grad_out,
                     const ConvGeometry& g, Tensor3* grad_in, std::span<double> grad_weight,
                     std::span<double> grad_bias) {
  const std::size_t ci_n = static_cast<std::size_t>(in.c);
  const std::size_t co_n = static_cast<std::size_t>(grad_out.c);
  if (grad_in && !grad_in->same_shape(in)) *grad_in = Tensor3(in.h, in.w, in.c);
  for (int oy = 0; oy < grad_out.h; ++oy) {
    for (int ox = 0; ox < grad_out.w; ++ox) {
      const double* go = grad_out.data.data() + grad_out.offset(oy, ox);
      for (std::size_t co = 0; co < co_n; ++co) grad_bias[co] += go[co];
      for (int ky = 0; ky < g.kernel; ++ky) {
        const int iy = oy * g.stride - g.pad + ky;
        if (iy < 0 || iy >= in.h) continue;
        for (int kx = 0; kx < g.kernel; ++kx) {
          const int ix = ox * g.stride - g.pad + kx;
          if (ix < 0 || ix >= in.w) continue;
          const std::size_t base = static_cast<std::size_t>(ky * g.kernel + kx) * ci_n * co_n;
          const double* x = in.data.data() + in.offset(iy, ix);
          double* gx = grad_in ? grad_in->data.data() + grad_in->offset(iy, ix) : nullptr;
          for (std::size_t ci = 0; ci < ci_n; ++ci) {
            const double* wr = weight.data() + base + ci * co_n;
            double* gw = grad_weight.data() + base + ci * co_n;
            const double xv = x[ci];
            double acc = 0.0;
            for (std::size_t co = 0; co < co_n; ++co) {
              gw[co] += xv * go[co];
              acc += wr[co] * go[co];
            }
            if (gx) gx[ci] += acc;
          }
        }
      }
    }
  }
}

Tensor3 deconv2d(const Tensor3& in, std::span<const double> weight, std::span<const double> bias,
                 int c_out, const ConvGeometry& g) {
  const std::size_t ci_n = static_cast<std::size_t>(in.c);
  const std::size_t co_n = static_cast<std::size_t>(c_out);
  check_weight(weight.size(), static_cast<std::size_t>(g.kernel * g.kernel) * ci_n * co_n, "deconv2d");
  if (bias.size() != co_n) throw std::invalid_argument("deconv2d: bias size mismatch");
  Tensor3 out(deconv_out_size(in.h, g), deconv_out_size(in.w, g), c_out);
  for (std::size_t i = 0; i < out.cells(); ++i) {
    auto cell = out.cell(i);
    for (std::size_t co = 0; co < co_n; ++co) cell[co] = bias[co];
  }
  for (int iy = 0; iy < in.h; ++iy) {
    for (int ix = 0; ix < in.w; ++ix) {
      const double* x = in.data.data() + in.offset(iy, ix);
      for (int ky = 0; ky < g.kernel; ++ky) {
        const int oy = iy * g.stride - g.pad + ky;
        if (oy < 0 || oy >= out.h) continue;
        for (int kx = 0; kx < g.kernel; ++kx) {
          const int ox = ix * g.stride - g.pad + kx;
          if (ox < 0 || ox >= out.w) continue;
          double* o = out.data.data() + out.offset(oy, ox);
          const double* wk = weight.data() + static_cast<std::size_t>(ky * g.kernel + kx) * ci_n * co_n;
          for (std::size_t ci = 0; ci < ci_n; ++ci) {
            const double xv = x[ci];
            if (xv == 0.0) continue;
            const double* wr = wk + ci * co_n;
            for (std::size_t co = 0; co < co_n; ++co) o[co] += xv * wr[co];
          }
        }
      }
    }
  }
  return out;
}

void deconv2d_backward(const Tensor3& in, std::span<const double> weight, const Tensor3& grad_out,
                       const ConvGeometry& g, Tensor3* grad_in, std::span<double> grad_weight,
                       std::span<double> grad_bias) {
  const std::size_t ci_n = static_cast<std::size_t>(in.c);
  const std::size_t co_n = static_cast<std::size_t>(grad_out.c);
  if (grad_in && !grad_in->same_shape(in)) *grad_in = Tensor3(in.h, in.w, in.c);
  for (std::size_t i = 0; i < grad_out.cells(); ++i) {
    const auto go = grad_out.cell(i);
    for (std::size_t co = 0; co < co_n; ++co) grad_bias[co] += go[co];
  }
  for (int iy = 0; iy < in.h; ++iy) {
    for (int ix = 0; ix < in.w; ++ix) {
      const double* x = in.data.data() + in.offset(iy, ix);
      double* gx = grad_in ? grad_in->data.data() + grad_in->offset(iy, ix) : nullptr;
      for (int ky = 0; ky < g.kernel; ++ky) {
        const int oy = iy * g.stride - g.pad + ky;
        if (oy < 0 || oy >= grad_out.h) continue;
        for (int kx = 0; kx < g.kernel; ++kx) {
          const int ox = ix * g.stride - g.pad + kx;
          if (ox < 0 || ox >= grad_out.w) continue;
          const double* go = grad_out.data.data() + grad_out.offset(oy, ox);
          const std::size_t base = static_cast<std::size_t>(ky * g.kernel + kx) * ci_n * co_n;
          for (std::size_t ci = 0; ci < ci_n; ++ci) {
            const double* wr = weight.data() + base + ci * co_n;
            double* gw = grad_weight.data() + base + ci * co_n;
            const double xv = x[ci];
            double acc = 0.0;
            for (std::size_t co = 0; co < co_n; ++co) {
              gw[co] += xv * go[co];
              acc += wr[co] * go[co];
            }
            if (gx) gx[ci] += acc;
          }
        }
      }
    }
  }
}

Tensor3 pointwise(const Tensor3& in, std::span<const double> weight, std::span<const double> bias,
                  int c_out) {
  const std::size_t ci_n = static_cast<std::size_t>(in.c);
  const std::size_t co_n = static_cast<std::size_t>(c_out);
  check_weight(weight.size(), ci_n * co_n, "pointwise");
  if (!bias.empty() && bias.size() != co_n) throw std::invalid_argument("pointwise: bias size mismatch");
  Tensor3 out(in.h, in.w, c_out);
  for (std::size_t i = 0; i < in.cells(); ++i) {
    const auto x = in.cell(i);
    auto o = out.cell(i);
    if (!bias.empty()) {
      for (std::size_t co = 0; co < co_n; ++co) o[co] = bias[co];
    }
    for (std::size_t ci = 0; ci < ci_n; ++ci) {
      const double xv = x[ci];
      if (xv == 0.0) continue;
      const double* wr = weight.data() + ci * co_n;
      for (std::size_t co = 0; co < co_n; ++co) o[co] += xv * wr[co];
    }
  }
  return out;
}

void pointwise_backward(const Tensor3& in, std::span<const double> weight, const Tensor3& grad_out,
                        Tensor3* grad_in, std::span<double> grad_weight, std::span<double> grad_bias) {
  const std::size_t ci_n = static_cast<std::size_t>(in.c);
  const std::size_t co_n = static_cast<std::size_t>(grad_out.c);
  if (grad_in && !grad_in->same_shape(in)) *grad_in = Tensor3(in.h, in.w, in.c);
  for (std::size_t i = 0; i < in.cells(); ++i) {
    const auto x = in.cell(i);
    const auto go = grad_out.cell(i);
    if (!grad_bias.empty()) {
      for (std::size_t co = 0; co < co_n; ++co) grad_bias[co] += go[co];
    }
    for (std::size_t ci = 0; ci < ci_n; ++ci) {
      const double* wr = weight.data() + ci * co_n;
      double* gw = grad_weight.data() + ci * co_n;
      const double xv = x[ci];
      double acc = 0.0;
      for (std::size_t co = 0; co < co_n; ++co) {
        gw[co] += xv * go[co];
        acc += wr[co] * go[co];
      }
      if (grad_in) grad_in->cell(i)[ci] += acc;
    }
  }
}

Tensor3 relu(const Tensor3& x) {
  Tensor3 out = x;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor3 relu_backward(const Tensor3& pre, const Tensor3& grad_out) {
  Tensor3 out = grad_out;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (!(pre.data[i] > 0.0)) out.data[i] = 0.0;
  }
  return out;
}

}  // namespace occspot::layers
