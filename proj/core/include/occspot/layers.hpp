#ifndef OCCSPOT_LAYERS_HPP
#define OCCSPOT_LAYERS_HPP

#include <span>

#include "occspot/tensor.hpp"

// Hand-written forward/backward kernels for the toy BEV network. Kernels use
// HWC activations and [ky][kx][c_in][c_out] weights. Backward functions
// accumulate into their output gradients.
namespace occspot::layers {

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int pad = 1;
  int output_pad = 0;  // transposed convolution only
};

int conv_out_size(int in, const ConvGeometry& g);
int deconv_out_size(int in, const ConvGeometry& g);

Tensor3 conv2d(const Tensor3& in, std::span<const double> weight, std::span<const double> bias,
               int c_out, const ConvGeometry& g);
void conv2d_backward(const Tensor3& in, std::span<const double> weight, const Tensor3& grad_out,
                     const ConvGeometry& g, Tensor3* grad_in, std::span<double> grad_weight,
                     std::span<double> grad_bias);

Tensor3 deconv2d(const Tensor3& in, std::span<const double> weight, std::span<const double> bias,
                 int c_out, const ConvGeometry& g);
void deconv2d_backward(const Tensor3& in, std::span<const double> weight, const Tensor3& grad_out,
                       const ConvGeometry& g, Tensor3* grad_in, std::span<double> grad_weight,
                       std::span<double> grad_bias);

/// Per-cell affine map; weight is [c_in][c_out]. Empty bias means none.
Tensor3 pointwise(const Tensor3& in, std::span<const double> weight, std::span<const double> bias,
                  int c_out);
void pointwise_backward(const Tensor3& in, std::span<const double> weight, const Tensor3& grad_out,
                        Tensor3* grad_in, std::span<double> grad_weight, std::span<double> grad_bias);

Tensor3 relu(const Tensor3& x);
/// grad_in = grad_out where pre > 0, else 0.
Tensor3 relu_backward(const Tensor3& pre, const Tensor3& grad_out);

}  // namespace occspot::layers

#endif  // OCCSPOT_LAYERS_HPP
