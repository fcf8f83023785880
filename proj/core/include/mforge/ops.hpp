#pragma once

#include <vector>

#include "mforge/tensor.hpp"

namespace mforge {

// Plain forward/backward kernels on (C,H,W) tensors. The autodiff tape wraps
// these; inference paths (classify, flow decode, refine) call them directly so
// both routes share one implementation per operation.

// kernels shape (K, C, kh, kw); output (K, H', W') with
// H' = (H + 2*padding - kh) / stride + 1, exact division required.
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, int stride, int padding);
// Accumulates into grad_input/grad_kernels when non-null (zero-initialised by caller).
void conv2d_backward(const Tensor& input, const Tensor& kernels, int stride, int padding,
                     const Tensor& grad_out, Tensor* grad_input, Tensor* grad_kernels);

// Max pooling; ties resolve to the lowest linear index. argmax (optional)
// receives the flat input index chosen per output cell.
Tensor maxpool2d_forward(const Tensor& input, int window, int stride,
                         std::vector<int>* argmax = nullptr);

// weights (m, n), bias (m), input (n) -> (m)
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

Tensor relu_forward(const Tensor& x);
Tensor leaky_relu_forward(const Tensor& x, double slope);
Tensor sigmoid_forward(const Tensor& x);
Tensor tanh_forward(const Tensor& x);

// Numerically stable softmax over a rank-1 tensor; outputs sum to 1.
Tensor softmax(const Tensor& logits);

// Per-channel bias add on a (C,H,W) tensor.
Tensor bias_channels_forward(const Tensor& x, const Tensor& bias);

// Space-to-depth: (C,H,W) -> (4C,H/2,W/2). A 2x2 patch (a b / c d) of input
// channel c maps to output channels (4c+0..4c+3) = (a, b, c, d). H, W even.
Tensor squeeze2_forward(const Tensor& x);
Tensor unsqueeze2_forward(const Tensor& x);

// Nearest-neighbour 2x upsampling: (C,H,W) -> (C,2H,2W).
Tensor upsample2_forward(const Tensor& x);

// Channel concatenation/split on (C,H,W) tensors with equal spatial dims.
Tensor concat_channels_forward(const Tensor& a, const Tensor& b);
void split_channels_forward(const Tensor& x, int c_front, Tensor* front, Tensor* back);

}  // namespace mforge
