#pragma once

// Differentiable ops. Every op validates shapes and throws ShapeError.
//
// Layout conventions: images are [C, H, W]; token sequences are [T, E];
// dense weights are [in, out] so that y = x W + b.

#include <span>
#include <vector>

#include "qent/nn/tensor.hpp"

namespace qent::nn {

Tensor add(const Tensor& a, const Tensor& b);
// Learnable position table added to a token sequence; shapes must match.
Tensor pos_embed_add(const Tensor& tokens, const Tensor& table);
Tensor scale(const Tensor& x, double factor);
Tensor matmul(const Tensor& a, const Tensor& b);

// x: [in] or [rows, in]; weight: [in, out]; bias: [out].
Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor relu(const Tensor& x);

struct ConvOptions {
  int stride = 1;
  int padding = 0;
};

// Valid cross-correlation (zero padding optional).
// input [C_in, H, W], kernels [C_out, C_in, K, K], bias [C_out].
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias, ConvOptions options = {});

// 2x2 / stride 2 max pooling; ties go to the first element in row-major
// window order.
Tensor maxpool2(const Tensor& input);

Tensor flatten(const Tensor& x);
// Both inputs flattened, then joined.
Tensor concat(const Tensor& a, const Tensor& b);

// Normalizes over the last axis.
Tensor layer_norm(const Tensor& x, const Tensor& scale, const Tensor& shift, double eps = 1e-5);
// Softmax over the last axis.
Tensor softmax(const Tensor& x);

// k tensors of shape [n] -> [k, n]
Tensor stack_rows(std::span<const Tensor> rows);

// [T, E] -> [E]
Tensor mean_rows(const Tensor& x);

// Splits input [C, D, D] into (D/P)^2 patches in row-major grid order,
// flattens each as (channel, row, col) and projects with weight [P*P*C, E].
Tensor patch_embed(const Tensor& input, const Tensor& weight, const Tensor& bias, int patch);

// -log softmax(logits)[target] for logits [K].
Tensor cross_entropy(const Tensor& logits, int target);

Tensor sum(const Tensor& x);
// sum_i coeffs[i] * x[i]; reduces any tensor to a scalar for gradient checks.
Tensor weighted_sum(const Tensor& x, std::span<const double> coeffs);

}  // namespace qent::nn
