#pragma once

#include <vector>

#include "qent/nn/tensor.hpp"

namespace qent::nn {

// Projections of one multi-head self-attention layer; all weights [E, E].
struct AttentionParams {
  Tensor wq, bq;
  Tensor wk, bk;
  Tensor wv, bv;
  Tensor wo, bo;
};

// Per head h (width E/heads): softmax(Q_h K_h^T / sqrt(E/heads)) V_h, heads
// concatenated along the feature axis. q, k, v: [T, E]. No output projection.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads);

// Row-stochastic attention weights [heads][T*T] for inspection (no graph).
std::vector<std::vector<double>> attention_weights(const Tensor& q, const Tensor& k, int heads);

// Q/K/V projections, scaled_dot_attention, then the output projection.
Tensor multihead_self_attention(const Tensor& tokens, const AttentionParams& p, int heads);

}  // namespace qent::nn
