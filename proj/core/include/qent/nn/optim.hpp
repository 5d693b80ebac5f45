#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qent/nn/tensor.hpp"

namespace qent::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

AdamState make_adam_state(std::span<const Tensor> params, AdamOptions options = {});

// Bias-corrected adaptive-moment update of params in place with explicit
// gradients, one vector per parameter.
void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, AdamState& state);
// Same, reading each parameter's accumulated grad buffer.
void adam_step(std::span<Tensor> params, AdamState& state);

void zero_grads(std::span<Tensor> params);

}  // namespace qent::nn
