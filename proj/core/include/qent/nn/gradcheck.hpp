#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "qent/nn/tensor.hpp"

namespace qent::nn {

// |a - n| / max(|a| + |n|, 1e-4)
double relative_error(double analytic, double numeric);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
};

struct GradCheckOptions {
  double step = 1e-5;
  // 0 checks every coordinate; otherwise this many per tensor, chosen by seed.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

// Compares the backward pass of `loss` (a scalar recomputed from the current
// values of `inputs`) with central differences on every selected coordinate.
GradCheckReport gradient_check(const std::function<Tensor()>& loss, std::span<Tensor> inputs,
                               GradCheckOptions options = {});

}  // namespace qent::nn
