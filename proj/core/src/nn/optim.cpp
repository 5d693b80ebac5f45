#include "qent/nn/optim.hpp"

#include <cmath>

namespace qent::nn {

AdamState make_adam_state(std::span<const Tensor> params, AdamOptions options) {
  AdamState s;
  s.options = options;
  for (const Tensor& p : params) {
    s.first_moment.emplace_back(p.size(), 0.0);
    s.second_moment.emplace_back(p.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, AdamState& s) {
  if (params.size() != grads.size() || params.size() != s.first_moment.size()) {
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].size() || s.first_moment[i].size() != params[i].size()) {
      throw ShapeError("adam_step: gradient shape mismatch for parameter " + std::to_string(i));
    }
  }
  ++s.step;
  const auto& o = s.options;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].data();
    auto& m = s.first_moment[i];
    auto& v = s.second_moment[i];
    const auto& g = grads[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      w[j] -= o.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + o.epsilon);
    }
  }
}

void adam_step(std::span<Tensor> params, AdamState& s) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (Tensor& p : params) {
    if (!p.requires_grad()) throw ShapeError("adam_step: parameter without gradient buffer");
    grads.emplace_back(p.grad().begin(), p.grad().end());
  }
  adam_step(params, grads, s);
}

void zero_grads(std::span<Tensor> params) {
  for (Tensor& p : params) p.zero_grad();
}

}  // namespace qent::nn
