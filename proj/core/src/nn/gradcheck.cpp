#include "qent/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qent/rng.hpp"

namespace qent::nn {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-4);
}

GradCheckReport gradient_check(const std::function<Tensor()>& loss, std::span<Tensor> inputs,
                               GradCheckOptions options) {
  for (Tensor& t : inputs) {
    if (!t.requires_grad()) throw ShapeError("gradient_check: input does not require grad");
    t.zero_grad();
  }
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheckReport report;
  Rng rng(options.seed);
  const double h = options.step;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    auto data = inputs[ti].data();
    std::vector<std::size_t> coords(data.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_tensor > 0 && coords.size() > options.max_coords_per_tensor) {
      shuffle(coords, rng);
      coords.resize(options.max_coords_per_tensor);
    }
    for (std::size_t i : coords) {
      const double saved = data[i];
      data[i] = saved + h;
      const double up = loss().item();
      data[i] = saved - h;
      const double down = loss().item();
      data[i] = saved;
      const double err = relative_error(analytic[ti][i], (up - down) / (2.0 * h));
      ++report.coordinates;
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_tensor = ti;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace qent::nn
