#include <benchmark/benchmark.h>

#include "qent/datagen.hpp"
#include "qent/model.hpp"
#include "qent/nn/attention.hpp"
#include "qent/nn/ops.hpp"
#include "qent/rng.hpp"

using namespace qent;
using nn::Tensor;

namespace {

Tensor filled(nn::Shape shape, std::uint64_t seed) {
  std::size_t size = 1;
  for (int d : shape) size *= static_cast<std::size_t>(d);
  Rng rng(seed);
  std::vector<double> v(size);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace

static void BM_Conv2d(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Tensor x = filled({2, side, side}, 1), k = filled({16, 2, 3, 3}, 2), b = filled({16}, 3);
  nn::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, k, b));
}
BENCHMARK(BM_Conv2d)->Arg(8)->Arg(32)->Arg(128);

static void BM_Attention(benchmark::State& state) {
  const int tokens = static_cast<int>(state.range(0));
  const Tensor x = filled({tokens, 64}, 1);
  nn::AttentionParams p{filled({64, 64}, 2), filled({64}, 3), filled({64, 64}, 4), filled({64}, 5),
                        filled({64, 64}, 6), filled({64}, 7), filled({64, 64}, 8), filled({64}, 9)};
  nn::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(nn::multihead_self_attention(x, p, 4));
}
BENCHMARK(BM_Attention)->Arg(16)->Arg(64);

static void BM_ForwardBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HybridModel model(default_config(n, Task::Structure));
  GenConfig g;
  g.n_qubits = n;
  const Tensor x = encode_input(generate_sample(Klass::W, {n, {n}}, g, 1).rho);
  for (auto _ : state) nn::cross_entropy(model.forward(x), 0).backward();
}
BENCHMARK(BM_ForwardBackward)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

static void BM_Forward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HybridModel model(default_config(n, Task::Structure));
  const Tensor x = filled({2, 1 << n, 1 << n}, 1);
  nn::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_Forward)->DenseRange(3, 8)->Unit(benchmark::kMillisecond);

static void BM_MinEigenvalue(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GenConfig g;
  g.n_qubits = n;
  const DensityMatrix rho = generate_sample(Klass::GHZ, {n, {n}}, g, 1).rho;
  const auto subset = cut_subset(0);
  const ComplexMatrix pt = partial_transpose(rho, subset);
  for (auto _ : state) benchmark::DoNotOptimize(min_eigenvalue_hermitian(pt));
}
BENCHMARK(BM_MinEigenvalue)->DenseRange(2, 6);

static void BM_GenerateSample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GenConfig g;
  g.n_qubits = n;
  g.noise_enabled = true;
  std::uint64_t seed = 0;
  const Composition c{n, {n - 1, 1}};
  for (auto _ : state) benchmark::DoNotOptimize(generate_sample(Klass::W, c, g, ++seed));
}
BENCHMARK(BM_GenerateSample)->DenseRange(3, 8);

BENCHMARK_MAIN();
