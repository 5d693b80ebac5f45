#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "qent/datagen.hpp"
#include "qent/dataset_io.hpp"

using namespace qent;
using testing::max_abs_diff;

namespace {

double min_pt_eigen(const DensityMatrix& rho, int cut) {
  const auto subset = cut_subset(cut);
  return min_eigenvalue_hermitian(partial_transpose(rho, subset));
}

}  // namespace

TEST_CASE("product_term blocks") {
  Rng rng(1);
  const DensityMatrix g = product_term(Klass::GHZ, {3, {3}}, rng);
  CHECK(g == to_density(ghz_state(3)));

  const DensityMatrix zero = to_density(zero_state(3));
  CHECK(product_term(Klass::GHZ, {3, {1, 1, 1}}, rng) == zero);
  CHECK(product_term(Klass::W, {3, {1, 1, 1}}, rng) == zero);

  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = product_term(Klass::W, {6, {3, 2, 1}}, rng);
    bool matched = false;
    for (int b = 0; b < 4; ++b) {
      const DensityMatrix expect = tensor_product(
          tensor_product(to_density(w_state(3)), to_density(bell_state(b))), to_density(zero_state(1)));
      matched = matched || max_abs_diff(expect.matrix(), rho.matrix()) < 1e-15;
    }
    CHECK(matched);
    CHECK(std::abs(rho.matrix().trace() - 1.0) < 1e-12);
    // Cuts between the blocks (after qubit 2 and after qubit 4) are PPT.
    CHECK(min_pt_eigen(rho, 2) >= -1e-9);
    CHECK(min_pt_eigen(rho, 4) >= -1e-9);
  }
}

TEST_CASE("Bell blocks cover all four Bell states") {
  Rng rng(5);
  std::set<int> seen;
  for (int trial = 0; trial < 64; ++trial) {
    const DensityMatrix rho = product_term(Klass::GHZ, {2, {2}}, rng);
    for (int b = 0; b < 4; ++b) {
      if (max_abs_diff(rho.matrix(), to_density(bell_state(b)).matrix()) < 1e-15) seen.insert(b);
    }
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("generate_sample") {
  GenConfig cfg;
  cfg.n_qubits = 4;
  cfg.mixture_min = cfg.mixture_max = 1;
  const SampleRecord r = generate_sample(Klass::W, {4, {3, 1}}, cfg, 99);
  CHECK(r.rho == tensor_product(to_density(w_state(3)), to_density(zero_state(1))));
  CHECK(r.mixture_weights == std::vector<double>{1.0});
  CHECK_FALSE(r.noise_p.has_value());
  CHECK(r.structure_label == label_of({4, {3, 1}}));

  GenConfig mixed;
  mixed.n_qubits = 5;
  mixed.noise_enabled = true;
  const SampleRecord a = generate_sample(Klass::GHZ, {5, {2, 3}}, mixed, 1234);
  const SampleRecord b = generate_sample(Klass::GHZ, {5, {2, 3}}, mixed, 1234);
  CHECK(a.rho == b.rho);
  CHECK(a.noise_p == b.noise_p);
  CHECK(a.mixture_weights == b.mixture_weights);
  REQUIRE(a.noise_p.has_value());
  CHECK(*a.noise_p >= 0.5);
  CHECK(*a.noise_p <= 1.0);
  const double sum = std::accumulate(a.mixture_weights.begin(), a.mixture_weights.end(), 0.0);
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(a.mixture_weights.size() >= 1);
  CHECK(a.mixture_weights.size() <= 10);
}

TEST_CASE("fully separable samples are PPT on every cut") {
  GenConfig cfg;
  cfg.n_qubits = 4;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SampleRecord r = generate_sample(seed % 2 ? Klass::W : Klass::GHZ, {4, {1, 1, 1, 1}}, cfg, seed);
    for (int cut = 0; cut < 3; ++cut) CHECK(min_pt_eigen(r.rho, cut) >= -1e-9);
  }
}

TEST_CASE("noiseless GME samples are NPT on every cut") {
  for (int n = 3; n <= 5; ++n) {
    GenConfig cfg;
    cfg.n_qubits = n;
    for (Klass k : {Klass::GHZ, Klass::W}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SampleRecord r = generate_sample(k, {n, {n}}, cfg, seed);
        for (int cut = 0; cut + 1 < n; ++cut) CHECK(min_pt_eigen(r.rho, cut) < -1e-6);
      }
    }
  }
}

TEST_CASE("local unitaries keep the structure") {
  GenConfig cfg;
  cfg.n_qubits = 4;
  cfg.local_unitaries = true;
  const SampleRecord r = generate_sample(Klass::W, {4, {3, 1}}, cfg, 8);
  CHECK(check_invariants(r.rho).ok());
  CHECK(min_pt_eigen(r.rho, 2) >= -1e-9);
  CHECK(min_pt_eigen(r.rho, 0) < -1e-6);
}

TEST_CASE("record seeds") {
  const std::uint64_t s = record_seed(7, Klass::W, 3, 11);
  CHECK(s == derive_seed(derive_seed(derive_seed(7, 1), 3), 11));
  std::set<std::uint64_t> distinct;
  for (int k = 0; k < 2; ++k)
    for (std::uint32_t label = 0; label < 16; ++label)
      for (std::uint64_t i = 0; i < 16; ++i) distinct.insert(record_seed(1, static_cast<Klass>(k), label, i));
  CHECK(distinct.size() == 2 * 16 * 16);
}

TEST_CASE("generate_dataset counts and order") {
  GenConfig cfg;
  cfg.n_qubits = 4;
  cfg.samples_per_cell = 10;
  const auto records = generate_dataset(cfg);
  REQUIRE(records.size() == 160);
  std::map<std::pair<int, std::uint32_t>, int> cells;
  for (const auto& r : records) ++cells[{static_cast<int>(r.klass), r.structure_label}];
  CHECK(cells.size() == 16);
  for (const auto& [key, count] : cells) CHECK(count == 10);
  CHECK(records.front().klass == Klass::GHZ);
  CHECK(records.back().klass == Klass::W);
  CHECK(records[10].structure_label == 1);
  CHECK(records[5].seed == record_seed(1, Klass::GHZ, 0, 5));

  GenConfig deep = cfg;
  deep.min_depth = 3;
  CHECK(active_labels(deep) == std::vector<std::uint32_t>{0, 1, 4});
}

TEST_CASE("generated records satisfy invariants and round-trip labels") {
  GenConfig cfg;
  cfg.n_qubits = 3;
  cfg.samples_per_cell = 100;
  std::size_t count = 0;
  generate_dataset(cfg, [&](SampleRecord&& r) {
    ++count;
    CHECK(check_invariants(r.rho).ok());
    CHECK(label_of(composition_of(r.structure_label, 3)) == r.structure_label);
  });
  CHECK(count == 800);
}

TEST_CASE("generation is reproducible") {
  GenConfig cfg;
  cfg.n_qubits = 3;
  cfg.samples_per_cell = 4;
  cfg.noise_enabled = true;
  const auto a = generate_dataset(cfg);
  const auto b = generate_dataset(cfg);
  CHECK(encode_dataset(3, a) == encode_dataset(3, b));
  cfg.master_seed = 2;
  CHECK(encode_dataset(3, generate_dataset(cfg)) != encode_dataset(3, a));
}

TEST_CASE("config validation") {
  GenConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  auto bad = [&](auto mutate) {
    GenConfig c;
    mutate(c);
    CHECK_THROWS_AS(validate(c), ConfigError);
  };
  bad([](GenConfig& c) { c.n_qubits = 0; });
  bad([](GenConfig& c) { c.n_qubits = 11; });
  bad([](GenConfig& c) { c.samples_per_cell = 0; });
  bad([](GenConfig& c) { c.mixture_min = 0; });
  bad([](GenConfig& c) { c.mixture_min = 5, c.mixture_max = 4; });
  bad([](GenConfig& c) { c.noise_enabled = true, c.noise_min = -0.1; });
  bad([](GenConfig& c) { c.noise_enabled = true, c.noise_min = 0.9, c.noise_max = 0.8; });
  bad([](GenConfig& c) { c.min_depth = 4; });

  GenConfig two;
  two.n_qubits = 2;
  const auto records = generate_dataset(two);
  CHECK(records.size() == 2 * 2 * 10);
}

TEST_CASE("stratified split") {
  GenConfig cfg;
  cfg.n_qubits = 4;
  cfg.samples_per_cell = 10;
  const auto records = generate_dataset(cfg);
  const Split s = split(records, {0.8, 0.1, 0.1}, 3);
  CHECK(s.train.size() == 128);
  CHECK(s.validation.size() == 16);
  CHECK(s.test.size() == 16);

  std::vector<std::size_t> all;
  for (const auto* part : {&s.train, &s.validation, &s.test}) all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(records.size());
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  CHECK(all == expect);

  // Every cell contributes 8 / 1 / 1.
  std::map<std::pair<int, std::uint32_t>, int> per_cell;
  for (std::size_t i : s.test) ++per_cell[{static_cast<int>(records[i].klass), records[i].structure_label}];
  CHECK(per_cell.size() == 16);
  for (const auto& [k, v] : per_cell) CHECK(v == 1);

  const Split again = split(records, {0.8, 0.1, 0.1}, 3);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK(split(records, {0.8, 0.1, 0.1}, 4).train != s.train);

  CHECK_THROWS_AS(split(records, {0.8, 0.1, 0.2}, 3), ConfigError);
  CHECK_THROWS_AS(split(records, {1.0, 0.0, 0.0}, 3), ConfigError);
  const std::vector<SampleRecord> tiny(records.begin(), records.begin() + 2);
  CHECK_THROWS_AS(split(tiny, {0.8, 0.1, 0.1}, 3), ConfigError);
}
