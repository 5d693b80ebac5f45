#pragma once

// Labeled density-matrix datasets.
//
// A sample of structure c and class k is a convex mixture of L product terms
// that all share the composition c. Each block of a term is
//   size >= 3: the GHZ or W projector of that size (per class),
//   size == 2: a uniformly chosen Bell projector,
//   size == 1: |0><0|.
// Mixture weights are flat-Dirichlet draws; white noise can be applied on top.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qent/errors.hpp"
#include "qent/qstate.hpp"
#include "qent/rng.hpp"
#include "qent/structures.hpp"

namespace qent {

enum class Klass : std::uint8_t { GHZ = 0, W = 1 };

const char* klass_name(Klass k);

struct GenConfig {
  int n_qubits = 3;
  int samples_per_cell = 10;
  int mixture_min = 1;
  int mixture_max = 10;
  bool noise_enabled = false;
  double noise_min = 0.5;
  double noise_max = 1.0;
  std::uint64_t master_seed = 1;
  // Only structures whose entanglement depth w reaches this are generated.
  // 3 restricts to structures containing a GHZ/W block, where the class is
  // physically defined.
  int min_depth = 1;
  // Random single-qubit unitaries on every qubit of blocks of size >= 2.
  bool local_unitaries = false;
};

// Throws ConfigError naming the offending field.
void validate(const GenConfig& config);

struct SampleRecord {
  DensityMatrix rho;
  Klass klass = Klass::GHZ;
  std::uint32_t structure_label = 0;
  std::optional<double> noise_p;
  std::uint64_t seed = 0;
  // Mixture weights used to build rho. Kept in memory only, not serialized.
  std::vector<double> mixture_weights;

  int n_qubits() const { return rho.n_qubits(); }
};

// (master, klass, label, index) -> record seed, chained through derive_seed.
std::uint64_t record_seed(std::uint64_t master_seed, Klass klass, std::uint32_t label,
                          std::uint64_t index);

// Labels generated under `config`, ascending.
std::vector<std::uint32_t> active_labels(const GenConfig& config);

DensityMatrix product_term(Klass klass, const Composition& c, Rng& rng,
                           bool local_unitaries = false);

// Flat Dirichlet weights of length `count` (normalized exponential draws).
std::vector<double> simplex_weights(int count, Rng& rng);

SampleRecord generate_sample(Klass klass, const Composition& c, const GenConfig& config,
                             std::uint64_t seed);

// Calls `sink` for every record in (klass, label, index) order.
void generate_dataset(const GenConfig& config, const std::function<void(SampleRecord&&)>& sink);
std::vector<SampleRecord> generate_dataset(const GenConfig& config);

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Records grouped by (klass, label) in order of first appearance.
std::vector<std::vector<std::size_t>> strata(std::span<const SampleRecord> records);

// Stratified three-way split. Within each stratum the counts are
// floor(f * m) with the leftover records handed out by largest remainder.
Split split(std::span<const SampleRecord> records, SplitFractions fractions, std::uint64_t seed);

std::vector<SampleRecord> select(std::span<const SampleRecord> records,
                                 std::span<const std::size_t> indices);

}  // namespace qent
