#include "qent/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>

namespace qent {

namespace {

using Unitary2 = std::array<std::array<Complex, 2>, 2>;

// Haar-random SU(2) from a uniformly distributed unit quaternion.
Unitary2 random_su2(Rng& rng) {
  double q[4];
  double nrm = 0.0;
  do {
    nrm = 0.0;
    for (double& v : q) {
      v = rng.normal();
      nrm += v * v;
    }
  } while (nrm < 1e-12);
  nrm = std::sqrt(nrm);
  const Complex a{q[0] / nrm, q[1] / nrm};
  const Complex b{q[2] / nrm, q[3] / nrm};
  return {{{a, -std::conj(b)}, {b, std::conj(a)}}};
}

StateVector apply_local(const StateVector& psi, int q, const Unitary2& u) {
  std::vector<Complex> amp(psi.amplitudes().begin(), psi.amplitudes().end());
  const std::size_t bit = std::size_t{1} << (psi.n_qubits() - 1 - q);
  for (std::size_t i = 0; i < amp.size(); ++i) {
    if (i & bit) continue;
    const Complex a0 = amp[i];
    const Complex a1 = amp[i | bit];
    amp[i] = u[0][0] * a0 + u[0][1] * a1;
    amp[i | bit] = u[1][0] * a0 + u[1][1] * a1;
  }
  // Renormalize away rounding.
  double s = 0.0;
  for (const auto& v : amp) s += std::norm(v);
  s = std::sqrt(s);
  for (auto& v : amp) v /= s;
  return {psi.n_qubits(), std::move(amp)};
}

StateVector block_state(Klass klass, int size, Rng& rng) {
  if (size >= 3) return klass == Klass::GHZ ? ghz_state(size) : w_state(size);
  if (size == 2) return bell_state(static_cast<int>(rng.uniform_int(0, 3)));
  return zero_state(1);
}

}  // namespace

const char* klass_name(Klass k) { return k == Klass::GHZ ? "GHZ" : "W"; }

void validate(const GenConfig& c) {
  if (c.n_qubits < 1 || c.n_qubits > 10) throw ConfigError("n_qubits must be in 1..10");
  if (c.samples_per_cell < 1) throw ConfigError("samples_per_cell must be >= 1");
  if (c.mixture_min < 1 || c.mixture_max < c.mixture_min) {
    throw ConfigError("mixture_min/mixture_max must form a non-empty range >= 1");
  }
  if (c.noise_enabled &&
      !(c.noise_min >= 0.0 && c.noise_max <= 1.0 && c.noise_min <= c.noise_max)) {
    throw ConfigError("noise_min/noise_max must form a sub-range of [0, 1]");
  }
  if (c.min_depth < 1 || c.min_depth > c.n_qubits) {
    throw ConfigError("min_depth must be in 1..n_qubits");
  }
}

std::uint64_t record_seed(std::uint64_t master_seed, Klass klass, std::uint32_t label,
                          std::uint64_t index) {
  std::uint64_t s = derive_seed(master_seed, static_cast<std::uint64_t>(klass));
  s = derive_seed(s, label);
  return derive_seed(s, index);
}

std::vector<std::uint32_t> active_labels(const GenConfig& config) {
  validate(config);
  std::vector<std::uint32_t> labels;
  for (std::uint32_t label = 0; label < label_count(config.n_qubits); ++label) {
    if (meta_of(composition_of(label, config.n_qubits)).w >= config.min_depth) labels.push_back(label);
  }
  return labels;
}

DensityMatrix product_term(Klass klass, const Composition& c, Rng& rng, bool local_unitaries) {
  validate(c);
  std::optional<StateVector> psi;
  for (int size : c.blocks) {
    StateVector block = block_state(klass, size, rng);
    if (local_unitaries && size >= 2) {
      for (int q = 0; q < size; ++q) block = apply_local(block, q, random_su2(rng));
    }
    psi = psi ? tensor_product(*psi, block) : std::move(block);
  }
  return to_density(*psi);
}

std::vector<double> simplex_weights(int count, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(count));
  double total = 0.0;
  for (double& v : w) {
    v = rng.exponential();
    total += v;
  }
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / count);
    return w;
  }
  for (double& v : w) v /= total;
  return w;
}

SampleRecord generate_sample(Klass klass, const Composition& c, const GenConfig& config,
                             std::uint64_t seed) {
  Rng rng(seed);
  const int terms = static_cast<int>(rng.uniform_int(config.mixture_min, config.mixture_max));
  std::vector<double> weights = simplex_weights(terms, rng);

  std::vector<DensityMatrix> states;
  states.reserve(weights.size());
  for (int t = 0; t < terms; ++t) states.push_back(product_term(klass, c, rng, config.local_unitaries));

  SampleRecord rec;
  rec.rho = terms == 1 ? std::move(states.front()) : mix(weights, states);
  rec.klass = klass;
  rec.structure_label = label_of(c);
  rec.seed = seed;
  if (config.noise_enabled) {
    const double p = rng.uniform(config.noise_min, config.noise_max);
    rec.rho = depolarize(rec.rho, p);
    rec.noise_p = p;
  }
  rec.mixture_weights = std::move(weights);
  return rec;
}

void generate_dataset(const GenConfig& config, const std::function<void(SampleRecord&&)>& sink) {
  const auto labels = active_labels(config);
  for (Klass klass : {Klass::GHZ, Klass::W}) {
    for (std::uint32_t label : labels) {
      const Composition c = composition_of(label, config.n_qubits);
      for (int i = 0; i < config.samples_per_cell; ++i) {
        sink(generate_sample(klass, c, config,
                             record_seed(config.master_seed, klass, label, static_cast<std::uint64_t>(i))));
      }
    }
  }
}

std::vector<SampleRecord> generate_dataset(const GenConfig& config) {
  std::vector<SampleRecord> out;
  out.reserve(2 * active_labels(config).size() * static_cast<std::size_t>(config.samples_per_cell));
  generate_dataset(config, [&](SampleRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

std::vector<std::vector<std::size_t>> strata(std::span<const SampleRecord> records) {
  std::map<std::pair<int, std::uint32_t>, std::size_t> slot;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto key = std::make_pair(static_cast<int>(records[i].klass), records[i].structure_label);
    auto [it, inserted] = slot.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

Split split(std::span<const SampleRecord> records, SplitFractions f, std::uint64_t seed) {
  const double fr[3] = {f.train, f.validation, f.test};
  for (double v : fr) {
    if (!(v > 0.0)) throw ConfigError("split fractions must be positive");
  }
  if (std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");

  Split out;
  std::vector<std::size_t>* parts[3] = {&out.train, &out.validation, &out.test};
  const auto groups = strata(records);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto members = groups[g];
    const std::size_t m = members.size();
    if (m < 3) {
      throw ConfigError("stratum of " + std::to_string(m) + " records cannot be split three ways");
    }
    Rng rng(derive_seed(seed, g));
    shuffle(members, rng);

    std::size_t count[3];
    std::pair<double, int> rem[3];
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
      const double exact = fr[k] * static_cast<double>(m);
      count[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      rem[k] = {exact - static_cast<double>(count[k]), -k};
      assigned += count[k];
    }
    std::sort(std::begin(rem), std::end(rem), std::greater<>());
    for (int k = 0; assigned < m; ++k, ++assigned) ++count[-rem[k % 3].second];

    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k)
      for (std::size_t j = 0; j < count[k]; ++j) parts[k]->push_back(members[pos++]);
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

std::vector<SampleRecord> select(std::span<const SampleRecord> records,
                                 std::span<const std::size_t> indices) {
  std::vector<SampleRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(records[i]);
  return out;
}

}  // namespace qent
