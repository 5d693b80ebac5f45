// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qent/circuit.hpp"
#include "qent/datagen.hpp"
#include "qent/dataset_io.hpp"
#include "qent/model.hpp"
#include "qent/nn/attention.hpp"
#include "qent/nn/gradcheck.hpp"
#include "qent/nn/ops.hpp"
#include "qent/structures.hpp"
#include "qent/trainer.hpp"

using namespace qent;
using nn::Tensor;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Tensor random_tensor(nn::Shape shape, Rng& rng, bool grad = true) {
  std::size_t size = 1;
  for (int d : shape) size *= static_cast<std::size_t>(d);
  std::vector<double> v(size);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), std::move(v), grad);
}

std::vector<double> coefficients(std::size_t n, Rng& rng) {
  std::vector<double> c(n);
  for (double& x : c) x = rng.uniform(-1.0, 1.0);
  return c;
}

// ---------------------------------------------------------------- 1

Outcome gradient_oracle() {
  Outcome out;
  Rng rng(2024);
  double worst_layer = 0.0;
  std::string worst_name;
  auto layer = [&](const std::string& name, std::vector<Tensor> inputs, std::function<Tensor()> f) {
    const auto rep = nn::gradient_check(f, inputs);
    if (rep.max_relative_error > worst_layer) {
      worst_layer = rep.max_relative_error;
      worst_name = name;
    }
    out.require(rep.max_relative_error < 1e-4, name + " rel err " + fmt("%.2e", rep.max_relative_error));
  };
  // Each layer output is reduced with fixed random coefficients so every
  // output element contributes to the checked gradient.
  auto reduce = [&](const Tensor& y, const std::vector<double>& c) { return nn::weighted_sum(y, c); };

  {
    Tensor x = random_tensor({2, 7, 7}, rng), k = random_tensor({3, 2, 3, 3}, rng), b = random_tensor({3}, rng);
    const auto c = coefficients(3 * 5 * 5, rng);
    layer("conv2d", {x, k, b}, [=] { return reduce(nn::conv2d(x, k, b), c); });
    const auto c2 = coefficients(3 * 4 * 4, rng);
    layer("conv2d stride 2 pad 1", {x, k, b}, [=] { return reduce(nn::conv2d(x, k, b, {2, 1}), c2); });
  }
  {
    Tensor x = random_tensor({2, 6, 6}, rng);
    const auto c = coefficients(2 * 3 * 3, rng);
    layer("maxpool2", {x}, [=] { return reduce(nn::maxpool2(x), c); });
  }
  {
    Tensor x = random_tensor({3, 5}, rng), w = random_tensor({5, 4}, rng), b = random_tensor({4}, rng);
    const auto c = coefficients(12, rng);
    layer("dense", {x, w, b}, [=] { return reduce(nn::dense(x, w, b), c); });
  }
  {
    Tensor x = random_tensor({20}, rng);
    const auto c = coefficients(20, rng);
    layer("relu", {x}, [=] { return reduce(nn::relu(x), c); });
  }
  {
    Tensor x = random_tensor({4, 6}, rng), s = random_tensor({6}, rng), b = random_tensor({6}, rng);
    const auto c = coefficients(24, rng);
    layer("layer_norm", {x, s, b}, [=] { return reduce(nn::layer_norm(x, s, b), c); });
  }
  {
    Tensor x = random_tensor({3, 5}, rng);
    const auto c = coefficients(15, rng);
    layer("softmax", {x}, [=] { return reduce(nn::softmax(x), c); });
  }
  {
    Tensor x = random_tensor({2, 8, 8}, rng), w = random_tensor({2 * 4 * 4, 5}, rng), b = random_tensor({5}, rng);
    const auto c = coefficients(4 * 5, rng);
    layer("patch_embed", {x, w, b}, [=] { return reduce(nn::patch_embed(x, w, b, 4), c); });
  }
  {
    Tensor x = random_tensor({4, 6}, rng), t = random_tensor({4, 6}, rng);
    const auto c = coefficients(24, rng);
    layer("pos_embed_add", {x, t}, [=] { return reduce(nn::pos_embed_add(x, t), c); });
  }
  {
    Tensor x = random_tensor({5, 8}, rng);
    nn::AttentionParams p{random_tensor({8, 8}, rng), random_tensor({8}, rng), random_tensor({8, 8}, rng),
                          random_tensor({8}, rng),    random_tensor({8, 8}, rng), random_tensor({8}, rng),
                          random_tensor({8, 8}, rng), random_tensor({8}, rng)};
    const auto c = coefficients(40, rng);
    layer("multihead_self_attention", {x, p.wq, p.bq, p.wk, p.bk, p.wv, p.bv, p.wo, p.bo},
          [=] { return reduce(nn::multihead_self_attention(x, p, 2), c); });
  }
  {
    Tensor x = random_tensor({4, 6}, rng);
    const auto c = coefficients(6, rng);
    layer("mean_rows", {x}, [=] { return reduce(nn::mean_rows(x), c); });
  }
  {
    Tensor a = random_tensor({2, 3}, rng), b = random_tensor({4}, rng);
    const auto c = coefficients(10, rng);
    layer("concat", {a, b}, [=] { return reduce(nn::concat(a, b), c); });
  }
  {
    Tensor x = random_tensor({6}, rng);
    layer("cross_entropy", {x}, [=] { return nn::cross_entropy(x, 2); });
  }
  out.note("worst layer " + worst_name + " " + fmt("%.2e", worst_layer));

  // Full n = 3 hybrid: reduced width with every coordinate checked, then the
  // default model on sampled coordinates.
  GenConfig g;
  g.n_qubits = 3;
  const Tensor a = encode_input(generate_sample(Klass::GHZ, {3, {3}}, g, 11).rho);
  const Tensor b = encode_input(generate_sample(Klass::W, {3, {3}}, g, 12).rho);
  auto full_check = [&](const ModelConfig& mc, std::size_t per_tensor, const std::string& name) {
    HybridModel m(mc);
    auto params = m.parameters();
    Rng jitter(mc.seed + 100);
    // Move parameters off the zero biases so no relu sits exactly on its kink.
    for (auto& t : params)
      for (double& v : t.data()) v += jitter.uniform(-0.3, 0.3);
    nn::GradCheckOptions opt;
    opt.max_coords_per_tensor = per_tensor;
    opt.seed = 5;
    const auto rep = nn::gradient_check(
        [&] { return nn::add(nn::cross_entropy(m.forward(a), 0), nn::cross_entropy(m.forward(b), 1)); }, params, opt);
    out.require(rep.max_relative_error < 1e-3, name + " rel err " + fmt("%.2e", rep.max_relative_error));
    out.note(name + " " + std::to_string(rep.coordinates) + " coords rel err " + fmt("%.2e", rep.max_relative_error));
  };
  ModelConfig small = default_config(3, Task::Binary);
  small.embed_dim = 8;
  small.heads = 2;
  small.encoder_blocks = 1;
  small.conv1_channels = 3;
  small.conv2_channels = 4;
  small.mlp_hidden = 8;
  small.seed = 3;
  full_check(small, 0, "hybrid n=3 (narrow, all coords)");
  full_check(default_config(3, Task::Binary), 24, "hybrid n=3 (default)");
  return out;
}

// ---------------------------------------------------------------- 2

Outcome physics_invariants() {
  Outcome out;
  for (int n = 3; n <= 5; ++n) {
    // Alternate noiseless and noisy-with-local-unitaries settings.
    std::size_t checked = 0, bad = 0;
    double worst_herm = 0.0, worst_trace = 0.0, worst_eig = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
      GenConfig cfg;
      cfg.n_qubits = n;
      cfg.master_seed = 100 + n;
      cfg.noise_enabled = variant == 1;
      cfg.local_unitaries = variant == 1;
      const int cells = 2 * static_cast<int>(label_count(n));
      cfg.samples_per_cell = (500 + cells - 1) / cells;
      generate_dataset(cfg, [&](SampleRecord&& r) {
        const InvariantReport rep = check_invariants(r.rho);
        ++checked;
        if (!rep.ok()) ++bad;
        worst_herm = std::max(worst_herm, rep.hermiticity_error);
        worst_trace = std::max(worst_trace, rep.trace_error);
        worst_eig = std::min(worst_eig, rep.min_eigenvalue);
      });
    }
    out.require(checked >= 1000, "n=" + std::to_string(n) + " only " + std::to_string(checked) + " samples");
    out.require(bad == 0, "n=" + std::to_string(n) + " " + std::to_string(bad) + " invalid samples");
    out.note("n=" + std::to_string(n) + " " + std::to_string(checked) + " samples, herm " + fmt("%.1e", worst_herm) +
             " trace " + fmt("%.1e", worst_trace) + " min eig " + fmt("%.1e", worst_eig));
  }
  return out;
}

// ---------------------------------------------------------------- 3

// Independent partition count: number of non-increasing sequences summing to n.
std::uint64_t brute_partitions(int n, int max_part) {
  if (n == 0) return 1;
  std::uint64_t total = 0;
  for (int p = std::min(n, max_part); p >= 1; --p) total += brute_partitions(n - p, p);
  return total;
}

Outcome combinatorics() {
  Outcome out;
  for (int n = 3; n <= 10; ++n) {
    const auto comps = enumerate_compositions(n);
    const std::uint64_t expect = 1ULL << (n - 1);
    out.require(label_count(n) == expect && comps.size() == expect, "composition count n=" + std::to_string(n));
    std::set<std::vector<int>> distinct;
    std::set<YoungDiagram> diagrams;
    for (const auto& c : comps) {
      distinct.insert(c.blocks);
      diagrams.insert(young_of(c));
      int sum = 0;
      for (int b : c.blocks) sum += b;
      out.require(sum == n, "composition sums n=" + std::to_string(n));
    }
    out.require(distinct.size() == expect, "distinct compositions n=" + std::to_string(n));
    out.require(diagrams.size() == brute_partitions(n, n), "Young diagrams n=" + std::to_string(n));
  }
  out.require(label_count(4) == 8, "8 structures at n=4");
  out.require(label_count(6) == 32, "32 structures at n=6");
  for (int n = 1; n <= 20; ++n) {
    out.require(count_partitions(n) == brute_partitions(n, n), "partitions n=" + std::to_string(n));
  }
  out.require(count_partitions(4) == 5, "p(4)=5");
  out.note("2^(n-1) compositions for n=3..10, p(n) matches brute force for n=1..20");
  return out;
}

// ---------------------------------------------------------------- 4

Outcome ppt_agreement() {
  Outcome out;
  std::size_t separable = 0, separable_ppt = 0, gme = 0, gme_npt = 0, boundary = 0, boundary_ppt = 0;
  for (int n = 2; n <= 5; ++n) {
    for (bool unitaries : {false, true}) {
      GenConfig cfg;
      cfg.n_qubits = n;
      cfg.samples_per_cell = 30;
      cfg.local_unitaries = unitaries;
      cfg.master_seed = 40 + n;
      generate_dataset(cfg, [&](SampleRecord&& r) {
        const Composition comp = composition_of(r.structure_label, n);
        const StructureMeta meta = meta_of(comp);
        std::vector<double> mins;
        for (int cut = 0; cut + 1 < n; ++cut) {
          const auto subset = cut_subset(cut);
          mins.push_back(min_eigenvalue_hermitian(partial_transpose(r.rho, subset)));
        }
        if (meta.is_fully_separable) {
          ++separable;
          if (std::all_of(mins.begin(), mins.end(), [](double m) { return m >= -kEigenTol; })) ++separable_ppt;
        }
        if (meta.is_gme && n >= 3) {
          ++gme;
          if (std::all_of(mins.begin(), mins.end(), [](double m) { return m < -kEigenTol; })) ++gme_npt;
        }
        // Cuts that fall between blocks separate a product and stay PPT.
        const auto offsets = block_offsets(comp);
        for (std::size_t i = 1; i < offsets.size(); ++i) {
          ++boundary;
          if (mins[offsets[i] - 1] >= -kEigenTol) ++boundary_ppt;
        }
      });
    }
  }
  out.require(separable > 0 && separable == separable_ppt, "fully separable PPT");
  out.require(gme > 0 && gme == gme_npt, "GME NPT");
  out.require(boundary == boundary_ppt, "block-boundary cuts PPT");
  out.note("fully separable PPT " + std::to_string(separable_ppt) + "/" + std::to_string(separable) +
           ", GME NPT " + std::to_string(gme_npt) + "/" + std::to_string(gme) + ", block-boundary cuts PPT " +
           std::to_string(boundary_ppt) + "/" + std::to_string(boundary));
  return out;
}

// ---------------------------------------------------------------- 5

// <psi|rho|psi> summed directly from the matrix entries.
double direct_fidelity(const StateVector& psi, const DensityMatrix& rho) {
  Complex acc = 0.0;
  const auto a = psi.amplitudes();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) acc += std::conj(a[i]) * rho.matrix()(i, j) * a[j];
  return acc.real();
}

Outcome circuits() {
  Outcome out;
  const double s = 1.0 / std::sqrt(2.0), t = 1.0 / std::sqrt(3.0);
  std::vector<Complex> ghz(8, 0.0), w(8, 0.0);
  ghz[0] = ghz[7] = s;
  w[1] = w[2] = w[4] = t;
  const StateVector ghz3(3, ghz), w3(3, w);
  const StateVector sim_ghz = simulate(ghz_circuit(3));
  const StateVector sim_w = simulate(w_circuit(3));
  const double fg = direct_fidelity(ghz3, to_density(sim_ghz));
  const double fw = direct_fidelity(w3, to_density(sim_w));
  out.require(std::abs(fg - 1.0) < 1e-10, "GHZ3 fidelity " + fmt("%.15f", fg));
  out.require(std::abs(fw - 1.0) < 1e-10, "W3 fidelity " + fmt("%.15f", fw));
  out.note("GHZ3 |F-1| " + fmt("%.1e", std::abs(fg - 1.0)) + ", W3 |F-1| " + fmt("%.1e", std::abs(fw - 1.0)));

  struct Target {
    const char* name;
    int n;
    bool w;
    double f;
  };
  for (const Target& tg : {Target{"GHZ3", 3, false, 0.8187}, Target{"W3", 3, true, 0.7578},
                           Target{"GHZ5", 5, false, 0.6158}, Target{"W5", 5, true, 0.6158}}) {
    const StateVector ideal = tg.w ? w_state(tg.n) : ghz_state(tg.n);
    const StateVector prepared = simulate(tg.w ? w_circuit(tg.n) : ghz_circuit(tg.n));
    const double p = noise_for_fidelity(tg.f, tg.n);
    const double f = direct_fidelity(ideal, depolarize(to_density(prepared), p));
    out.require(std::abs(f - tg.f) < 1e-6, std::string(tg.name) + " calibrated fidelity " + fmt("%.10f", f));
    out.note(std::string(tg.name) + " p=" + fmt("%.5f", p) + " F=" + fmt("%.10f", f));
  }
  return out;
}

// ---------------------------------------------------------------- training helpers

std::vector<SampleRecord> pick(const std::vector<SampleRecord>& all, const std::vector<std::size_t>& idx) {
  std::vector<SampleRecord> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

struct RunResult {
  double accuracy = 0.0;
  double seconds = 0.0;
  int epochs = 0;
  int best_epoch = 0;
};

RunResult fit(const ModelConfig& mc, const TrainConfig& tc, const std::vector<Example>& train_set,
              const std::vector<Example>& val_set, const std::vector<Example>& test_set, const std::string& tag) {
  const auto t0 = Clock::now();
  HybridModel model(mc);
  const History h = train(model, train_set, val_set, tc, [&](int epoch, const History& hh) {
    std::fprintf(stderr, "  [%s] epoch %d train_loss %.5f val_loss %.5f val_acc %.4f (%.0f s)\n", tag.c_str(), epoch,
                 hh.train_loss.back(), hh.val_loss.back(), hh.val_accuracy.back(), seconds_since(t0));
  });
  RunResult r;
  r.seconds = seconds_since(t0);
  r.epochs = h.stopped_epoch;
  r.best_epoch = h.best_epoch;
  r.accuracy = evaluate(model, test_set).accuracy;
  return r;
}

TrainConfig acceptance_train_config(std::uint64_t seed) {
  TrainConfig tc;
  tc.max_epochs = 100;
  tc.patience = 5;
  tc.min_delta = 1e-3;
  tc.seed = seed;
  return tc;
}

// ---------------------------------------------------------------- 6

Outcome binary_classification() {
  Outcome out;
  for (int n = 3; n <= 5; ++n) {
    GenConfig cfg;
    cfg.n_qubits = n;
    cfg.min_depth = 3;
    const int cells = 2 * static_cast<int>(active_labels(cfg).size());
    auto make = [&](int total, std::uint64_t seed) {
      GenConfig c = cfg;
      c.samples_per_cell = (total + cells - 1) / cells;
      c.master_seed = seed;
      return make_examples(generate_dataset(c), Task::Binary);
    };
    const auto train_set = make(2000, 600 + n);
    const auto val_set = make(200, 700 + n);
    const auto test_set = make(400, 800 + n);
    const RunResult r = fit(default_config(n, Task::Binary), acceptance_train_config(1), train_set, val_set, test_set,
                            "binary n=" + std::to_string(n));
    const std::string tag = "n=" + std::to_string(n);
    out.require(r.accuracy >= 0.99, tag + " accuracy " + fmt("%.4f", r.accuracy));
    out.require(r.seconds < 600.0, tag + " time " + fmt("%.0f s", r.seconds));
    out.require(r.epochs <= 100, tag + " epochs " + std::to_string(r.epochs));
    out.note(tag + " train " + std::to_string(train_set.size()) + " test " + std::to_string(test_set.size()) +
             " acc " + fmt("%.4f", r.accuracy) + " epochs " + std::to_string(r.epochs) + " " +
             fmt("%.0f s", r.seconds));
  }
  return out;
}

// ---------------------------------------------------------------- 7-9

struct StructureData {
  std::vector<Example> train, val, test;
};

StructureData structure_data(int n, bool noise, std::uint64_t seed) {
  GenConfig cfg;
  cfg.n_qubits = n;
  cfg.samples_per_cell = 200;
  cfg.master_seed = seed;
  cfg.noise_enabled = noise;
  const auto records = generate_dataset(cfg);
  const Split s = split(records, {0.8, 0.1, 0.1}, seed);
  return {make_examples(pick(records, s.train), Task::Structure),
          make_examples(pick(records, s.validation), Task::Structure),
          make_examples(pick(records, s.test), Task::Structure)};
}

Outcome structure_detection() {
  Outcome out;
  for (const auto& [n, threshold] : std::vector<std::pair<int, double>>{{4, 0.90}, {5, 0.85}}) {
    const StructureData d = structure_data(n, false, 900 + n);
    const RunResult r = fit(default_config(n, Task::Structure), acceptance_train_config(1), d.train, d.val, d.test,
                            "structure n=" + std::to_string(n));
    const std::string tag = "n=" + std::to_string(n);
    out.require(r.accuracy >= threshold, tag + " accuracy " + fmt("%.4f", r.accuracy));
    out.require(r.seconds < 1800.0, tag + " time " + fmt("%.0f s", r.seconds));
    out.note(tag + " classes " + std::to_string(1 << (n - 1)) + " test " + std::to_string(d.test.size()) + " acc " +
             fmt("%.4f", r.accuracy) + " epochs " + std::to_string(r.epochs) + " " + fmt("%.0f s", r.seconds));
  }
  return out;
}

Outcome hybrid_vs_conv() {
  Outcome out;
  const StructureData d = structure_data(4, false, 904);
  double hybrid = 0.0, conv = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ModelConfig mc = default_config(4, Task::Structure);
    mc.seed = seed;
    const RunResult h = fit(mc, acceptance_train_config(seed), d.train, d.val, d.test,
                            "hybrid seed " + std::to_string(seed));
    mc.attention_branch = false;
    const RunResult c = fit(mc, acceptance_train_config(seed), d.train, d.val, d.test,
                            "conv-only seed " + std::to_string(seed));
    hybrid += h.accuracy / 3.0;
    conv += c.accuracy / 3.0;
    per_seed += " " + fmt("%.4f", h.accuracy) + "/" + fmt("%.4f", c.accuracy);
  }
  out.require(hybrid >= conv - 0.01, "hybrid " + fmt("%.4f", hybrid) + " < conv-only " + fmt("%.4f", conv) + " - 0.01");
  out.note("mean hybrid " + fmt("%.4f", hybrid) + " conv-only " + fmt("%.4f", conv) + " (per seed" + per_seed + ")");
  return out;
}

Outcome noise_robustness() {
  Outcome out;
  const StructureData clean = structure_data(4, false, 904);
  const StructureData noisy = structure_data(4, true, 904);
  const ModelConfig mc = default_config(4, Task::Structure);
  const RunResult a = fit(mc, acceptance_train_config(1), clean.train, clean.val, clean.test, "noiseless");
  const RunResult b = fit(mc, acceptance_train_config(1), noisy.train, noisy.val, noisy.test, "noisy");
  const double drop = a.accuracy - b.accuracy;
  out.require(drop <= 0.10, "accuracy drop " + fmt("%.4f", drop));
  out.note("noiseless " + fmt("%.4f", a.accuracy) + ", p in [0.5,1] " + fmt("%.4f", b.accuracy) + ", drop " +
           fmt("%.4f", drop));
  return out;
}

// ---------------------------------------------------------------- 10

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome reproducibility() {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "qent_acceptance_repro";
  fs::remove_all(root);
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = root / std::to_string(run);
    fs::create_directories(dir);
    GenConfig cfg;
    cfg.n_qubits = 4;
    cfg.samples_per_cell = 20;
    cfg.noise_enabled = true;
    cfg.local_unitaries = true;
    cfg.master_seed = 77;
    const auto records = generate_dataset(cfg);
    write_dataset((dir / "data.qeds").string(), 4, records);
    write_manifest((dir / "data.qeds").string(), cfg, records.size());

    const Dataset ds = read_dataset((dir / "data.qeds").string());
    const Split s = split(ds.records, {0.8, 0.1, 0.1}, 5);
    const auto train_set = make_examples(pick(ds.records, s.train), Task::Structure);
    const auto val_set = make_examples(pick(ds.records, s.validation), Task::Structure);
    ModelConfig mc = default_config(4, Task::Structure);
    mc.seed = 9;
    HybridModel model(mc);
    TrainConfig tc;
    tc.max_epochs = 3;
    tc.seed = 9;
    const History h = train(model, train_set, val_set, tc);
    model.save((dir / "model.ckpt").string());
    write_history(h, (dir / "history.tsv").string());
  }
  std::size_t bytes = 0;
  for (const char* name : {"data.qeds", "data.qeds.manifest", "model.ckpt", "history.tsv"}) {
    const std::string a = file_bytes(root / "0" / name), b = file_bytes(root / "1" / name);
    out.require(!a.empty() && a == b, std::string(name) + " differs");
    bytes += a.size();
  }
  out.note("dataset, manifest, checkpoint and history identical (" + std::to_string(bytes) + " bytes each run)");
  fs::remove_all(root);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "gradient oracle", 120, gradient_oracle},
      {2, "physics invariants", 300, physics_invariants},
      {3, "combinatorics", 1, combinatorics},
      {4, "PPT oracle agreement", 600, ppt_agreement},
      {5, "circuit verification and noise calibration", 0, circuits},
      {6, "GHZ vs W classification", 0, binary_classification},
      {7, "structure detection", 0, structure_detection},
      {8, "hybrid vs conv-only", 0, hybrid_vs_conv},
      {9, "noise robustness", 0, noise_robustness},
      {10, "reproducibility", 900, reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime over " + fmt("%.0f s", c.budget_s));
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
