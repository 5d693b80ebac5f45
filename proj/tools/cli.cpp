#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "qent/circuit.hpp"
#include "qent/dataset_io.hpp"
#include "qent/nn/checkpoint.hpp"
#include "qent/structures.hpp"

namespace qent::cli {

namespace fs = std::filesystem;

namespace {

// Dataset and checkpoint disagree, or a file does not fit the command.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::pair<std::string, std::string>> kKeys = {
    {"run_name", "prefix of every artifact file (default run)"},
    {"out_dir", "directory for artifacts (default: config directory)"},
    {"dataset", "dataset file (default <out_dir>/<run_name>.qeds)"},
    {"checkpoint", "checkpoint file (default <run_name>.ckpt)"},
    {"history", "training history file (default <run_name>.history.tsv)"},
    {"confusion", "confusion-matrix file"},
    {"features", "feature table file (default <run_name>.features.tsv)"},
    {"n_qubits", "number of qubits"},
    {"samples_per_cell", "records per (class, label) cell"},
    {"mixture_min", "fewest product terms per sample"},
    {"mixture_max", "most product terms per sample"},
    {"noise", "apply white noise (true/false)"},
    {"noise_min", "lowest white-noise p"},
    {"noise_max", "highest white-noise p"},
    {"master_seed", "dataset seed"},
    {"min_depth", "only generate labels whose largest block reaches this"},
    {"local_unitaries", "random single-qubit unitaries on entangled blocks (true/false)"},
    {"task", "binary or structure"},
    {"num_classes", "class count (must match the task)"},
    {"patch_size", "attention patch side"},
    {"embed_dim", "token width"},
    {"heads", "attention heads"},
    {"encoder_blocks", "encoder blocks"},
    {"conv1_channels", "first conv stage channels"},
    {"conv2_channels", "second conv stage channels"},
    {"kernel_size", "conv branch kernel side"},
    {"reduction_channels", "reduction stage channels (n >= 8)"},
    {"mlp_hidden", "head hidden width"},
    {"attention", "enable the attention branch (true/false)"},
    {"model_seed", "parameter initialization seed"},
    {"learning_rate", "Adam learning rate"},
    {"batch_size", "minibatch size"},
    {"max_epochs", "epoch limit"},
    {"patience", "early-stopping patience in epochs"},
    {"min_delta", "validation-loss improvement that resets patience"},
    {"folds", "cross-validation folds"},
    {"train_seed", "shuffle seed"},
    {"train_fraction", "share of each stratum used for training"},
    {"validation_fraction", "share used for validation"},
    {"test_fraction", "share held out for testing"},
    {"split_seed", "split shuffle seed"},
};

const std::vector<std::string> kPathKeys = {"out_dir", "dataset", "checkpoint", "history", "confusion", "features"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void guard_overwrite(const fs::path& p, bool force) {
  if (!force && fs::exists(p)) throw ConfigError(p.string() + " exists; pass --force to overwrite");
}

std::string label_text(Task task, int cls, int n) {
  if (task == Task::Binary) return klass_name(static_cast<Klass>(cls));
  const Composition c = composition_of(static_cast<std::uint32_t>(cls), n);
  std::string s = "[";
  for (std::size_t i = 0; i < c.blocks.size(); ++i) s += (i ? "," : "") + std::to_string(c.blocks[i]);
  return s + "]";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

HybridModel load_model_for(const fs::path& checkpoint, const Dataset& ds) {
  HybridModel model = HybridModel::load(checkpoint.string());
  if (model.config().n_qubits != ds.n_qubits) {
    throw DataError("checkpoint expects n_qubits=" + std::to_string(model.config().n_qubits) +
                    " but the dataset has n_qubits=" + std::to_string(ds.n_qubits));
  }
  return model;
}

struct Context {
  RunConfig cfg;
  bool force = false;
  std::ostream& out;
  std::ostream& err;
};

int cmd_generate(Context& ctx) {
  const GenConfig gen = ctx.cfg.gen_config();
  validate(gen);
  const fs::path path = ctx.cfg.path("dataset", ".qeds");
  guard_overwrite(path, ctx.force);
  guard_overwrite(manifest_path(path.string()), ctx.force);
  const auto records = generate_dataset(gen);
  write_dataset(path.string(), gen.n_qubits, records);
  write_manifest(path.string(), gen, records.size());
  ctx.out << "wrote " << records.size() << " records to " << path.string() << "\n";
  return kOk;
}

int cmd_train(Context& ctx) {
  const Dataset ds = read_dataset(ctx.cfg.path("dataset", ".qeds").string());
  if (ctx.cfg.has("n_qubits") && ctx.cfg.integer("n_qubits", 0) != ds.n_qubits) {
    throw DataError("config n_qubits=" + std::to_string(ctx.cfg.integer("n_qubits", 0)) +
                    " but the dataset has n_qubits=" + std::to_string(ds.n_qubits));
  }
  const ModelConfig mc = ctx.cfg.model_config(ds.n_qubits);
  const TrainConfig tc = ctx.cfg.train_config();
  validate(tc);
  const fs::path ckpt = ctx.cfg.path("checkpoint", ".ckpt");
  const fs::path hist = ctx.cfg.path("history", ".history.tsv");
  const fs::path conf = ctx.cfg.path("confusion", ".confusion.tsv");
  for (const auto& p : {ckpt, hist, conf}) guard_overwrite(p, ctx.force);

  const Split parts = split(ds.records, ctx.cfg.split_fractions(), ctx.cfg.unsigned64("split_seed", 1));
  const auto train_set = make_examples(select(ds.records, parts.train), mc.task);
  const auto val_set = make_examples(select(ds.records, parts.validation), mc.task);
  const auto test_set = make_examples(select(ds.records, parts.test), mc.task);

  HybridModel model(mc);
  const History h = train(model, train_set, val_set, tc, [&](int epoch, const History& hh) {
    ctx.err << "epoch " << epoch << "  train_loss " << fixed(hh.train_loss.back(), 6) << "  val_loss "
            << fixed(hh.val_loss.back(), 6) << "  val_acc " << fixed(hh.val_accuracy.back(), 4) << "\n";
  });
  model.save(ckpt.string());
  write_history(h, hist.string());
  const Evaluation val = evaluate(model, val_set);
  ctx.out << "best epoch " << h.best_epoch << " of " << h.stopped_epoch << "\n";
  ctx.out << "validation accuracy " << fixed(val.accuracy, 4) << "\n";
  if (!test_set.empty()) {
    const Evaluation test = evaluate(model, test_set);
    write_confusion(test.confusion, conf.string());
    ctx.out << "test accuracy " << fixed(test.accuracy, 4) << "\n";
  }
  return kOk;
}

int cmd_evaluate(Context& ctx) {
  const Dataset ds = read_dataset(ctx.cfg.path("dataset", ".qeds").string());
  const HybridModel model = load_model_for(ctx.cfg.path("checkpoint", ".ckpt"), ds);
  const fs::path conf = ctx.cfg.path("confusion", ".eval.confusion.tsv");
  guard_overwrite(conf, ctx.force);
  const auto examples = make_examples(ds.records, model.config().task);
  const Evaluation ev = evaluate(model, examples);
  write_confusion(ev.confusion, conf.string());
  ctx.out << "accuracy " << fixed(ev.accuracy, 4) << "\n";
  return kOk;
}

int cmd_predict(Context& ctx) {
  const Dataset ds = read_dataset(ctx.cfg.path("dataset", ".qeds").string());
  const HybridModel model = load_model_for(ctx.cfg.path("checkpoint", ".ckpt"), ds);
  const Task task = model.config().task;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const int cls = predict(model, encode_input(ds.records[i].rho));
    ctx.out << i << "\tclass " << cls << "\t" << label_text(task, cls, ds.n_qubits) << "\n";
  }
  return kOk;
}

int cmd_simulate(Context& ctx, const std::string& circuit, std::optional<double> target, const std::string& out) {
  const int n = static_cast<int>(ctx.cfg.integer("n_qubits", 3));
  Circuit c;
  StateVector ideal;
  Klass klass;
  if (circuit == "ghz") {
    if (n < 2 || n > 10) throw ConfigError("n_qubits: GHZ circuits support 2..10 qubits, got " + std::to_string(n));
    c = ghz_circuit(n);
    ideal = ghz_state(n);
    klass = Klass::GHZ;
  } else {
    if (n < 3 || n > 5) throw ConfigError("n_qubits: W circuits support 3..5 qubits, got " + std::to_string(n));
    c = w_circuit(n);
    ideal = w_state(n);
    klass = Klass::W;
  }
  const StateVector psi = simulate(c);
  DensityMatrix rho = to_density(psi);
  if (std::abs(fidelity(ideal, rho) - 1.0) > kInvariantTol) {
    throw NumericalError("circuit output deviates from the ideal state");
  }
  SampleRecord rec;
  rec.klass = klass;
  rec.structure_label = 0;
  if (target) {
    if (*target < std::ldexp(1.0, -n) || *target > 1.0) {
      throw ConfigError("fidelity: target must lie in [2^-n, 1], got " + std::to_string(*target));
    }
    const double p = noise_for_fidelity(*target, n);
    rho = depolarize(rho, p);
    rec.noise_p = p;
    ctx.out << "noise p " << fixed(p, 10) << "\n";
  }
  rec.rho = rho;
  const fs::path path =
      out.empty() ? ctx.cfg.path("dataset", "." + circuit + std::to_string(n) + ".qeds") : fs::path(out);
  guard_overwrite(path, ctx.force);
  write_dataset(path.string(), n, std::span<const SampleRecord>(&rec, 1));
  ctx.out << "circuit " << circuit << " n=" << n << " gates=" << c.gates.size() << "\n";
  ctx.out << "fidelity " << fixed(fidelity(ideal, rho), 10) << "\n";
  return kOk;
}

int cmd_oracle(Context& ctx) {
  const Dataset ds = read_dataset(ctx.cfg.path("dataset", ".qeds").string());
  const int n = ds.n_qubits;
  if (n < 2 || n > 6) throw DataError("oracle supports 2..6 qubits, dataset has " + std::to_string(n));
  std::size_t separable = 0, separable_npt = 0, gme = 0, gme_ppt = 0;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const SampleRecord& r = ds.records[i];
    const StructureMeta meta = meta_of(composition_of(r.structure_label, n));
    std::vector<double> mins;
    for (int cut = 0; cut + 1 < n; ++cut) {
      const auto subset = cut_subset(cut);
      mins.push_back(min_eigenvalue_hermitian(partial_transpose(r.rho, subset)));
    }
    std::string line = std::to_string(i);
    for (double m : mins) line += "\t" + fixed(m, 12);
    if (meta.is_fully_separable) {
      ++separable;
      for (double m : mins) {
        if (m < -kEigenTol) {
          ++separable_npt;
          ctx.out << "violation: separable-labeled record is NPT\t" << line << "\n";
          break;
        }
      }
    }
    if (meta.is_gme && !r.noise_p) {
      ++gme;
      for (double m : mins) {
        if (m >= -1e-6) {
          ++gme_ppt;
          ctx.out << "anomaly: noiseless GME record is PPT on a cut\t" << line << "\n";
          break;
        }
      }
    }
  }
  ctx.out << "records " << ds.records.size() << "\n";
  ctx.out << "fully separable checked " << separable << ", NPT violations " << separable_npt << "\n";
  ctx.out << "noiseless GME checked " << gme << ", PPT anomalies " << gme_ppt << "\n";
  return kOk;
}

int cmd_export_features(Context& ctx) {
  const Dataset ds = read_dataset(ctx.cfg.path("dataset", ".qeds").string());
  const HybridModel model = load_model_for(ctx.cfg.path("checkpoint", ".ckpt"), ds);
  const fs::path path = ctx.cfg.path("features", ".features.tsv");
  guard_overwrite(path, ctx.force);
  export_features(model, make_examples(ds.records, model.config().task), path.string());
  ctx.out << "wrote " << ds.records.size() << " rows of " << feature_width(model.config()) << " features to "
          << path.string() << "\n";
  return kOk;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& RunConfig::keys() { return kKeys; }

RunConfig RunConfig::parse(const std::string& text, const fs::path& base_dir) {
  RunConfig cfg;
  cfg.base_ = base_dir;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [k, help] : kKeys) {
    if (k == key) {
      values_[key] = value;
      return;
    }
  }
  throw ConfigError(key + ": unknown config key");
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long RunConfig::integer(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": '" + s + "' is not an integer");
  return v;
}

std::uint64_t RunConfig::unsigned64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(key + ": '" + s + "' is not an unsigned 64-bit integer");
  }
  return v;
}

double RunConfig::real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": '" + s + "' is not a finite number");
  }
  return v;
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

fs::path RunConfig::path(const std::string& key, const std::string& suffix) const {
  if (has(key)) return (base_ / text(key, "")).lexically_normal();
  return (base_ / text("out_dir", ".") / (text("run_name", "run") + suffix)).lexically_normal();
}

GenConfig RunConfig::gen_config() const {
  GenConfig g;
  auto as_int = [&](const char* k, int fallback) {
    const long long v = integer(k, fallback);
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(std::string(k) + ": out of range");
    return static_cast<int>(v);
  };
  g.n_qubits = as_int("n_qubits", g.n_qubits);
  g.samples_per_cell = as_int("samples_per_cell", g.samples_per_cell);
  g.mixture_min = as_int("mixture_min", g.mixture_min);
  g.mixture_max = as_int("mixture_max", g.mixture_max);
  g.noise_enabled = flag("noise", g.noise_enabled);
  g.noise_min = real("noise_min", g.noise_min);
  g.noise_max = real("noise_max", g.noise_max);
  g.master_seed = unsigned64("master_seed", g.master_seed);
  g.min_depth = as_int("min_depth", g.min_depth);
  g.local_unitaries = flag("local_unitaries", g.local_unitaries);
  return g;
}

Task RunConfig::task() const {
  const std::string t = text("task", "binary");
  if (t == "binary") return Task::Binary;
  if (t == "structure") return Task::Structure;
  throw ConfigError("task: expected binary or structure, got '" + t + "'");
}

ModelConfig RunConfig::model_config(int n) const {
  ModelConfig m = default_config(n, task());
  auto as_int = [&](const char* k, int fallback) { return static_cast<int>(integer(k, fallback)); };
  m.num_classes = as_int("num_classes", m.num_classes);
  m.patch_size = as_int("patch_size", m.patch_size);
  m.embed_dim = as_int("embed_dim", m.embed_dim);
  m.heads = as_int("heads", m.heads);
  m.encoder_blocks = as_int("encoder_blocks", m.encoder_blocks);
  m.conv1_channels = as_int("conv1_channels", m.conv1_channels);
  m.conv2_channels = as_int("conv2_channels", m.conv2_channels);
  m.kernel_size = as_int("kernel_size", m.kernel_size);
  m.reduction_channels = as_int("reduction_channels", m.reduction_channels);
  m.mlp_hidden = as_int("mlp_hidden", m.mlp_hidden);
  m.attention_branch = flag("attention", m.attention_branch);
  m.seed = unsigned64("model_seed", m.seed);
  validate(m);
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = real("learning_rate", t.learning_rate);
  t.batch_size = static_cast<int>(integer("batch_size", t.batch_size));
  t.max_epochs = static_cast<int>(integer("max_epochs", t.max_epochs));
  t.patience = static_cast<int>(integer("patience", t.patience));
  t.min_delta = real("min_delta", t.min_delta);
  t.folds = static_cast<int>(integer("folds", t.folds));
  t.seed = unsigned64("train_seed", t.seed);
  return t;
}

SplitFractions RunConfig::split_fractions() const {
  SplitFractions f;
  f.train = real("train_fraction", f.train);
  f.validation = real("validation_fraction", f.validation);
  f.test = real("test_fraction", f.test);
  return f;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qent: entangled-state datasets and hybrid classifiers", "qent"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  std::map<std::string, std::string> overrides;
  std::string circuit = "ghz", sim_out;
  double sim_fidelity = -1.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key=value run configuration file");
    sub->add_flag("--force", force, "overwrite existing artifacts");
    for (const auto& [key, help] : kKeys) sub->add_option("--" + key, overrides[key], help);
  };
  auto* generate = app.add_subcommand("generate", "synthesize a dataset file and manifest");
  auto* train_cmd = app.add_subcommand("train", "train a model; writes checkpoint and history");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "accuracy and confusion matrix of a checkpoint on a dataset");
  auto* predict_cmd = app.add_subcommand("predict", "classify every record of a dataset file");
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate a GHZ or W preparation circuit");
  auto* oracle = app.add_subcommand("oracle", "partial-transpose report for a dataset");
  auto* features = app.add_subcommand("export-features", "write the pre-head feature table");
  for (auto* s : {generate, train_cmd, evaluate_cmd, predict_cmd, simulate_cmd, oracle, features}) add_common(s);
  simulate_cmd->add_option("--circuit", circuit, "ghz or w")->check(CLI::IsMember({"ghz", "w"}));
  simulate_cmd->add_option("--fidelity", sim_fidelity, "target fidelity reached with white noise");
  simulate_cmd->add_option("-o,--out", sim_out, "output dataset file");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Context ctx{config_path.empty() ? RunConfig{} : RunConfig::load(config_path), force, out, err};
    for (auto* sub : app.get_subcommands()) {
      for (const auto& [key, help] : kKeys) {
        if (sub->count("--" + key) == 0) continue;
        std::string value = overrides[key];
        for (const auto& pk : kPathKeys) {
          if (pk == key) value = fs::absolute(value).string();
        }
        ctx.cfg.set(key, value);
      }
    }
    if (generate->parsed()) return cmd_generate(ctx);
    if (train_cmd->parsed()) return cmd_train(ctx);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ctx);
    if (predict_cmd->parsed()) return cmd_predict(ctx);
    if (simulate_cmd->parsed()) {
      std::optional<double> target;
      if (simulate_cmd->count("--fidelity")) target = sim_fidelity;
      return cmd_simulate(ctx, circuit, target, sim_out.empty() ? "" : fs::absolute(sim_out).string());
    }
    if (oracle->parsed()) return cmd_oracle(ctx);
    if (features->parsed()) return cmd_export_features(ctx);
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace qent::cli
