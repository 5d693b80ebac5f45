#include "qent/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "qent/nn/ops.hpp"
#include "qent/nn/optim.hpp"
#include "qent/rng.hpp"

namespace qent {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void check_targets(const HybridModel& model, std::span<const Example> examples) {
  const int k = model.config().num_classes;
  for (const Example& e : examples) {
    if (e.target < 0 || e.target >= k) {
      throw std::out_of_range("label " + std::to_string(e.target) + " outside " + std::to_string(k) + " classes");
    }
  }
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (c.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (c.patience < 1) throw ConfigError("patience must be >= 1");
  if (c.min_delta < 0.0) throw ConfigError("min_delta must be >= 0");
  if (c.folds < 2) throw ConfigError("folds must be >= 2");
}

std::vector<Example> make_examples(std::span<const SampleRecord> records, Task task) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const SampleRecord& r : records) {
    Example e;
    e.input = encode_input(r.rho);
    e.target = task == Task::Binary ? static_cast<int>(r.klass) : static_cast<int>(r.structure_label);
    e.klass = r.klass;
    e.structure_label = r.structure_label;
    out.push_back(std::move(e));
  }
  return out;
}

ConfusionMatrix::ConfusionMatrix(int classes)
    : classes_(classes), counts_(static_cast<std::size_t>(classes) * classes, 0) {}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_) {
    throw std::out_of_range("confusion matrix index out of range");
  }
  ++counts_[static_cast<std::size_t>(truth) * classes_ + predicted];
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
  return counts_.at(static_cast<std::size_t>(truth) * classes_ + predicted);
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int i = 0; i < classes_; ++i) t += at(i, i);
  return t;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t s = 0;
  for (int j = 0; j < classes_; ++j) s += at(truth, j);
  return s;
}

double ConfusionMatrix::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

Evaluation evaluate(const HybridModel& model, std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("evaluate: empty set");
  check_targets(model, examples);
  nn::NoGradGuard no_grad;
  Evaluation ev{0.0, 0.0, ConfusionMatrix(model.config().num_classes)};
  double loss = 0.0;
  for (const Example& e : examples) {
    nn::Tensor logits = model.forward(e.input);
    loss += nn::cross_entropy(logits, e.target).item();
    ev.confusion.add(e.target, argmax(logits.data()));
  }
  ev.mean_loss = loss / static_cast<double>(examples.size());
  ev.accuracy = ev.confusion.accuracy();
  return ev;
}

int predict(const HybridModel& model, const nn::Tensor& input) {
  nn::NoGradGuard no_grad;
  return argmax(model.forward(input).data());
}

History train(HybridModel& model, std::span<const Example> train_set, std::span<const Example> val_set,
              const TrainConfig& config, const EpochCallback& on_epoch) {
  validate(config);
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train: empty train or validation set");
  check_targets(model, train_set);
  check_targets(model, val_set);

  std::vector<nn::Tensor> params = model.parameters();
  nn::AdamState adam = nn::make_adam_state(params, {config.learning_rate});
  Rng rng(derive_seed(config.seed, 0x7472));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  History h;
  double best_loss = std::numeric_limits<double>::infinity();
  double stop_reference = best_loss;
  int waited = 0;
  auto best = model.snapshot();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::int64_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);
      nn::zero_grads(params);
      for (std::size_t i = start; i < end; ++i) {
        const Example& e = train_set[order[i]];
        nn::Tensor logits = model.forward(e.input);
        nn::Tensor loss = nn::cross_entropy(logits, e.target);
        loss_sum += loss.item();
        if (argmax(logits.data()) == e.target) ++correct;
        nn::scale(loss, inv).backward();
      }
      nn::adam_step(params, adam);
    }
    const Evaluation val = evaluate(model, val_set);
    if (!std::isfinite(loss_sum) || !std::isfinite(val.mean_loss)) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
    }
    h.train_loss.push_back(loss_sum / static_cast<double>(train_set.size()));
    h.train_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(train_set.size()));
    h.val_loss.push_back(val.mean_loss);
    h.val_accuracy.push_back(val.accuracy);
    h.stopped_epoch = epoch;

    if (val.mean_loss < best_loss) {
      best_loss = val.mean_loss;
      best = model.snapshot();
      h.best_epoch = epoch;
    }
    if (val.mean_loss < stop_reference - config.min_delta) {
      stop_reference = val.mean_loss;
      waited = 0;
    } else {
      ++waited;
    }
    if (on_epoch) on_epoch(epoch, h);
    if (waited >= config.patience) break;
  }
  model.restore(best);
  return h;
}

std::vector<int> fold_assignment(std::span<const Example> examples, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be >= 2");
  std::map<std::pair<int, std::uint32_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    groups[{static_cast<int>(examples[i].klass), examples[i].structure_label}].push_back(i);
  }
  std::vector<int> fold(examples.size(), 0);
  std::uint64_t g = 0;
  for (auto& [key, idx] : groups) {
    if (static_cast<int>(idx.size()) < folds) {
      throw ConfigError("folds: stratum (klass " + std::to_string(key.first) + ", label " +
                        std::to_string(key.second) + ") has " + std::to_string(idx.size()) + " records, fewer than " +
                        std::to_string(folds) + " folds");
    }
    Rng rng(derive_seed(seed, g++));
    shuffle(idx, rng);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = static_cast<int>(j % folds);
  }
  return fold;
}

KFoldResult kfold(std::span<const Example> examples, const ModelFactory& factory, const TrainConfig& config) {
  validate(config);
  const std::vector<int> fold = fold_assignment(examples, config.folds, config.seed);
  KFoldResult out;
  for (int f = 0; f < config.folds; ++f) {
    std::vector<Example> train_set, val_set;
    for (std::size_t i = 0; i < examples.size(); ++i) (fold[i] == f ? val_set : train_set).push_back(examples[i]);
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(f));
    HybridModel model = factory(seed);
    TrainConfig c = config;
    c.seed = seed;
    History h = train(model, train_set, val_set, c);
    Evaluation ev = evaluate(model, val_set);
    out.folds.push_back({ev.accuracy, std::move(ev.confusion), std::move(h)});
  }
  double sum = 0.0;
  for (const auto& r : out.folds) sum += r.accuracy;
  out.mean_accuracy = sum / static_cast<double>(out.folds.size());
  double ss = 0.0;
  for (const auto& r : out.folds) ss += (r.accuracy - out.mean_accuracy) * (r.accuracy - out.mean_accuracy);
  out.stddev_accuracy = std::sqrt(ss / static_cast<double>(out.folds.size() - 1));
  return out;
}

void export_features(const HybridModel& model, std::span<const Example> examples, const std::string& path) {
  auto out = open_out(path);
  nn::NoGradGuard no_grad;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& e = examples[i];
    out << i << '\t' << klass_name(e.klass) << '\t' << e.structure_label;
    const nn::Tensor f = model.features(e.input);
    for (double v : f.data()) out << '\t' << fmt(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_history(const History& h, const std::string& path) {
  auto out = open_out(path);
  out << "epoch\ttrain_loss\tval_loss\ttrain_acc\tval_acc\n";
  for (std::size_t i = 0; i < h.train_loss.size(); ++i) {
    out << i + 1 << '\t' << fmt(h.train_loss[i]) << '\t' << fmt(h.val_loss[i]) << '\t' << fmt(h.train_accuracy[i])
        << '\t' << fmt(h.val_accuracy[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_confusion(const ConfusionMatrix& m, const std::string& path) {
  auto out = open_out(path);
  out << "# rows=true class, columns=predicted class\n";
  for (int i = 0; i < m.classes(); ++i) {
    for (int j = 0; j < m.classes(); ++j) out << (j ? "\t" : "") << m.at(i, j);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace qent
