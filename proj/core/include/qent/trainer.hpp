#pragma once

// Minibatch training with early stopping, evaluation, k-fold
// cross-validation and plain-text exports.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qent/datagen.hpp"
#include "qent/errors.hpp"
#include "qent/model.hpp"

namespace qent {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;
  double min_delta = 1e-4;
  int folds = 10;
  std::uint64_t seed = 1;
};

void validate(const TrainConfig& config);

// One encoded sample with its class index under the model's task.
struct Example {
  nn::Tensor input;
  int target = 0;
  Klass klass = Klass::GHZ;
  std::uint32_t structure_label = 0;
};

// Binary task: target = klass. Structure task: target = structure label.
std::vector<Example> make_examples(std::span<const SampleRecord> records, Task task);

struct History {
  std::vector<double> train_loss, val_loss, train_accuracy, val_accuracy;
  int stopped_epoch = 0;
  // 1-based epoch whose parameters were restored.
  int best_epoch = 0;
};

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes = 0);

  void add(int truth, int predicted);
  int classes() const { return classes_; }
  std::int64_t at(int truth, int predicted) const;
  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t row_sum(int truth) const;
  double accuracy() const;

 private:
  int classes_;
  std::vector<std::int64_t> counts_;
};

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  ConfusionMatrix confusion;
};

// Optional per-epoch callback (epoch is 1-based).
using EpochCallback = std::function<void(int epoch, const History&)>;

// Trains in place and leaves the best-epoch parameters in the model.
History train(HybridModel& model, std::span<const Example> train_set, std::span<const Example> val_set,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

Evaluation evaluate(const HybridModel& model, std::span<const Example> examples);

// Argmax class of one input.
int predict(const HybridModel& model, const nn::Tensor& input);

struct FoldResult {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  History history;
};

struct KFoldResult {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  // Sample standard deviation (n - 1).
  double stddev_accuracy = 0.0;
};

// Fold index of every example. Strata are (klass, structure label); each
// stratum is shuffled and dealt round-robin over the folds.
std::vector<int> fold_assignment(std::span<const Example> examples, int folds, std::uint64_t seed);

using ModelFactory = std::function<HybridModel(std::uint64_t seed)>;

// Fold f trains a fresh model (seed derive_seed(config.seed, f)) on the other
// folds and validates on fold f.
KFoldResult kfold(std::span<const Example> examples, const ModelFactory& factory, const TrainConfig& config);

// Tab-separated: index, klass, structure label, then the feature values.
void export_features(const HybridModel& model, std::span<const Example> examples, const std::string& path);

// Header "epoch train_loss val_loss train_acc val_acc", tab-separated rows.
void write_history(const History& history, const std::string& path);

// One comment line naming the axes, then K rows of K tab-separated counts.
void write_confusion(const ConfusionMatrix& confusion, const std::string& path);

}  // namespace qent
