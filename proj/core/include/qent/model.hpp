#pragma once

// Hybrid convolution + patch-attention classifier over density matrices.
//
//   input [2, D, D] (real, imaginary), D = 2^n
//     -> n >= 8: stride-2 3x3 conv stages (padding 1, relu) down to 128 x 128
//     -> conv branch:      conv-relu, conv-relu, maxpool2, flatten
//     -> attention branch: patch embed, + position table, pre-norm encoder
//                          blocks, mean over tokens
//     -> concat -> dense-relu -> dense -> logits
//
// Both branches read the same (possibly reduced) map. Disabling the attention
// branch gives the conv-only baseline.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qent/errors.hpp"
#include "qent/nn/attention.hpp"
#include "qent/nn/checkpoint.hpp"
#include "qent/nn/tensor.hpp"
#include "qent/qstate.hpp"

namespace qent {

enum class Task : std::uint8_t { Binary = 0, Structure = 1 };

const char* task_name(Task t);

struct ModelConfig {
  int n_qubits = 3;
  Task task = Task::Binary;
  int num_classes = 2;
  int patch_size = 2;
  int embed_dim = 64;
  int heads = 4;
  int encoder_blocks = 2;
  int conv1_channels = 16;
  int conv2_channels = 32;
  int kernel_size = 3;
  // Output channels of the reduction stages (n >= 8 only).
  int reduction_channels = 8;
  int mlp_hidden = 128;
  bool attention_branch = true;
  std::uint64_t seed = 1;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Maps n onto the fixed patch table {3:2, 4:2, 5:4, 6:8, 7:16, >=8:16}.
ModelConfig default_config(int n_qubits, Task task);

int expected_classes(Task task, int n_qubits);

// Throws ConfigError when the shapes cannot line up.
void validate(const ModelConfig& config);

int input_side(const ModelConfig& c);
int reduction_stages(const ModelConfig& c);
// Side of the map both branches consume.
int map_side(const ModelConfig& c);
int map_channels(const ModelConfig& c);
int token_count(const ModelConfig& c);
int conv_feature_width(const ModelConfig& c);
int feature_width(const ModelConfig& c);

// Channel 0 = real parts, channel 1 = imaginary parts.
nn::Tensor encode_input(const DensityMatrix& rho);
ComplexMatrix decode_input(const nn::Tensor& encoded);

struct ConvLayer {
  nn::Tensor kernels, bias;
};

struct DenseLayer {
  nn::Tensor weight, bias;
};

struct NormLayer {
  nn::Tensor scale, shift;
};

struct EncoderBlock {
  NormLayer norm1;
  nn::AttentionParams attention;
  NormLayer norm2;
  DenseLayer mlp1, mlp2;
};

class HybridModel {
 public:
  explicit HybridModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // One encoded sample [C, D, D] -> logits [K].
  nn::Tensor forward(const nn::Tensor& input) const;
  // Batch -> logits [B, K].
  nn::Tensor forward(std::span<const nn::Tensor> batch) const;
  // Pre-head feature vector [F] (conv flatten, then token mean).
  nn::Tensor features(const nn::Tensor& input) const;
  nn::Tensor features(std::span<const nn::Tensor> batch) const;

  // Handles share storage with the model.
  std::vector<nn::NamedTensor> named_parameters() const;
  std::vector<nn::Tensor> parameters() const;
  std::size_t parameter_count() const;

  // Deep copy of every parameter value.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

  void save(const std::string& path) const;
  static HybridModel load(const std::string& path);
  std::vector<std::uint8_t> encode() const;
  static HybridModel decode(std::span<const std::uint8_t> bytes);

 private:
  nn::Tensor trunk(const nn::Tensor& input) const;
  static HybridModel from_entries(const std::vector<nn::NamedTensor>& entries);

  ModelConfig config_;
  std::vector<ConvLayer> reduction_;
  ConvLayer conv1_, conv2_;
  DenseLayer patch_;
  nn::Tensor position_;
  std::vector<EncoderBlock> blocks_;
  DenseLayer head1_, head2_;
};

}  // namespace qent
