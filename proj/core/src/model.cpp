#include "qent/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qent/nn/ops.hpp"
#include "qent/rng.hpp"

namespace qent {

namespace {

using nn::Tensor;

constexpr int kReducedSide = 128;
constexpr const char* kConfigEntry = "__config__";

Tensor glorot(nn::Shape shape, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor t(std::move(shape), true);
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

Tensor zeros(nn::Shape shape) { return Tensor(std::move(shape), true); }

Tensor ones(nn::Shape shape) {
  Tensor t(std::move(shape), true);
  std::fill(t.data().begin(), t.data().end(), 1.0);
  return t;
}

ConvLayer make_conv(int c_out, int c_in, int k, Rng& rng) {
  return {glorot({c_out, c_in, k, k}, c_in * k * k, c_out * k * k, rng), zeros({c_out})};
}

DenseLayer make_dense(int in, int out, Rng& rng) { return {glorot({in, out}, in, out, rng), zeros({out})}; }

NormLayer make_norm(int e) { return {ones({e}), zeros({e})}; }

Tensor conv_relu(const Tensor& x, const ConvLayer& l, nn::ConvOptions opt = {}) {
  return nn::relu(nn::conv2d(x, l.kernels, l.bias, opt));
}

std::vector<double> config_values(const ModelConfig& c) {
  return {static_cast<double>(c.n_qubits),
          static_cast<double>(c.task),
          static_cast<double>(c.num_classes),
          static_cast<double>(c.patch_size),
          static_cast<double>(c.embed_dim),
          static_cast<double>(c.heads),
          static_cast<double>(c.encoder_blocks),
          static_cast<double>(c.conv1_channels),
          static_cast<double>(c.conv2_channels),
          static_cast<double>(c.kernel_size),
          static_cast<double>(c.reduction_channels),
          static_cast<double>(c.mlp_hidden),
          c.attention_branch ? 1.0 : 0.0,
          static_cast<double>(c.seed & 0xffffffffULL),
          static_cast<double>(c.seed >> 32)};
}

ModelConfig config_from_values(std::span<const double> v) {
  if (v.size() != 15) throw nn::CheckpointError("checkpoint config entry has wrong length");
  auto i = [&](std::size_t k) { return static_cast<int>(v[k]); };
  ModelConfig c;
  c.n_qubits = i(0);
  c.task = static_cast<Task>(i(1));
  c.num_classes = i(2);
  c.patch_size = i(3);
  c.embed_dim = i(4);
  c.heads = i(5);
  c.encoder_blocks = i(6);
  c.conv1_channels = i(7);
  c.conv2_channels = i(8);
  c.kernel_size = i(9);
  c.reduction_channels = i(10);
  c.mlp_hidden = i(11);
  c.attention_branch = v[12] != 0.0;
  c.seed = static_cast<std::uint64_t>(v[13]) | (static_cast<std::uint64_t>(v[14]) << 32);
  return c;
}

}  // namespace

const char* task_name(Task t) { return t == Task::Binary ? "binary" : "structure"; }

int expected_classes(Task task, int n_qubits) {
  return task == Task::Binary ? 2 : (1 << (n_qubits - 1));
}

ModelConfig default_config(int n, Task task) {
  if (n < 3 || n > 10) throw ConfigError("n_qubits: default model config needs 3..10, got " + std::to_string(n));
  static constexpr int kPatch[] = {2, 2, 4, 8, 16};  // n = 3..7
  ModelConfig c;
  c.n_qubits = n;
  c.task = task;
  c.num_classes = expected_classes(task, n);
  c.patch_size = n <= 7 ? kPatch[n - 3] : 16;
  return c;
}

int input_side(const ModelConfig& c) { return 1 << c.n_qubits; }

int reduction_stages(const ModelConfig& c) {
  int stages = 0;
  for (int side = input_side(c); side > kReducedSide; side /= 2) ++stages;
  return stages;
}

int map_side(const ModelConfig& c) { return std::min(input_side(c), kReducedSide); }

int map_channels(const ModelConfig& c) { return reduction_stages(c) > 0 ? c.reduction_channels : 2; }

int token_count(const ModelConfig& c) {
  const int g = map_side(c) / c.patch_size;
  return g * g;
}

int conv_feature_width(const ModelConfig& c) {
  const int s = map_side(c) - 2 * (c.kernel_size - 1);
  return c.conv2_channels * (s / 2) * (s / 2);
}

int feature_width(const ModelConfig& c) {
  return conv_feature_width(c) + (c.attention_branch ? c.embed_dim : 0);
}

void validate(const ModelConfig& c) {
  if (c.n_qubits < 2 || c.n_qubits > 10) throw ConfigError("n_qubits: model needs 2..10 qubits");
  if (c.num_classes != expected_classes(c.task, c.n_qubits)) {
    throw ConfigError("num_classes: " + std::string(task_name(c.task)) + " task with n=" +
                      std::to_string(c.n_qubits) + " needs " + std::to_string(expected_classes(c.task, c.n_qubits)) +
                      " classes, got " + std::to_string(c.num_classes));
  }
  if (c.kernel_size < 1) throw ConfigError("kernel_size must be >= 1");
  if (c.conv1_channels < 1 || c.conv2_channels < 1 || c.reduction_channels < 1) {
    throw ConfigError("conv channel counts must be >= 1");
  }
  if (c.mlp_hidden < 1) throw ConfigError("mlp_hidden must be >= 1");
  const int s = map_side(c) - 2 * (c.kernel_size - 1);
  if (s < 2 || s % 2 != 0) {
    throw ConfigError("kernel_size: conv branch output side " + std::to_string(s) + " cannot be max-pooled");
  }
  if (c.attention_branch) {
    if (c.patch_size < 1 || map_side(c) % c.patch_size != 0) {
      throw ConfigError("patch_size: " + std::to_string(c.patch_size) + " does not divide map side " +
                        std::to_string(map_side(c)));
    }
    if (c.embed_dim < 1 || c.heads < 1 || c.embed_dim % c.heads != 0) {
      throw ConfigError("heads: " + std::to_string(c.heads) + " must divide embed_dim " +
                        std::to_string(c.embed_dim));
    }
    if (c.encoder_blocks < 0) throw ConfigError("encoder_blocks must be >= 0");
  }
}

Tensor encode_input(const DensityMatrix& rho) {
  const int d = static_cast<int>(rho.dim());
  Tensor t({2, d, d});
  auto out = t.data();
  const std::size_t plane = static_cast<std::size_t>(d) * d;
  auto entries = rho.matrix().entries();
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = entries[i].real();
    out[plane + i] = entries[i].imag();
  }
  return t;
}

ComplexMatrix decode_input(const Tensor& encoded) {
  if (encoded.rank() != 3 || encoded.dim(0) != 2 || encoded.dim(1) != encoded.dim(2)) {
    throw nn::ShapeError("decode_input: expected [2,D,D], got " + nn::shape_str(encoded.shape()));
  }
  const std::size_t d = static_cast<std::size_t>(encoded.dim(1));
  ComplexMatrix m(d);
  auto in = encoded.data();
  for (std::size_t i = 0; i < d * d; ++i) m.entries()[i] = {in[i], in[d * d + i]};
  return m;
}

HybridModel::HybridModel(const ModelConfig& config) : config_(config) {
  validate(config_);
  Rng rng(config_.seed);
  const int k = config_.kernel_size;
  int channels = 2;
  for (int s = 0; s < reduction_stages(config_); ++s) {
    reduction_.push_back(make_conv(config_.reduction_channels, channels, 3, rng));
    channels = config_.reduction_channels;
  }
  conv1_ = make_conv(config_.conv1_channels, channels, k, rng);
  conv2_ = make_conv(config_.conv2_channels, config_.conv1_channels, k, rng);

  const int e = config_.embed_dim;
  if (config_.attention_branch) {
    const int p = config_.patch_size;
    patch_ = make_dense(channels * p * p, e, rng);
    position_ = zeros({token_count(config_), e});
    for (int b = 0; b < config_.encoder_blocks; ++b) {
      EncoderBlock blk;
      blk.norm1 = make_norm(e);
      DenseLayer q = make_dense(e, e, rng), kk = make_dense(e, e, rng), v = make_dense(e, e, rng),
                 o = make_dense(e, e, rng);
      blk.attention = {q.weight, q.bias, kk.weight, kk.bias, v.weight, v.bias, o.weight, o.bias};
      blk.norm2 = make_norm(e);
      blk.mlp1 = make_dense(e, 2 * e, rng);
      blk.mlp2 = make_dense(2 * e, e, rng);
      blocks_.push_back(std::move(blk));
    }
  }
  head1_ = make_dense(feature_width(config_), config_.mlp_hidden, rng);
  head2_ = make_dense(config_.mlp_hidden, config_.num_classes, rng);
}

Tensor HybridModel::trunk(const Tensor& input) const {
  const int side = input_side(config_);
  if (input.rank() != 3 || input.dim(0) != 2 || input.dim(1) != side || input.dim(2) != side) {
    throw nn::ShapeError("model input must be [2," + std::to_string(side) + "," + std::to_string(side) + "], got " +
                         nn::shape_str(input.shape()));
  }
  Tensor x = input;
  for (const ConvLayer& l : reduction_) x = conv_relu(x, l, {2, 1});

  Tensor conv = nn::maxpool2(conv_relu(conv_relu(x, conv1_), conv2_));
  Tensor feats = nn::flatten(conv);
  if (!config_.attention_branch) return feats;

  Tensor t = nn::pos_embed_add(nn::patch_embed(x, patch_.weight, patch_.bias, config_.patch_size), position_);
  for (const EncoderBlock& b : blocks_) {
    t = nn::add(t, nn::multihead_self_attention(nn::layer_norm(t, b.norm1.scale, b.norm1.shift), b.attention,
                                                config_.heads));
    Tensor h = nn::relu(nn::dense(nn::layer_norm(t, b.norm2.scale, b.norm2.shift), b.mlp1.weight, b.mlp1.bias));
    t = nn::add(t, nn::dense(h, b.mlp2.weight, b.mlp2.bias));
  }
  return nn::concat(feats, nn::mean_rows(t));
}

Tensor HybridModel::features(const Tensor& input) const { return trunk(input); }

Tensor HybridModel::forward(const Tensor& input) const {
  Tensor h = nn::relu(nn::dense(trunk(input), head1_.weight, head1_.bias));
  return nn::dense(h, head2_.weight, head2_.bias);
}

Tensor HybridModel::forward(std::span<const Tensor> batch) const {
  std::vector<Tensor> rows;
  rows.reserve(batch.size());
  for (const Tensor& x : batch) rows.push_back(forward(x));
  return nn::stack_rows(rows);
}

Tensor HybridModel::features(std::span<const Tensor> batch) const {
  std::vector<Tensor> rows;
  rows.reserve(batch.size());
  for (const Tensor& x : batch) rows.push_back(features(x));
  return nn::stack_rows(rows);
}

std::vector<nn::NamedTensor> HybridModel::named_parameters() const {
  std::vector<nn::NamedTensor> out;
  auto conv = [&](const std::string& name, const ConvLayer& l) {
    out.push_back({name + ".kernels", l.kernels});
    out.push_back({name + ".bias", l.bias});
  };
  auto dense = [&](const std::string& name, const Tensor& w, const Tensor& b) {
    out.push_back({name + ".weight", w});
    out.push_back({name + ".bias", b});
  };
  for (std::size_t s = 0; s < reduction_.size(); ++s) conv("reduce" + std::to_string(s), reduction_[s]);
  conv("conv1", conv1_);
  conv("conv2", conv2_);
  if (config_.attention_branch) {
    dense("patch", patch_.weight, patch_.bias);
    out.push_back({"position", position_});
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const std::string p = "block" + std::to_string(b);
      const EncoderBlock& blk = blocks_[b];
      out.push_back({p + ".norm1.scale", blk.norm1.scale});
      out.push_back({p + ".norm1.shift", blk.norm1.shift});
      dense(p + ".attn.q", blk.attention.wq, blk.attention.bq);
      dense(p + ".attn.k", blk.attention.wk, blk.attention.bk);
      dense(p + ".attn.v", blk.attention.wv, blk.attention.bv);
      dense(p + ".attn.out", blk.attention.wo, blk.attention.bo);
      out.push_back({p + ".norm2.scale", blk.norm2.scale});
      out.push_back({p + ".norm2.shift", blk.norm2.shift});
      dense(p + ".mlp1", blk.mlp1.weight, blk.mlp1.bias);
      dense(p + ".mlp2", blk.mlp2.weight, blk.mlp2.bias);
    }
  }
  dense("head1", head1_.weight, head1_.bias);
  dense("head2", head2_.weight, head2_.bias);
  return out;
}

std::vector<Tensor> HybridModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& nt : named_parameters()) out.push_back(nt.tensor);
  return out;
}

std::size_t HybridModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : parameters()) n += t.size();
  return n;
}

std::vector<std::vector<double>> HybridModel::snapshot() const {
  std::vector<std::vector<double>> out;
  for (const auto& t : parameters()) out.emplace_back(t.data().begin(), t.data().end());
  return out;
}

void HybridModel::restore(const std::vector<std::vector<double>>& values) {
  auto params = parameters();
  if (values.size() != params.size()) throw nn::ShapeError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].size() != params[i].size()) throw nn::ShapeError("restore: parameter size mismatch");
    std::copy(values[i].begin(), values[i].end(), params[i].data().begin());
  }
}

std::vector<std::uint8_t> HybridModel::encode() const {
  auto named = named_parameters();
  const auto cfg = config_values(config_);
  named.insert(named.begin(), {kConfigEntry, Tensor({static_cast<int>(cfg.size())}, cfg)});
  return nn::encode_checkpoint(named);
}

HybridModel HybridModel::decode(std::span<const std::uint8_t> bytes) {
  return from_entries(nn::decode_checkpoint(bytes));
}

HybridModel HybridModel::from_entries(const std::vector<nn::NamedTensor>& entries) {
  if (entries.empty() || entries.front().name != kConfigEntry) {
    throw nn::CheckpointError("checkpoint has no model config entry");
  }
  HybridModel model(config_from_values(entries.front().tensor.data()));
  std::map<std::string, const Tensor*> by_name;
  for (std::size_t i = 1; i < entries.size(); ++i) by_name[entries[i].name] = &entries[i].tensor;
  auto params = model.named_parameters();
  if (by_name.size() != params.size()) throw nn::CheckpointError("checkpoint parameter count does not match model");
  for (auto& [name, t] : params) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw nn::CheckpointError("checkpoint is missing parameter " + name);
    if (it->second->shape() != t.shape()) throw nn::CheckpointError("checkpoint shape mismatch for " + name);
    std::copy(it->second->data().begin(), it->second->data().end(), t.data().begin());
  }
  return model;
}

void HybridModel::save(const std::string& path) const {
  auto named = named_parameters();
  const auto cfg = config_values(config_);
  named.insert(named.begin(), {kConfigEntry, Tensor({static_cast<int>(cfg.size())}, cfg)});
  nn::save_checkpoint(path, named);
}

HybridModel HybridModel::load(const std::string& path) { return from_entries(nn::load_checkpoint(path)); }

}  // namespace qent
