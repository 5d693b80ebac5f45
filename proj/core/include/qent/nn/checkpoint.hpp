#pragma once

// Parameter checkpoints ("QENN"), little-endian:
//
//   magic "QENN" | u16 version = 1 | u32 tensor count
//   per tensor: u16 name length | name bytes | u8 rank | u32 extent x rank
//               | f64 values, row-major
//   u32 CRC-32 of every preceding byte

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qent/nn/tensor.hpp"

namespace qent::nn {

inline constexpr std::uint16_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

std::vector<std::uint8_t> encode_checkpoint(std::span<const NamedTensor> tensors);
// Returned tensors are fresh leaves without gradient buffers.
std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::string& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

}  // namespace qent::nn
