#pragma once

// Binary dataset files ("QEDS"), little-endian:
//
//   magic "QEDS" | u16 version = 1 | u8 n_qubits | u64 record count
//   per record:  u32 structure label | u8 klass (0 GHZ, 1 W)
//                f64 noise p (NaN when no noise) | u64 record seed
//                4^n complex entries, row-major, as (re f64, im f64)
//   u32 CRC-32 of every record byte (header and trailer excluded)
//
// A plain-text key=value manifest sits next to the file as <path>.manifest.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qent/datagen.hpp"

namespace qent {

inline constexpr char kDatasetMagic[4] = {'Q', 'E', 'D', 'S'};
inline constexpr std::uint16_t kDatasetVersion = 1;

enum class DatasetErrorKind { Io, BadMagic, VersionMismatch, Truncated, ChecksumMismatch, Malformed };

class DatasetError : public std::runtime_error {
 public:
  DatasetError(DatasetErrorKind kind, const std::string& what, std::size_t offset = 0)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  DatasetErrorKind kind() const { return kind_; }
  // Byte offset where decoding failed, when meaningful.
  std::size_t offset() const { return offset_; }

 private:
  DatasetErrorKind kind_;
  std::size_t offset_;
};

struct Dataset {
  int n_qubits = 0;
  std::vector<SampleRecord> records;
};

std::size_t record_size(int n_qubits);

std::vector<std::uint8_t> encode_dataset(int n_qubits, std::span<const SampleRecord> records);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset(const std::string& path, int n_qubits, std::span<const SampleRecord> records);
Dataset read_dataset(const std::string& path);

std::string manifest_path(const std::string& dataset_path);
std::string manifest_text(const GenConfig& config, std::size_t record_count);
void write_manifest(const std::string& dataset_path, const GenConfig& config, std::size_t record_count);

}  // namespace qent
