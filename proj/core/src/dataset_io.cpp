#include "qent/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "binary_io.hpp"

namespace qent {

namespace io {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetErrorKind::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError(DatasetErrorKind::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError(DatasetErrorKind::Io, "write failed for " + path);
}

}  // namespace io

namespace {

constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 8;
constexpr std::size_t kRecordMetaSize = 4 + 1 + 8 + 8;

}  // namespace

std::size_t record_size(int n_qubits) {
  const std::size_t d = std::size_t{1} << n_qubits;
  return kRecordMetaSize + d * d * 16;
}

std::vector<std::uint8_t> encode_dataset(int n_qubits, std::span<const SampleRecord> records) {
  if (n_qubits < 1 || n_qubits > 10) throw ConfigError("dataset n_qubits must be in 1..10");
  io::ByteWriter w;
  w.buffer().reserve(kHeaderSize + records.size() * record_size(n_qubits) + 4);
  w.bytes({kDatasetMagic, 4});
  w.u16(kDatasetVersion);
  w.u8(static_cast<std::uint8_t>(n_qubits));
  w.u64(records.size());
  for (const auto& r : records) {
    if (r.n_qubits() != n_qubits) throw ConfigError("record qubit count differs from dataset");
    w.u32(r.structure_label);
    w.u8(static_cast<std::uint8_t>(r.klass));
    w.f64(r.noise_p ? *r.noise_p : std::numeric_limits<double>::quiet_NaN());
    w.u64(r.seed);
    for (const Complex& v : r.rho.matrix().entries()) {
      w.f64(v.real());
      w.f64(v.imag());
    }
  }
  const auto payload = std::span<const std::uint8_t>(w.buffer()).subspan(kHeaderSize);
  w.u32(io::crc32_of(payload));
  return std::move(w.buffer());
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (bytes.size() < 4 || r.bytes(4) != std::string(kDatasetMagic, 4)) {
    throw DatasetError(DatasetErrorKind::BadMagic, "not a QEDS dataset (bad magic)", 0);
  }
  if (bytes.size() < kHeaderSize) {
    throw DatasetError(DatasetErrorKind::Truncated, "truncated header at byte offset " +
                       std::to_string(bytes.size()), bytes.size());
  }
  const std::uint16_t version = r.u16();
  if (version != kDatasetVersion) {
    throw DatasetError(DatasetErrorKind::VersionMismatch,
                       "unsupported dataset version " + std::to_string(version), 4);
  }
  Dataset ds;
  ds.n_qubits = r.u8();
  if (ds.n_qubits < 1 || ds.n_qubits > 10) {
    throw DatasetError(DatasetErrorKind::Malformed, "n_qubits out of range in header", 6);
  }
  const std::uint64_t count = r.u64();
  const std::size_t rec_size = record_size(ds.n_qubits);
  const std::size_t dim = std::size_t{1} << ds.n_qubits;

  ds.records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, r.remaining() / rec_size)));
  for (std::uint64_t i = 0; i < count; ++i) {
    if (r.remaining() < rec_size) {
      throw DatasetError(DatasetErrorKind::Truncated,
                         "truncated payload at byte offset " + std::to_string(r.offset()) + ": record " +
                             std::to_string(i) + " of " + std::to_string(count) + " needs " +
                             std::to_string(rec_size) + " bytes, " + std::to_string(r.remaining()) +
                             " left",
                         r.offset());
    }
    const std::size_t rec_offset = r.offset();
    SampleRecord rec;
    rec.structure_label = r.u32();
    const std::uint8_t klass = r.u8();
    const double noise = r.f64();
    rec.seed = r.u64();
    if (klass > 1) {
      throw DatasetError(DatasetErrorKind::Malformed, "bad class byte in record " + std::to_string(i), rec_offset);
    }
    if (rec.structure_label >= (std::uint32_t{1} << (ds.n_qubits - 1))) {
      throw DatasetError(DatasetErrorKind::Malformed, "structure label out of range in record " + std::to_string(i),
                         rec_offset);
    }
    rec.klass = static_cast<Klass>(klass);
    if (!std::isnan(noise)) rec.noise_p = noise;
    std::vector<Complex> entries(dim * dim);
    for (auto& v : entries) {
      const double re = r.f64();
      const double im = r.f64();
      v = {re, im};
    }
    try {
      rec.rho = DensityMatrix(ds.n_qubits, ComplexMatrix(dim, std::move(entries)));
    } catch (const StateError& e) {
      throw DatasetError(DatasetErrorKind::Malformed,
                         "record " + std::to_string(i) + " is not a density matrix: " + e.what(), rec_offset);
    }
    ds.records.push_back(std::move(rec));
  }
  if (r.remaining() < 4) {
    throw DatasetError(DatasetErrorKind::Truncated,
                       "truncated checksum at byte offset " + std::to_string(r.offset()), r.offset());
  }
  const std::size_t payload_end = r.offset();
  const std::uint32_t stored = r.u32();
  const std::uint32_t actual = io::crc32_of(bytes.subspan(kHeaderSize, payload_end - kHeaderSize));
  if (stored != actual) {
    throw DatasetError(DatasetErrorKind::ChecksumMismatch, "dataset checksum mismatch", payload_end);
  }
  if (r.remaining() != 0) {
    throw DatasetError(DatasetErrorKind::Malformed,
                       "trailing bytes after checksum at byte offset " + std::to_string(r.offset()), r.offset());
  }
  return ds;
}

void write_dataset(const std::string& path, int n_qubits, std::span<const SampleRecord> records) {
  io::write_file(path, encode_dataset(n_qubits, records));
}

Dataset read_dataset(const std::string& path) { return decode_dataset(io::read_file(path)); }

std::string manifest_path(const std::string& dataset_path) { return dataset_path + ".manifest"; }

std::string manifest_text(const GenConfig& c, std::size_t record_count) {
  std::ostringstream os;
  os << "format=QEDS\n"
     << "version=" << kDatasetVersion << "\n"
     << "n_qubits=" << c.n_qubits << "\n"
     << "samples_per_cell=" << c.samples_per_cell << "\n"
     << "mixture_min=" << c.mixture_min << "\n"
     << "mixture_max=" << c.mixture_max << "\n"
     << "noise=" << (c.noise_enabled ? "on" : "off") << "\n";
  if (c.noise_enabled) {
    os.precision(17);
    os << "noise_min=" << c.noise_min << "\n"
       << "noise_max=" << c.noise_max << "\n";
  }
  os << "min_depth=" << c.min_depth << "\n"
     << "local_unitaries=" << (c.local_unitaries ? "on" : "off") << "\n"
     << "master_seed=" << c.master_seed << "\n"
     << "record_count=" << record_count << "\n";
  return os.str();
}

void write_manifest(const std::string& dataset_path, const GenConfig& config, std::size_t record_count) {
  const std::string text = manifest_text(config, record_count);
  io::write_file(manifest_path(dataset_path),
                 std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace qent
