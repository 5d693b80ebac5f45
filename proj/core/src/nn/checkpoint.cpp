#include "qent/nn/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "binary_io.hpp"

namespace qent::nn {

namespace {

void need(const io::ByteReader& r, std::size_t n, const char* what) {
  if (r.remaining() < n) {
    throw CheckpointError(std::string("truncated checkpoint while reading ") + what + " at byte offset " +
                          std::to_string(r.offset()));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(std::span<const NamedTensor> tensors) {
  io::ByteWriter w;
  w.bytes("QENN");
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > 0xffff) throw CheckpointError("tensor name too long: " + name);
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (int e : t.shape()) w.u32(static_cast<std::uint32_t>(e));
    for (double v : t.data()) w.f64(v);
  }
  w.u32(io::crc32_of(w.buffer()));
  return std::move(w.buffer());
}

std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (bytes.size() < 4 || r.bytes(4) != "QENN") throw CheckpointError("not a QENN checkpoint (bad magic)");
  need(r, 6, "header");
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    need(r, 2, "name length");
    const std::uint16_t len = r.u16();
    need(r, len + 1u, "name");
    NamedTensor nt;
    nt.name = r.bytes(len);
    const int rank = r.u8();
    need(r, 4u * rank, "extents");
    Shape shape;
    for (int k = 0; k < rank; ++k) shape.push_back(static_cast<int>(r.u32()));
    std::size_t n = 0;
    try {
      n = shape_size(shape);
    } catch (const ShapeError& e) {
      throw CheckpointError("bad extents for tensor " + nt.name);
    }
    need(r, 8 * n, "tensor values");
    std::vector<double> values(n);
    for (double& v : values) v = r.f64();
    nt.tensor = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(nt));
  }
  need(r, 4, "checksum");
  const std::size_t end = r.offset();
  const std::uint32_t stored = r.u32();
  if (stored != io::crc32_of(bytes.subspan(0, end))) throw CheckpointError("checkpoint checksum mismatch");
  if (r.remaining() != 0) throw CheckpointError("trailing bytes after checkpoint checksum");
  return out;
}

void save_checkpoint(const std::string& path, std::span<const NamedTensor> tensors) {
  const auto bytes = encode_checkpoint(tensors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace qent::nn
