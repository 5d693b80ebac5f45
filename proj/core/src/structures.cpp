#include "qent/structures.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>

namespace qent {

namespace {

void check_n(int n) {
  if (n < 1 || n > kMaxStructureQubits) {
    throw StructureError("particle count must be in 1.." + std::to_string(kMaxStructureQubits) +
                         ", got " + std::to_string(n));
  }
}

}  // namespace

void validate(const Composition& c) {
  check_n(c.n);
  int total = 0;
  for (int b : c.blocks) {
    if (b < 1) throw StructureError("composition block sizes must be positive");
    total += b;
  }
  if (total != c.n) throw StructureError("composition blocks do not sum to n");
}

std::uint32_t label_count(int n) {
  check_n(n);
  return std::uint32_t{1} << (n - 1);
}

std::vector<Composition> enumerate_compositions(int n) {
  const std::uint32_t count = label_count(n);
  std::vector<Composition> out;
  out.reserve(count);
  for (std::uint32_t label = 0; label < count; ++label) out.push_back(composition_of(label, n));
  return out;
}

std::uint32_t label_of(const Composition& c) {
  validate(c);
  std::uint32_t mask = 0;
  int pos = 0;
  for (std::size_t i = 0; i + 1 < c.blocks.size(); ++i) {
    pos += c.blocks[i];
    mask |= std::uint32_t{1} << (pos - 1);
  }
  return mask;
}

Composition composition_of(std::uint32_t label, int n) {
  if (label >= label_count(n)) {
    throw StructureError("label " + std::to_string(label) + " out of range for n=" + std::to_string(n));
  }
  Composition c{n, {}};
  int run = 1;
  for (int i = 0; i + 1 < n; ++i) {
    if (label & (std::uint32_t{1} << i)) {
      c.blocks.push_back(run);
      run = 1;
    } else {
      ++run;
    }
  }
  c.blocks.push_back(run);
  return c;
}

YoungDiagram young_of(const Composition& c) {
  validate(c);
  YoungDiagram y{c.blocks};
  std::sort(y.parts.begin(), y.parts.end(), std::greater<>());
  return y;
}

StructureMeta meta_of(const Composition& c) {
  validate(c);
  StructureMeta m;
  m.w = *std::max_element(c.blocks.begin(), c.blocks.end());
  m.h = static_cast<int>(c.blocks.size());
  m.is_gme = m.h == 1;
  m.is_fully_separable = m.w == 1;
  return m;
}

std::uint64_t count_partitions(int n) {
  if (n < 1) throw StructureError("partition count needs n >= 1");
  // ways[s]: partitions of s using parts up to the current size.
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(n) + 1, 0);
  ways[0] = 1;
  for (int part = 1; part <= n; ++part)
    for (int s = part; s <= n; ++s) ways[s] += ways[s - part];
  return ways[n];
}

std::vector<int> block_offsets(const Composition& c) {
  std::vector<int> off{0};
  for (int b : c.blocks) off.push_back(off.back() + b);
  return off;
}

}  // namespace qent
