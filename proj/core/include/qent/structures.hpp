#pragma once

// Entanglement structures of n particles on a line.
//
// A structure is a composition of n: an ordered list of contiguous blocks.
// It is identified by the (n-1)-bit cut mask whose bit i is set when there is
// a cut between qubit i and qubit i+1. That mask is the class label used
// throughout datasets, models and checkpoints.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qent {

inline constexpr int kMaxStructureQubits = 16;

class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Composition {
  int n = 0;
  std::vector<int> blocks;

  friend bool operator==(const Composition&, const Composition&) = default;
};

struct YoungDiagram {
  std::vector<int> parts;  // non-increasing

  friend bool operator==(const YoungDiagram&, const YoungDiagram&) = default;
  friend auto operator<=>(const YoungDiagram&, const YoungDiagram&) = default;
};

struct StructureMeta {
  int w = 0;  // entanglement depth: largest block
  int h = 0;  // number of subsystems
  bool is_gme = false;
  bool is_fully_separable = false;
};

// Throws StructureError if blocks are non-positive or do not sum to n.
void validate(const Composition& c);

std::uint32_t label_count(int n);
std::vector<Composition> enumerate_compositions(int n);

std::uint32_t label_of(const Composition& c);
Composition composition_of(std::uint32_t label, int n);

YoungDiagram young_of(const Composition& c);
StructureMeta meta_of(const Composition& c);

// Number of unordered integer partitions p(n).
std::uint64_t count_partitions(int n);

// First qubit index of every block, plus n at the end.
std::vector<int> block_offsets(const Composition& c);

}  // namespace qent
