#pragma once

#include <vector>

#include "qent/qstate.hpp"

namespace qent {

enum class GateKind { H, RY, CNOT, CZ };

struct Gate {
  GateKind kind = GateKind::H;
  // H, RY: a is the target. CNOT: a = control, b = target. CZ: symmetric.
  int a = 0;
  int b = -1;
  double theta = 0.0;  // RY angle in radians

  static Gate h(int q) { return {GateKind::H, q, -1, 0.0}; }
  static Gate ry(int q, double theta) { return {GateKind::RY, q, -1, theta}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, control, target, 0.0}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, a, b, 0.0}; }
};

struct Circuit {
  int n_qubits = 1;
  std::vector<Gate> gates;
};

// Throws StateError naming the first gate whose indices are invalid.
void validate(const Circuit& circuit);

// Applies the gates in order to |0...0>.
StateVector simulate(const Circuit& circuit);

// H on qubit 0 followed by the CNOT chain 0->1, 1->2, ...
Circuit ghz_circuit(int n);

// Linear W-state cascade built from RY and CZ/CNOT.
//
//   RY(pi) on q0 puts the excitation on qubit 0. For k = 0 .. n-2 a
//   controlled-RY(theta_k) from q_k onto q_{k+1} moves all but 1/sqrt(n-k)
//   of the remaining amplitude forward, then CNOT(q_{k+1}, q_k) clears q_k
//   on that branch. theta_k = 2 acos(1/sqrt(n-k)), so for n = 3 the angles
//   are 2 acos(1/sqrt 3) ~= 1.910633 and 2 acos(1/sqrt 2) = pi/2.
//   Each controlled-RY(t) is RY(t/2) . CZ . RY(-t/2) . CZ on the target,
//   since Z RY(x) Z = RY(-x).
Circuit w_circuit(int n);

// Angles theta_k of w_circuit(n), in application order.
std::vector<double> w_circuit_angles(int n);

}  // namespace qent
