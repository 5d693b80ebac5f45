#include "qent/circuit.hpp"

#include <cmath>
#include <string>

namespace qent {

namespace {

std::size_t bit_of(int q, int n) { return std::size_t{1} << (n - 1 - q); }

void apply_1q(std::vector<Complex>& amp, int q, int n, const Complex u[2][2]) {
  const std::size_t bit = bit_of(q, n);
  for (std::size_t i = 0; i < amp.size(); ++i) {
    if (i & bit) continue;
    const Complex a0 = amp[i];
    const Complex a1 = amp[i | bit];
    amp[i] = u[0][0] * a0 + u[0][1] * a1;
    amp[i | bit] = u[1][0] * a0 + u[1][1] * a1;
  }
}

}  // namespace

void validate(const Circuit& circuit) {
  if (circuit.n_qubits < 1) throw StateError("circuit needs at least one qubit");
  for (std::size_t g = 0; g < circuit.gates.size(); ++g) {
    const Gate& gate = circuit.gates[g];
    auto bad = [&](const std::string& why) {
      throw StateError("gate " + std::to_string(g) + ": " + why);
    };
    if (gate.a < 0 || gate.a >= circuit.n_qubits) bad("qubit index out of range");
    const bool two_qubit = gate.kind == GateKind::CNOT || gate.kind == GateKind::CZ;
    if (two_qubit) {
      if (gate.b < 0 || gate.b >= circuit.n_qubits) bad("second qubit index out of range");
      if (gate.a == gate.b) bad("two-qubit gate on a single qubit");
    }
  }
}

StateVector simulate(const Circuit& circuit) {
  validate(circuit);
  const int n = circuit.n_qubits;
  std::vector<Complex> amp(std::size_t{1} << n);
  amp[0] = 1.0;

  for (const Gate& g : circuit.gates) {
    switch (g.kind) {
      case GateKind::H: {
        const Complex u[2][2] = {{M_SQRT1_2, M_SQRT1_2}, {M_SQRT1_2, -M_SQRT1_2}};
        apply_1q(amp, g.a, n, u);
        break;
      }
      case GateKind::RY: {
        const double c = std::cos(g.theta / 2);
        const double s = std::sin(g.theta / 2);
        const Complex u[2][2] = {{c, -s}, {s, c}};
        apply_1q(amp, g.a, n, u);
        break;
      }
      case GateKind::CNOT: {
        const std::size_t cb = bit_of(g.a, n);
        const std::size_t tb = bit_of(g.b, n);
        for (std::size_t i = 0; i < amp.size(); ++i)
          if ((i & cb) && !(i & tb)) std::swap(amp[i], amp[i | tb]);
        break;
      }
      case GateKind::CZ: {
        const std::size_t ab = bit_of(g.a, n);
        const std::size_t bb = bit_of(g.b, n);
        for (std::size_t i = 0; i < amp.size(); ++i)
          if ((i & ab) && (i & bb)) amp[i] = -amp[i];
        break;
      }
    }
  }
  return {n, std::move(amp)};
}

Circuit ghz_circuit(int n) {
  if (n < 2) throw StateError("GHZ circuit needs at least 2 qubits");
  Circuit c{n, {Gate::h(0)}};
  for (int q = 0; q + 1 < n; ++q) c.gates.push_back(Gate::cnot(q, q + 1));
  return c;
}

std::vector<double> w_circuit_angles(int n) {
  if (n < 2) throw StateError("W circuit needs at least 2 qubits");
  std::vector<double> angles;
  for (int k = 0; k + 1 < n; ++k) {
    angles.push_back(2.0 * std::acos(1.0 / std::sqrt(static_cast<double>(n - k))));
  }
  return angles;
}

Circuit w_circuit(int n) {
  const auto angles = w_circuit_angles(n);
  Circuit c{n, {Gate::ry(0, M_PI)}};
  for (int k = 0; k + 1 < n; ++k) {
    const double t = angles[static_cast<std::size_t>(k)];
    c.gates.push_back(Gate::ry(k + 1, t / 2));
    c.gates.push_back(Gate::cz(k, k + 1));
    c.gates.push_back(Gate::ry(k + 1, -t / 2));
    c.gates.push_back(Gate::cz(k, k + 1));
    c.gates.push_back(Gate::cnot(k + 1, k));
  }
  return c;
}

}  // namespace qent
