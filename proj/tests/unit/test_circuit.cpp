#include <doctest.h>

#include <cmath>

#include "qent/circuit.hpp"
#include "qent/rng.hpp"

using namespace qent;

TEST_CASE("single Hadamard") {
  const StateVector s = simulate({1, {Gate::h(0)}});
  CHECK(std::abs(s[0] - Complex(1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(s[1] - Complex(1.0 / std::sqrt(2.0))) < 1e-15);
}

TEST_CASE("GHZ chain reproduces the GHZ state") {
  const Circuit c{3, {Gate::h(0), Gate::cnot(0, 1), Gate::cnot(1, 2)}};
  CHECK(std::abs(fidelity(ghz_state(3), to_density(simulate(c))) - 1.0) < 1e-10);
  for (int n = 2; n <= 10; ++n) {
    CHECK(std::abs(fidelity(ghz_state(n), to_density(simulate(ghz_circuit(n)))) - 1.0) < 1e-10);
  }
}

TEST_CASE("W circuit reproduces the W state") {
  const auto a = w_circuit_angles(3);
  REQUIRE(a.size() == 2);
  // cos(theta/2) = 1/sqrt(n - k)
  CHECK(std::abs(std::cos(a[0] / 2) - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(a[0] - 1.9106332362490186) < 1e-12);
  CHECK(std::abs(a[1] - M_PI / 2) < 1e-12);
  for (int n = 2; n <= 6; ++n) {
    const StateVector s = simulate(w_circuit(n));
    CHECK(std::abs(fidelity(w_state(n), to_density(s)) - 1.0) < 1e-10);
  }
}

TEST_CASE("controlled rotation acts only on control = 1") {
  // RY(t/2), CZ, RY(-t/2), CZ with the control left in |0> is the identity.
  const double t = 0.83;
  const Circuit c{2, {Gate::ry(1, t / 2), Gate::cz(0, 1), Gate::ry(1, -t / 2), Gate::cz(0, 1)}};
  const StateVector s = simulate(c);
  CHECK(std::abs(s[0] - Complex(1.0)) < 1e-15);
}

TEST_CASE("simulate preserves the norm") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 6));
    Circuit c{n, {}};
    for (int g = 0; g < 40; ++g) {
      const int a = static_cast<int>(rng.uniform_int(0, n - 1));
      int b = static_cast<int>(rng.uniform_int(0, n - 2));
      if (b >= a) ++b;
      switch (rng.uniform_int(0, 3)) {
        case 0: c.gates.push_back(Gate::h(a)); break;
        case 1: c.gates.push_back(Gate::ry(a, rng.uniform(-M_PI, M_PI))); break;
        case 2: c.gates.push_back(Gate::cnot(a, b)); break;
        default: c.gates.push_back(Gate::cz(a, b)); break;
      }
    }
    CHECK(std::abs(simulate(c).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("invalid gates are rejected") {
  CHECK_THROWS_AS(simulate({2, {Gate::h(2)}}), StateError);
  CHECK_THROWS_AS(simulate({2, {Gate::cnot(1, 1)}}), StateError);
  CHECK_THROWS_AS(simulate({2, {Gate::cz(0, -1)}}), StateError);
  CHECK_THROWS_AS(ghz_circuit(1), StateError);
}
