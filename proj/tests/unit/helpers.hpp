#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "qent/qstate.hpp"
#include "qent/rng.hpp"

namespace testing {

using qent::Complex;
using qent::ComplexMatrix;

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  const auto d = static_cast<Eigen::Index>(m.dim());
  Eigen::MatrixXcd e(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) e(r, c) = m(r, c);
  return e;
}

// Reference spectrum from Eigen's self-adjoint solver, ascending.
inline std::vector<double> oracle_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(m), Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t d, qent::Rng& rng) {
  ComplexMatrix m(d);
  for (std::size_t r = 0; r < d; ++r) {
    m(r, r) = rng.normal();
    for (std::size_t c = r + 1; c < d; ++c) {
      m(r, c) = Complex(rng.normal(), rng.normal());
      m(c, r) = std::conj(m(r, c));
    }
  }
  return m;
}

}  // namespace testing
