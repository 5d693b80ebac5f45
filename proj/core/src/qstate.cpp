#include "qent/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qent {

namespace {

std::size_t dim_for(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 30) {
    throw StateError("qubit count out of range: " + std::to_string(n_qubits));
  }
  return std::size_t{1} << n_qubits;
}

// Bit of qubit q inside a basis index of an n-qubit register.
std::size_t qubit_mask(int q, int n_qubits) {
  return std::size_t{1} << (n_qubits - 1 - q);
}

// Eigenvalues (unsorted) of a real symmetric matrix, cyclic Jacobi.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t m) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * m + c]; };

  double frob = 0.0;
  for (double v : a) frob += v * v;
  const double stop = frob * 1e-30;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) off += at(p, q) * at(p, q);
    if (off <= stop) break;

    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(m);
  for (std::size_t i = 0; i < m; ++i) eig[i] = at(i, i);
  return eig;
}

std::vector<double> embedded_eigenvalues(const ComplexMatrix& h) {
  if (h.dim() == 0) throw StateError("empty matrix");
  if (h.hermiticity_error() > kEigenTol) {
    throw StateError("matrix is not Hermitian (error " + std::to_string(h.hermiticity_error()) + ")");
  }
  const std::size_t d = h.dim();
  const std::size_t m = 2 * d;
  std::vector<double> s(m * m);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      // Symmetrize so rounding in the input cannot break the solver.
      const Complex v = 0.5 * (h(r, c) + std::conj(h(c, r)));
      s[r * m + c] = v.real();
      s[(r + d) * m + (c + d)] = v.real();
      s[r * m + (c + d)] = -v.imag();
      s[(r + d) * m + c] = v.imag();
    }
  }
  auto eig = jacobi_eigenvalues(std::move(s), m);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim) {
  if (dim == 0) throw StateError("matrix dimension must be positive");
}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (dim == 0) throw StateError("matrix dimension must be positive");
  if (entries_.size() != dim * dim) {
    throw StateError("entry count " + std::to_string(entries_.size()) + " != dim^2");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::hermiticity_error() const {
  double err = 0.0;
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = r; c < dim_; ++c)
      err = std::max(err, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  return err;
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != dim_for(n_qubits)) {
    throw StateError("state of " + std::to_string(n_qubits) + " qubits needs " +
                     std::to_string(dim_for(n_qubits)) + " amplitudes");
  }
  const double nrm = norm();
  if (std::abs(nrm * nrm - 1.0) > kConstructionTol) {
    throw StateError("state vector is not normalized (norm^2 = " + std::to_string(nrm * nrm) + ")");
  }
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes_) s += std::norm(a);
  return std::sqrt(s);
}

DensityMatrix::DensityMatrix(int n_qubits, ComplexMatrix matrix)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
  if (matrix_.dim() != dim_for(n_qubits)) {
    throw StateError("density matrix dimension does not match qubit count");
  }
  if (matrix_.hermiticity_error() > kInvariantTol) {
    throw StateError("density matrix is not Hermitian");
  }
  if (std::abs(matrix_.trace() - 1.0) > kInvariantTol) {
    throw StateError("density matrix trace is not 1");
  }
}

InvariantReport check_invariants(const DensityMatrix& rho) {
  InvariantReport r;
  r.hermiticity_error = rho.matrix().hermiticity_error();
  r.trace_error = std::abs(rho.matrix().trace() - 1.0);
  r.min_eigenvalue = min_eigenvalue_hermitian(rho.matrix());
  return r;
}

StateVector ghz_state(int n) {
  if (n < 2) throw StateError("GHZ state needs at least 2 qubits");
  std::vector<Complex> amp(dim_for(n));
  amp.front() = M_SQRT1_2;
  amp.back() = M_SQRT1_2;
  return {n, std::move(amp)};
}

StateVector w_state(int n) {
  if (n < 2) throw StateError("W state needs at least 2 qubits");
  std::vector<Complex> amp(dim_for(n));
  const double a = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) amp[std::size_t{1} << k] = a;
  return {n, std::move(amp)};
}

StateVector bell_state(int index) {
  const double a = M_SQRT1_2;
  switch (index) {
    case 0: return {2, {a, 0.0, 0.0, a}};
    case 1: return {2, {a, 0.0, 0.0, -a}};
    case 2: return {2, {0.0, a, a, 0.0}};
    case 3: return {2, {0.0, a, -a, 0.0}};
    default: throw StateError("Bell index must be 0..3, got " + std::to_string(index));
  }
}

StateVector zero_state(int n) {
  std::vector<Complex> amp(dim_for(n));
  amp[0] = 1.0;
  return {n, std::move(amp)};
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
  std::vector<Complex> amp(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) amp[i * b.dim() + j] = a[i] * b[j];
  return {a.n_qubits() + b.n_qubits(), std::move(amp)};
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  ComplexMatrix out(da * db);
  for (std::size_t ar = 0; ar < da; ++ar)
    for (std::size_t ac = 0; ac < da; ++ac) {
      const Complex s = a(ar, ac);
      if (s == Complex{}) continue;
      for (std::size_t br = 0; br < db; ++br)
        for (std::size_t bc = 0; bc < db; ++bc) out(ar * db + br, ac * db + bc) = s * b(br, bc);
    }
  return out;
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  return {a.n_qubits() + b.n_qubits(), kron(a.matrix(), b.matrix())};
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw StateError("inner product of states with different dimensions");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

DensityMatrix to_density(const StateVector& psi) {
  const double nrm = psi.norm();
  if (std::abs(nrm * nrm - 1.0) > kEigenTol) throw StateError("to_density needs a normalized state");
  const std::size_t d = psi.dim();
  ComplexMatrix m(d);
  for (std::size_t r = 0; r < d; ++r) {
    if (psi[r] == Complex{}) continue;
    for (std::size_t c = 0; c < d; ++c) m(r, c) = psi[r] * std::conj(psi[c]);
  }
  return {psi.n_qubits(), std::move(m)};
}

DensityMatrix maximally_mixed(int n) {
  const std::size_t d = dim_for(n);
  ComplexMatrix m(d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0 / static_cast<double>(d);
  return {n, std::move(m)};
}

DensityMatrix mix(std::span<const double> weights, std::span<const DensityMatrix> states) {
  if (weights.empty() || weights.size() != states.size()) {
    throw StateError("mix needs one weight per state");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw StateError("mixture weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > kConstructionTol) {
    throw StateError("mixture weights sum to " + std::to_string(total) + ", not 1");
  }
  const int n = states.front().n_qubits();
  const std::size_t d = states.front().dim();
  ComplexMatrix m(d);
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].dim() != d) throw StateError("mix over states of different dimensions");
    auto src = states[k].matrix().entries();
    auto dst = m.entries();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weights[k] * src[i];
  }
  return {n, std::move(m)};
}

DensityMatrix depolarize(const DensityMatrix& rho, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw StateError("noise parameter p must lie in [0, 1]");
  const std::size_t d = rho.dim();
  ComplexMatrix m = rho.matrix();
  for (auto& v : m.entries()) v *= p;
  const double floor = (1.0 - p) / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) += floor;
  return {rho.n_qubits(), std::move(m)};
}

DensityMatrix white_noise(const StateVector& psi, double p) {
  return depolarize(to_density(psi), p);
}

double fidelity(const StateVector& psi, const DensityMatrix& rho) {
  if (psi.dim() != rho.dim()) throw StateError("fidelity of objects with different dimensions");
  const std::size_t d = psi.dim();
  Complex s = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    if (psi[r] == Complex{}) continue;
    Complex row = 0.0;
    for (std::size_t c = 0; c < d; ++c) row += rho(r, c) * psi[c];
    s += std::conj(psi[r]) * row;
  }
  return std::clamp(s.real(), 0.0, 1.0);
}

double noise_for_fidelity(double target_fidelity, int n) {
  const double floor = 1.0 / static_cast<double>(dim_for(n));
  if (!(target_fidelity >= floor && target_fidelity <= 1.0)) {
    throw StateError("target fidelity must lie in [2^-n, 1]");
  }
  return (target_fidelity - floor) / (1.0 - floor);
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, int n_qubits, std::span<const int> subset) {
  if (m.dim() != dim_for(n_qubits)) throw StateError("matrix dimension does not match qubit count");
  std::size_t mask = 0;
  for (int q : subset) {
    if (q < 0 || q >= n_qubits) throw StateError("partial transpose qubit out of range");
    mask |= qubit_mask(q, n_qubits);
  }
  const std::size_t full = m.dim() - 1;
  if (subset.empty() || mask == 0 || mask == full) {
    throw StateError("partial transpose subset must be non-empty and proper");
  }
  const std::size_t d = m.dim();
  ComplexMatrix out(d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const std::size_t r2 = (r & ~mask) | (c & mask);
      const std::size_t c2 = (c & ~mask) | (r & mask);
      out(r2, c2) = m(r, c);
    }
  return out;
}

ComplexMatrix partial_transpose(const DensityMatrix& rho, std::span<const int> subset) {
  return partial_transpose(rho.matrix(), rho.n_qubits(), subset);
}

std::vector<int> cut_subset(int cut) {
  std::vector<int> s(static_cast<std::size_t>(cut) + 1);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

double min_eigenvalue_hermitian(const ComplexMatrix& m) {
  return embedded_eigenvalues(m).front();
}

std::vector<double> eigenvalues_hermitian(const ComplexMatrix& m) {
  auto doubled = embedded_eigenvalues(m);
  std::vector<double> eig;
  eig.reserve(m.dim());
  for (std::size_t i = 0; i < doubled.size(); i += 2) eig.push_back(0.5 * (doubled[i] + doubled[i + 1]));
  return eig;
}

ComplexMatrix reduced_single_qubit(const DensityMatrix& rho, int keep) {
  const int n = rho.n_qubits();
  if (keep < 0 || keep >= n) throw StateError("qubit index out of range");
  const std::size_t bit = qubit_mask(keep, n);
  ComplexMatrix out(2);
  for (std::size_t r = 0; r < rho.dim(); ++r)
    for (std::size_t c = 0; c < rho.dim(); ++c) {
      if ((r & ~bit) != (c & ~bit)) continue;
      out((r & bit) ? 1 : 0, (c & bit) ? 1 : 0) += rho(r, c);
    }
  return out;
}

}  // namespace qent
