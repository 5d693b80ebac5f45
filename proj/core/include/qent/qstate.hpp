#pragma once

// Dense state-vector and density-matrix algebra for small qubit registers.
//
// Basis convention: qubit 0 is the most significant bit of a basis index, so
// for three qubits |q0 q1 q2> sits at index 4*q0 + 2*q1 + q2.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qent {

using Complex = std::complex<double>;

// Construction tolerance (normalization of built states).
inline constexpr double kConstructionTol = 1e-12;
// Hermiticity / trace checks on density matrices.
inline constexpr double kInvariantTol = 1e-10;
// Eigenvalue-based checks (PSD, PPT).
inline constexpr double kEigenTol = 1e-9;

class StateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t dim);
  ComplexMatrix(std::size_t dim, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * dim_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * dim_ + c]; }

  std::span<const Complex> entries() const { return entries_; }
  std::span<Complex> entries() { return entries_; }

  Complex trace() const;
  // Largest |m(r,c) - conj(m(c,r))|.
  double hermiticity_error() const;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> entries_;
};

class StateVector {
 public:
  StateVector() = default;
  // Throws StateError unless amplitudes.size() == 2^n_qubits and the norm is 1.
  StateVector(int n_qubits, std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm() const;

 private:
  int n_qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

class DensityMatrix {
 public:
  DensityMatrix() = default;
  // Checks Hermiticity and unit trace at kInvariantTol. PSD: see
  // check_invariants().
  DensityMatrix(int n_qubits, ComplexMatrix matrix);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return matrix_.dim(); }
  const ComplexMatrix& matrix() const { return matrix_; }
  Complex operator()(std::size_t r, std::size_t c) const { return matrix_(r, c); }

  friend bool operator==(const DensityMatrix&, const DensityMatrix&) = default;

 private:
  int n_qubits_ = 0;
  ComplexMatrix matrix_;
};

struct InvariantReport {
  double hermiticity_error = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;

  bool ok() const {
    return hermiticity_error <= kInvariantTol && trace_error <= kInvariantTol &&
           min_eigenvalue >= -kEigenTol;
  }
};

// Full physical check of a density matrix (Hermitian, unit trace, PSD).
InvariantReport check_invariants(const DensityMatrix& rho);

StateVector ghz_state(int n);
StateVector w_state(int n);
// 0..3 -> Phi+, Phi-, Psi+, Psi-.
StateVector bell_state(int index);
StateVector zero_state(int n);

StateVector tensor_product(const StateVector& a, const StateVector& b);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

Complex inner_product(const StateVector& a, const StateVector& b);

DensityMatrix to_density(const StateVector& psi);
DensityMatrix maximally_mixed(int n);

DensityMatrix mix(std::span<const double> weights, std::span<const DensityMatrix> states);

// p * rho + (1 - p) * I / 2^n.
DensityMatrix depolarize(const DensityMatrix& rho, double p);
DensityMatrix white_noise(const StateVector& psi, double p);

// <psi|rho|psi>, clamped into [0, 1].
double fidelity(const StateVector& psi, const DensityMatrix& rho);

// Inverse of fidelity(psi, white_noise(psi, p)) = p + (1 - p) / 2^n.
double noise_for_fidelity(double target_fidelity, int n);

// Transposes the tensor factors belonging to the qubits in `subset`.
ComplexMatrix partial_transpose(const DensityMatrix& rho, std::span<const int> subset);
ComplexMatrix partial_transpose(const ComplexMatrix& m, int n_qubits, std::span<const int> subset);

// Qubits {0, ..., cut} on one side of the contiguous cut after qubit `cut`.
std::vector<int> cut_subset(int cut);

// Smallest eigenvalue of a Hermitian matrix via cyclic Jacobi on the real
// symmetric embedding [[A, -B], [B, A]] of A + iB.
double min_eigenvalue_hermitian(const ComplexMatrix& m);
// All eigenvalues, ascending (each once; the embedding's duplicates removed).
std::vector<double> eigenvalues_hermitian(const ComplexMatrix& m);

// Reduced state of the single qubit `keep` (test helper for Bell states).
ComplexMatrix reduced_single_qubit(const DensityMatrix& rho, int keep);

}  // namespace qent
