#pragma once

#include <Eigen/Core>

namespace qent::nn::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

// C[m x n] (+)= op(A) op(B), all row-major; op(X) = X or X^T.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b, double* c,
                 bool accumulate) {
  Map cm(c, m, n);
  if (!accumulate) cm.setZero();
  if (!trans_a && !trans_b) {
    cm.noalias() += MapC(a, m, k) * MapC(b, k, n);
  } else if (trans_a && !trans_b) {
    cm.noalias() += MapC(a, k, m).transpose() * MapC(b, k, n);
  } else if (!trans_a && trans_b) {
    cm.noalias() += MapC(a, m, k) * MapC(b, n, k).transpose();
  } else {
    cm.noalias() += MapC(a, k, m).transpose() * MapC(b, n, k).transpose();
  }
}

}  // namespace qent::nn::detail
