#include "qent/nn/attention.hpp"

#include <algorithm>
#include <cmath>

#include "gemm.hpp"
#include "qent/nn/ops.hpp"

namespace qent::nn {

namespace {

using detail::MapC;
using detail::RowMat;

void check_qkv(const Tensor& q, const Tensor& k, const Tensor& v, int heads) {
  if (q.rank() != 2 || q.shape() != k.shape() || q.shape() != v.shape()) {
    throw ShapeError("attention: q, k, v must share shape [T,E]");
  }
  if (heads < 1 || q.dim(1) % heads != 0) {
    throw ShapeError("attention: " + std::to_string(heads) + " heads do not divide width " +
                     std::to_string(q.dim(1)));
  }
}

// Row softmax of (Q_h K_h^T) * scale for one head.
RowMat head_weights(const double* q, const double* k, int t, int e, int off, int dh, double sc) {
  using Stride = Eigen::OuterStride<>;
  Eigen::Map<const RowMat, 0, Stride> qh(q + off, t, dh, Stride(e));
  Eigen::Map<const RowMat, 0, Stride> kh(k + off, t, dh, Stride(e));
  RowMat s = (qh * kh.transpose()) * sc;
  for (int r = 0; r < t; ++r) {
    const double mx = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - mx).exp();
    s.row(r) /= s.row(r).sum();
  }
  return s;
}

}  // namespace

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads) {
  check_qkv(q, k, v, heads);
  const int t = q.dim(0), e = q.dim(1), dh = e / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  using Stride = Eigen::OuterStride<>;

  Tensor out = make_result({t, e}, {&q, &k, &v});
  auto weights = std::make_shared<std::vector<RowMat>>();
  weights->reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const int off = h * dh;
    weights->push_back(head_weights(q.data().data(), k.data().data(), t, e, off, dh, sc));
    Eigen::Map<const RowMat, 0, Stride> vh(v.data().data() + off, t, dh, Stride(e));
    Eigen::Map<RowMat, 0, Stride> oh(out.data().data() + off, t, dh, Stride(e));
    oh.noalias() = weights->back() * vh;
  }

  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, qn = q.shared_node(), kn = k.shared_node(), vn = v.shared_node(), weights, t, e, dh,
                         heads, sc] {
      for (int h = 0; h < heads; ++h) {
        const int off = h * dh;
        const RowMat& a = (*weights)[static_cast<std::size_t>(h)];
        Eigen::Map<const RowMat, 0, Stride> go(self->grad.data() + off, t, dh, Stride(e));
        Eigen::Map<const RowMat, 0, Stride> vh(vn->data.data() + off, t, dh, Stride(e));
        Eigen::Map<const RowMat, 0, Stride> qh(qn->data.data() + off, t, dh, Stride(e));
        Eigen::Map<const RowMat, 0, Stride> kh(kn->data.data() + off, t, dh, Stride(e));

        if (vn->requires_grad) {
          Eigen::Map<RowMat, 0, Stride> gv(vn->grad.data() + off, t, dh, Stride(e));
          gv.noalias() += a.transpose() * go;
        }
        if (!qn->requires_grad && !kn->requires_grad) continue;
        RowMat da = go * vh.transpose();
        // dS = A o (dA - rowsum(dA o A)), then the 1/sqrt(dh) scale.
        RowMat ds = a.cwiseProduct(da);
        for (int r = 0; r < t; ++r) {
          const double dot = ds.row(r).sum();
          ds.row(r) -= a.row(r) * dot;
        }
        ds *= sc;
        if (qn->requires_grad) {
          Eigen::Map<RowMat, 0, Stride> gq(qn->grad.data() + off, t, dh, Stride(e));
          gq.noalias() += ds * kh;
        }
        if (kn->requires_grad) {
          Eigen::Map<RowMat, 0, Stride> gk(kn->grad.data() + off, t, dh, Stride(e));
          gk.noalias() += ds.transpose() * qh;
        }
      }
    };
  }
  return out;
}

std::vector<std::vector<double>> attention_weights(const Tensor& q, const Tensor& k, int heads) {
  check_qkv(q, k, k, heads);
  const int t = q.dim(0), e = q.dim(1), dh = e / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<std::vector<double>> out;
  for (int h = 0; h < heads; ++h) {
    RowMat a = head_weights(q.data().data(), k.data().data(), t, e, h * dh, dh, sc);
    out.emplace_back(a.data(), a.data() + a.size());
  }
  return out;
}

Tensor multihead_self_attention(const Tensor& tokens, const AttentionParams& p, int heads) {
  if (tokens.rank() != 2) throw ShapeError("attention: tokens must be [T,E], got " + shape_str(tokens.shape()));
  if (heads < 1 || tokens.dim(1) % heads != 0) {
    throw ShapeError("attention: " + std::to_string(heads) + " heads do not divide width " +
                     std::to_string(tokens.dim(1)));
  }
  Tensor q = dense(tokens, p.wq, p.bq);
  Tensor k = dense(tokens, p.wk, p.bk);
  Tensor v = dense(tokens, p.wv, p.bv);
  return dense(scaled_dot_attention(q, k, v, heads), p.wo, p.bo);
}

}  // namespace qent::nn
