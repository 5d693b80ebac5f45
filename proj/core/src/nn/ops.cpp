#include "qent/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gemm.hpp"

namespace qent::nn {

namespace {

using detail::gemm;
using NodePtr = std::shared_ptr<Tensor::Node>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(),
          std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

void accumulate(const NodePtr& dst, std::span<const double> g) {
  if (!dst->requires_grad) return;
  for (std::size_t i = 0; i < g.size(); ++i) dst->grad[i] += g[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make_result(a.shape(), {&a, &b});
  auto o = out.data();
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = ad[i] + bd[i];
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, an = a.shared_node(), bn = b.shared_node()] {
      accumulate(an, self->grad);
      accumulate(bn, self->grad);
    };
  }
  return out;
}

Tensor pos_embed_add(const Tensor& tokens, const Tensor& table) {
  require_same_shape(tokens, table, "pos_embed_add");
  return add(tokens, table);
}

Tensor scale(const Tensor& x, double factor) {
  Tensor out = make_result(x.shape(), {&x});
  auto o = out.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = factor * xd[i];
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node(), factor] {
      for (std::size_t i = 0; i < self->grad.size(); ++i) xn->grad[i] += factor * self->grad[i];
    };
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
          "matmul: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = make_result({m, n}, {&a, &b});
  gemm(false, false, m, n, k, a.data().data(), b.data().data(), out.data().data(), false);
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, an = a.shared_node(), bn = b.shared_node(), m, n, k] {
      if (an->requires_grad) gemm(false, true, m, k, n, self->grad.data(), bn->data.data(), an->grad.data(), true);
      if (bn->requires_grad) gemm(true, false, k, n, m, an->data.data(), self->grad.data(), bn->grad.data(), true);
    };
  }
  return out;
}

Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require(weight.rank() == 2 && bias.rank() == 1 && bias.dim(0) == weight.dim(1),
          "dense: weight " + shape_str(weight.shape()) + " / bias " + shape_str(bias.shape()) + " mismatch");
  require((x.rank() == 1 || x.rank() == 2) && x.dim(-1) == weight.dim(0),
          "dense: input " + shape_str(x.shape()) + " does not match weight " + shape_str(weight.shape()));
  const int rows = x.rank() == 1 ? 1 : x.dim(0);
  const int in = weight.dim(0), outw = weight.dim(1);
  Shape shape = x.rank() == 1 ? Shape{outw} : Shape{rows, outw};
  Tensor out = make_result(std::move(shape), {&x, &weight, &bias});
  double* o = out.data().data();
  for (int r = 0; r < rows; ++r) std::copy(bias.data().begin(), bias.data().end(), o + r * outw);
  gemm(false, false, rows, outw, in, x.data().data(), weight.data().data(), o, true);
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node(), wn = weight.shared_node(), bn = bias.shared_node(), rows, in,
                         outw] {
      const double* g = self->grad.data();
      if (xn->requires_grad) gemm(false, true, rows, in, outw, g, wn->data.data(), xn->grad.data(), true);
      if (wn->requires_grad) gemm(true, false, in, outw, rows, xn->data.data(), g, wn->grad.data(), true);
      if (bn->requires_grad)
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < outw; ++j) bn->grad[j] += g[r * outw + j];
    };
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = make_result(x.shape(), {&x});
  auto o = out.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node()] {
      for (std::size_t i = 0; i < self->grad.size(); ++i)
        if (xn->data[i] > 0.0) xn->grad[i] += self->grad[i];
    };
  }
  return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias, ConvOptions opt) {
  require(input.rank() == 3, "conv2d: input must be [C,H,W], got " + shape_str(input.shape()));
  require(kernels.rank() == 4 && kernels.dim(2) == kernels.dim(3),
          "conv2d: kernels must be [C_out,C_in,K,K], got " + shape_str(kernels.shape()));
  require(kernels.dim(1) == input.dim(0), "conv2d: channel mismatch between input " + shape_str(input.shape()) +
                                              " and kernels " + shape_str(kernels.shape()));
  require(bias.rank() == 1 && bias.dim(0) == kernels.dim(0), "conv2d: bias must be [C_out]");
  require(opt.stride >= 1 && opt.padding >= 0, "conv2d: stride must be >= 1 and padding >= 0");
  const int c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int c_out = kernels.dim(0), k = kernels.dim(2);
  const int s = opt.stride, pad = opt.padding;
  require(h + 2 * pad >= k && w + 2 * pad >= k, "conv2d: input smaller than kernel");
  const int ho = (h + 2 * pad - k) / s + 1;
  const int wo = (w + 2 * pad - k) / s + 1;
  const int rows = c_in * k * k;
  const int cols = ho * wo;

  // im2col: cols[(c*K + ky)*K + kx][oy*Wo + ox]
  auto col = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows) * cols, 0.0);
  const double* x = input.data().data();
  for (int c = 0; c < c_in; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        double* dst = col->data() + static_cast<std::size_t>((c * k + ky) * k + kx) * cols;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * s + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const double* src = x + (static_cast<std::size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * s + kx - pad;
            if (ix >= 0 && ix < w) dst[oy * wo + ox] = src[ix];
          }
        }
      }

  Tensor out = make_result({c_out, ho, wo}, {&input, &kernels, &bias});
  double* o = out.data().data();
  for (int co = 0; co < c_out; ++co) std::fill(o + co * cols, o + (co + 1) * cols, bias.data()[co]);
  gemm(false, false, c_out, cols, rows, kernels.data().data(), col->data(), o, true);

  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = input.shared_node(), kn = kernels.shared_node(), bn = bias.shared_node(), col,
                         c_in, h, w, c_out, k, s, pad, ho, wo, rows, cols] {
      const double* g = self->grad.data();
      if (kn->requires_grad) gemm(false, true, c_out, rows, cols, g, col->data(), kn->grad.data(), true);
      if (bn->requires_grad)
        for (int co = 0; co < c_out; ++co) {
          double acc = 0.0;
          for (int i = 0; i < cols; ++i) acc += g[co * cols + i];
          bn->grad[co] += acc;
        }
      if (xn->requires_grad) {
        std::vector<double> dcol(static_cast<std::size_t>(rows) * cols);
        gemm(true, false, rows, cols, c_out, kn->data.data(), g, dcol.data(), false);
        double* dx = xn->grad.data();
        for (int c = 0; c < c_in; ++c)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const double* srcg = dcol.data() + static_cast<std::size_t>((c * k + ky) * k + kx) * cols;
              for (int oy = 0; oy < ho; ++oy) {
                const int iy = oy * s + ky - pad;
                if (iy < 0 || iy >= h) continue;
                double* row = dx + (static_cast<std::size_t>(c) * h + iy) * w;
                for (int ox = 0; ox < wo; ++ox) {
                  const int ix = ox * s + kx - pad;
                  if (ix >= 0 && ix < w) row[ix] += srcg[oy * wo + ox];
                }
              }
            }
      }
    };
  }
  return out;
}

Tensor maxpool2(const Tensor& input) {
  require(input.rank() == 3, "maxpool2: input must be [C,H,W], got " + shape_str(input.shape()));
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  require(h % 2 == 0 && w % 2 == 0, "maxpool2: spatial extents must be even, got " + shape_str(input.shape()));
  const int ho = h / 2, wo = w / 2;
  Tensor out = make_result({c, ho, wo}, {&input});
  auto arg = std::make_shared<std::vector<std::size_t>>(out.size());
  const double* x = input.data().data();
  double* o = out.data().data();
  std::size_t idx = 0;
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < ho; ++i)
      for (int j = 0; j < wo; ++j, ++idx) {
        std::size_t best = (static_cast<std::size_t>(ch) * h + 2 * i) * w + 2 * j;
        const std::size_t cand[3] = {best + 1, best + w, best + w + 1};
        for (std::size_t q : cand)
          if (x[q] > x[best]) best = q;
        o[idx] = x[best];
        (*arg)[idx] = best;
      }
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = input.shared_node(), arg] {
      for (std::size_t i = 0; i < arg->size(); ++i) xn->grad[(*arg)[i]] += self->grad[i];
    };
  }
  return out;
}

Tensor flatten(const Tensor& x) {
  Tensor out = make_result({static_cast<int>(x.size())}, {&x});
  std::copy(x.data().begin(), x.data().end(), out.data().begin());
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node()] { accumulate(xn, self->grad); };
  }
  return out;
}

Tensor concat(const Tensor& a, const Tensor& b) {
  const std::size_t na = a.size();
  Tensor out = make_result({static_cast<int>(na + b.size())}, {&a, &b});
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(na));
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, an = a.shared_node(), bn = b.shared_node(), na] {
      std::span<const double> g = self->grad;
      accumulate(an, g.subspan(0, na));
      accumulate(bn, g.subspan(na));
    };
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require(x.rank() >= 1, "layer_norm: scalar input");
  const int e = x.dim(-1);
  require(gamma.rank() == 1 && gamma.dim(0) == e && beta.shape() == gamma.shape(),
          "layer_norm: scale/shift must be [" + std::to_string(e) + "]");
  const int rows = static_cast<int>(x.size() / static_cast<std::size_t>(e));
  Tensor out = make_result(x.shape(), {&x, &gamma, &beta});
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  const double* xd = x.data().data();
  double* o = out.data().data();
  for (int r = 0; r < rows; ++r) {
    const double* row = xd + static_cast<std::size_t>(r) * e;
    double mean = 0.0;
    for (int j = 0; j < e; ++j) mean += row[j];
    mean /= e;
    double var = 0.0;
    for (int j = 0; j < e; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= e;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (int j = 0; j < e; ++j) {
      const double xh = (row[j] - mean) * is;
      (*xhat)[static_cast<std::size_t>(r) * e + j] = xh;
      o[static_cast<std::size_t>(r) * e + j] = xh * gamma.data()[j] + beta.data()[j];
    }
  }
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node(), gn = gamma.shared_node(), bn = beta.shared_node(), xhat,
                         inv_std, rows, e] {
      const double* g = self->grad.data();
      std::vector<double> dxh(e);
      for (int r = 0; r < rows; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * e;
        double m1 = 0.0, m2 = 0.0;
        for (int j = 0; j < e; ++j) {
          const double gy = g[base + j];
          const double xh = (*xhat)[base + j];
          if (gn->requires_grad) gn->grad[j] += gy * xh;
          if (bn->requires_grad) bn->grad[j] += gy;
          dxh[j] = gy * gn->data[j];
          m1 += dxh[j];
          m2 += dxh[j] * xh;
        }
        if (!xn->requires_grad) continue;
        m1 /= e;
        m2 /= e;
        for (int j = 0; j < e; ++j)
          xn->grad[base + j] += (*inv_std)[r] * (dxh[j] - m1 - (*xhat)[base + j] * m2);
      }
    };
  }
  return out;
}

Tensor softmax(const Tensor& x) {
  require(x.rank() >= 1, "softmax: scalar input");
  const int k = x.dim(-1);
  const std::size_t rows = x.size() / static_cast<std::size_t>(k);
  Tensor out = make_result(x.shape(), {&x});
  const double* xd = x.data().data();
  double* o = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xd + r * k;
    double* orow = o + r * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (int j = 0; j < k; ++j) z += (orow[j] = std::exp(row[j] - mx));
    for (int j = 0; j < k; ++j) orow[j] /= z;
  }
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node(), rows, k] {
      const double* y = self->data.data();
      const double* g = self->grad.data();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (int j = 0; j < k; ++j) dot += g[r * k + j] * y[r * k + j];
        for (int j = 0; j < k; ++j) xn->grad[r * k + j] += y[r * k + j] * (g[r * k + j] - dot);
      }
    };
  }
  return out;
}

Tensor stack_rows(std::span<const Tensor> rows) {
  require(!rows.empty(), "stack_rows: no rows");
  const int n = static_cast<int>(rows.front().size());
  for (const Tensor& r : rows) require(r.rank() == 1 && r.dim(0) == n, "stack_rows: rows must share shape [n]");
  auto node = make_result({static_cast<int>(rows.size()), n}, {});
  // make_result only sees a fixed parent list; wire the rows in here.
  auto* self = node.node();
  for (const Tensor& r : rows)
    if (grad_enabled() && r.requires_grad()) self->parents.push_back(r.shared_node());
  if (!self->parents.empty()) {
    self->requires_grad = true;
    self->grad.assign(self->data.size(), 0.0);
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].data().begin(), rows[i].data().end(), self->data.begin() + static_cast<std::ptrdiff_t>(i * n));
  if (self->requires_grad) {
    std::vector<NodePtr> src;
    for (const Tensor& r : rows) src.push_back(r.shared_node());
    self->backward_fn = [self, src = std::move(src), n] {
      for (std::size_t i = 0; i < src.size(); ++i)
        accumulate(src[i], std::span<const double>(self->grad).subspan(i * n, n));
    };
  }
  return node;
}

Tensor mean_rows(const Tensor& x) {
  require(x.rank() == 2, "mean_rows: input must be [T,E], got " + shape_str(x.shape()));
  const int t = x.dim(0), e = x.dim(1);
  Tensor out = make_result({e}, {&x});
  const double* xd = x.data().data();
  double* o = out.data().data();
  for (int r = 0; r < t; ++r)
    for (int j = 0; j < e; ++j) o[j] += xd[r * e + j];
  for (int j = 0; j < e; ++j) o[j] /= t;
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node(), t, e] {
      for (int r = 0; r < t; ++r)
        for (int j = 0; j < e; ++j) xn->grad[r * e + j] += self->grad[j] / t;
    };
  }
  return out;
}

Tensor patch_embed(const Tensor& input, const Tensor& weight, const Tensor& bias, int patch) {
  require(input.rank() == 3 && input.dim(1) == input.dim(2),
          "patch_embed: input must be [C,D,D], got " + shape_str(input.shape()));
  const int c = input.dim(0), d = input.dim(1);
  require(patch >= 1 && d % patch == 0,
          "patch_embed: patch " + std::to_string(patch) + " does not divide side " + std::to_string(d));
  const int g = d / patch;
  const int tokens = g * g;
  const int pdim = c * patch * patch;
  require(weight.rank() == 2 && weight.dim(0) == pdim,
          "patch_embed: weight must be [" + std::to_string(pdim) + ",E], got " + shape_str(weight.shape()));
  const int e = weight.dim(1);
  require(bias.rank() == 1 && bias.dim(0) == e, "patch_embed: bias must be [E]");

  // Gathered patch matrix [T, P*P*C]; index map shared with the backward pass.
  auto gather = std::make_shared<std::vector<std::size_t>>(static_cast<std::size_t>(tokens) * pdim);
  for (int gy = 0; gy < g; ++gy)
    for (int gx = 0; gx < g; ++gx) {
      const int t = gy * g + gx;
      int col = 0;
      for (int ch = 0; ch < c; ++ch)
        for (int py = 0; py < patch; ++py)
          for (int px = 0; px < patch; ++px, ++col)
            (*gather)[static_cast<std::size_t>(t) * pdim + col] =
                (static_cast<std::size_t>(ch) * d + gy * patch + py) * d + gx * patch + px;
    }
  std::vector<double> pm(gather->size());
  for (std::size_t i = 0; i < pm.size(); ++i) pm[i] = input.data()[(*gather)[i]];

  Tensor out = make_result({tokens, e}, {&input, &weight, &bias});
  double* o = out.data().data();
  for (int t = 0; t < tokens; ++t) std::copy(bias.data().begin(), bias.data().end(), o + t * e);
  gemm(false, false, tokens, e, pdim, pm.data(), weight.data().data(), o, true);

  if (out.requires_grad()) {
    auto* self = out.node();
    auto pmat = std::make_shared<std::vector<double>>(std::move(pm));
    self->backward_fn = [self, xn = input.shared_node(), wn = weight.shared_node(), bn = bias.shared_node(), gather,
                         pmat, tokens, pdim, e] {
      const double* gr = self->grad.data();
      if (wn->requires_grad) gemm(true, false, pdim, e, tokens, pmat->data(), gr, wn->grad.data(), true);
      if (bn->requires_grad)
        for (int t = 0; t < tokens; ++t)
          for (int j = 0; j < e; ++j) bn->grad[j] += gr[t * e + j];
      if (xn->requires_grad) {
        std::vector<double> dpm(gather->size());
        gemm(false, true, tokens, pdim, e, gr, wn->data.data(), dpm.data(), false);
        for (std::size_t i = 0; i < dpm.size(); ++i) xn->grad[(*gather)[i]] += dpm[i];
      }
    };
  }
  return out;
}

Tensor cross_entropy(const Tensor& logits, int target) {
  require(logits.rank() == 1 && logits.dim(0) >= 2, "cross_entropy: logits must be [K] with K >= 2");
  const int k = logits.dim(0);
  if (target < 0 || target >= k) {
    throw std::out_of_range("cross_entropy: class " + std::to_string(target) + " outside [0," + std::to_string(k) +
                            ")");
  }
  const double* z = logits.data().data();
  const double mx = *std::max_element(z, z + k);
  auto prob = std::make_shared<std::vector<double>>(k);
  double sum_exp = 0.0;
  for (int j = 0; j < k; ++j) sum_exp += ((*prob)[j] = std::exp(z[j] - mx));
  for (int j = 0; j < k; ++j) (*prob)[j] /= sum_exp;

  Tensor out = make_result({1}, {&logits});
  out.data()[0] = mx + std::log(sum_exp) - z[target];
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, ln = logits.shared_node(), prob, target, k] {
      const double g = self->grad[0];
      for (int j = 0; j < k; ++j) ln->grad[j] += g * ((*prob)[j] - (j == target ? 1.0 : 0.0));
    };
  }
  return out;
}

Tensor sum(const Tensor& x) {
  Tensor out = make_result({1}, {&x});
  double s = 0.0;
  for (double v : x.data()) s += v;
  out.data()[0] = s;
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node()] {
      for (double& g : xn->grad) g += self->grad[0];
    };
  }
  return out;
}

Tensor weighted_sum(const Tensor& x, std::span<const double> coeffs) {
  require(coeffs.size() == x.size(), "weighted_sum: coefficient count mismatch");
  Tensor out = make_result({1}, {&x});
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * x.data()[i];
  out.data()[0] = s;
  if (out.requires_grad()) {
    auto* self = out.node();
    self->backward_fn = [self, xn = x.shared_node(), c = std::vector<double>(coeffs.begin(), coeffs.end())] {
      for (std::size_t i = 0; i < c.size(); ++i) xn->grad[i] += self->grad[0] * c[i];
    };
  }
  return out;
}

}  // namespace qent::nn
