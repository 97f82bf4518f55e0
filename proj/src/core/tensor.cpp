// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0

#include "core/tensor.hpp"

#include <cmath>
#include <numbers>

namespace mmt::ad {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// c[m x n] += a[m x k] * b[k x n], row-major.
void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

int Tensor::rows() const { return tape_->node(id_).rows; }
int Tensor::cols() const { return tape_->node(id_).cols; }

std::span<const double> Tensor::value() const {
  const auto& n = tape_->node(id_);
  return {n.val.data(), n.val.size()};
}

std::span<const double> Tensor::grad() const {
  const auto& n = tape_->node(id_);
  return {n.grad.data(), n.grad.size()};
}

double Tensor::scalar() const {
  const auto& n = tape_->node(id_);
  if (n.val.size() != 1) fail(ErrorCode::kInvalidArgument, "scalar(): tensor is not 1x1");
  return n.val[0];
}

int Tape::new_node(int rows, int cols) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.val.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  if (recording) n.grad.assign(n.val.size(), 0.0);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_same_tape(Tensor t) const {
  if (t.tape_ != this) fail(ErrorCode::kInternal, "tensor belongs to a different tape");
}

Tensor Tape::leaf(int rows, int cols, std::span<const double> data) {
  if (data.size() != static_cast<std::size_t>(rows) * cols)
    fail(ErrorCode::kInvalidArgument, "leaf: data length does not match shape");
  const int id = new_node(rows, cols);
  node(id).val.assign(data.begin(), data.end());
  node(id).is_leaf = true;
  return own(id);
}

Tensor Tape::constant(int rows, int cols, std::span<const double> data) {
  if (data.size() != static_cast<std::size_t>(rows) * cols)
    fail(ErrorCode::kInvalidArgument, "constant: data length does not match shape");
  const int id = new_node(rows, cols);
  node(id).val.assign(data.begin(), data.end());
  return own(id);
}

Tensor Tape::add(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::kInvalidArgument, "add: shape mismatch");
  const int id = new_node(a.rows(), a.cols());
  auto& out = node(id).val;
  const auto& av = node(a.id_).val;
  const auto& bv = node(b.id_).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  if (recording) {
    node(id).back = [this, id, ai = a.id_, bi = b.id_] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      auto& gb = node(bi).grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
    };
  }
  return own(id);
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::kInvalidArgument, "sub: shape mismatch");
  const int id = new_node(a.rows(), a.cols());
  auto& out = node(id).val;
  const auto& av = node(a.id_).val;
  const auto& bv = node(b.id_).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  if (recording) {
    node(id).back = [this, id, ai = a.id_, bi = b.id_] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      auto& gb = node(bi).grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] -= g[i];
      }
    };
  }
  return own(id);
}

Tensor Tape::mul(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::kInvalidArgument, "mul: shape mismatch");
  const int id = new_node(a.rows(), a.cols());
  auto& out = node(id).val;
  const auto& av = node(a.id_).val;
  const auto& bv = node(b.id_).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  if (recording) {
    node(id).back = [this, id, ai = a.id_, bi = b.id_] {
      const auto& g = node(id).grad;
      auto& na = node(ai);
      auto& nb = node(bi);
      for (std::size_t i = 0; i < g.size(); ++i) {
        na.grad[i] += g[i] * nb.val[i];
        nb.grad[i] += g[i] * na.val[i];
      }
    };
  }
  return own(id);
}

Tensor Tape::scale(Tensor a, double factor) {
  check_same_tape(a);
  const int id = new_node(a.rows(), a.cols());
  auto& out = node(id).val;
  const auto& av = node(a.id_).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * av[i];
  if (recording) {
    node(id).back = [this, id, ai = a.id_, factor] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    };
  }
  return own(id);
}

Tensor Tape::matmul(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) fail(ErrorCode::kInvalidArgument, "matmul: inner dimensions do not match");
  const int id = new_node(m, n);
  matmul_acc(node(a.id_).val.data(), node(b.id_).val.data(), node(id).val.data(), m, k, n);
  if (recording) {
    node(id).back = [this, id, ai = a.id_, bi = b.id_, m, k, n] {
      const auto& g = node(id).grad;
      auto& na = node(ai);
      auto& nb = node(bi);
      // dA += dC * B^T
      for (int i = 0; i < m; ++i) {
        const double* grow = g.data() + static_cast<std::size_t>(i) * n;
        double* garow = na.grad.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
          const double* brow = nb.val.data() + static_cast<std::size_t>(p) * n;
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          garow[p] += acc;
        }
      }
      // dB += A^T * dC
      for (int i = 0; i < m; ++i) {
        const double* arow = na.val.data() + static_cast<std::size_t>(i) * k;
        const double* grow = g.data() + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
          const double av = arow[p];
          if (av == 0.0) continue;
          double* gbrow = nb.grad.data() + static_cast<std::size_t>(p) * n;
          for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
        }
      }
    };
  }
  return own(id);
}

Tensor Tape::transpose(Tensor a) {
  check_same_tape(a);
  const int m = a.rows(), n = a.cols();
  const int id = new_node(n, m);
  const auto& av = node(a.id_).val;
  auto& out = node(id).val;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(j) * m + i] = av[static_cast<std::size_t>(i) * n + j];
  if (recording) {
    node(id).back = [this, id, ai = a.id_, m, n] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          ga[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(j) * m + i];
    };
  }
  return own(id);
}

Tensor Tape::sum(Tensor a) {
  check_same_tape(a);
  const int id = new_node(1, 1);
  const auto& av = node(a.id_).val;
  double acc = 0.0;
  for (double v : av) acc += v;
  node(id).val[0] = acc;
  if (recording) {
    node(id).back = [this, id, ai = a.id_] {
      const double g = node(id).grad[0];
      auto& ga = node(ai).grad;
      for (double& v : ga) v += g;
    };
  }
  return own(id);
}

Tensor Tape::softmax_rows(Tensor a) {
  check_same_tape(a);
  const int m = a.rows(), n = a.cols();
  const int id = new_node(m, n);
  const auto& av = node(a.id_).val;
  auto& out = node(id).val;
  for (int i = 0; i < m; ++i) {
    const double* row = av.data() + static_cast<std::size_t>(i) * n;
    double* orow = out.data() + static_cast<std::size_t>(i) * n;
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (std::isnan(row[j])) fail(ErrorCode::kInvalidArgument, "softmax_rows: NaN input");
      mx = std::max(mx, row[j]);
    }
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - mx);
      denom += orow[j];
    }
    for (int j = 0; j < n; ++j) orow[j] /= denom;
  }
  if (recording) {
    node(id).back = [this, id, ai = a.id_, m, n] {
      const auto& g = node(id).grad;
      const auto& y = node(id).val;
      auto& ga = node(ai).grad;
      for (int i = 0; i < m; ++i) {
        const double* grow = g.data() + static_cast<std::size_t>(i) * n;
        const double* yrow = y.data() + static_cast<std::size_t>(i) * n;
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += grow[j] * yrow[j];
        double* garow = ga.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) garow[j] += yrow[j] * (grow[j] - dot);
      }
    };
  }
  return own(id);
}

Tensor Tape::gelu(Tensor a) {
  check_same_tape(a);
  const int id = new_node(a.rows(), a.cols());
  const auto& av = node(a.id_).val;
  auto& out = node(id).val;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = av[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
  }
  if (recording) {
    node(id).back = [this, id, ai = a.id_] {
      const auto& g = node(id).grad;
      auto& na = node(ai);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = na.val[i];
        const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        na.grad[i] += g[i] * (cdf + x * pdf);
      }
    };
  }
  return own(id);
}

Tensor Tape::layer_norm(Tensor x, Tensor gain, Tensor bias) {
  check_same_tape(x);
  check_same_tape(gain);
  check_same_tape(bias);
  const int m = x.rows(), d = x.cols();
  if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d)
    fail(ErrorCode::kInvalidArgument, "layer_norm: gain/bias must be [1,d]");
  const int id = new_node(m, d);
  const auto& xv = node(x.id_).val;
  const auto& gv = node(gain.id_).val;
  const auto& bv = node(bias.id_).val;
  auto& out = node(id).val;
  // xhat and 1/s are saved for the backward pass.
  std::vector<double> xhat(static_cast<std::size_t>(m) * d);
  std::vector<double> inv_s(m);
  for (int i = 0; i < m; ++i) {
    const double* row = xv.data() + static_cast<std::size_t>(i) * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = row[j] - mean;
      var += c * c;
    }
    var /= d;
    const double s = std::sqrt(var + kLayerNormEps);
    inv_s[i] = 1.0 / s;
    double* xh = xhat.data() + static_cast<std::size_t>(i) * d;
    double* orow = out.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) {
      xh[j] = (row[j] - mean) * inv_s[i];
      orow[j] = xh[j] * gv[j] + bv[j];
    }
  }
  if (recording) {
    node(id).back = [this, id, xi = x.id_, gi = gain.id_, bi = bias.id_, m, d,
                     xhat = std::move(xhat), inv_s = std::move(inv_s)] {
      const auto& g = node(id).grad;
      const auto& gv = node(gi).val;
      auto& gx = node(xi).grad;
      auto& gg = node(gi).grad;
      auto& gb = node(bi).grad;
      for (int i = 0; i < m; ++i) {
        const double* grow = g.data() + static_cast<std::size_t>(i) * d;
        const double* xh = xhat.data() + static_cast<std::size_t>(i) * d;
        double sum_dxh = 0.0, sum_dxh_xh = 0.0;
        for (int j = 0; j < d; ++j) {
          const double dxh = grow[j] * gv[j];
          sum_dxh += dxh;
          sum_dxh_xh += dxh * xh[j];
          gg[j] += grow[j] * xh[j];
          gb[j] += grow[j];
        }
        double* gxrow = gx.data() + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) {
          const double dxh = grow[j] * gv[j];
          gxrow[j] += inv_s[i] * (dxh - sum_dxh / d - xh[j] * (sum_dxh_xh / d));
        }
      }
    };
  }
  return own(id);
}

Tensor Tape::reshape(Tensor a, int rows, int cols) {
  check_same_tape(a);
  if (static_cast<std::size_t>(rows) * cols != node(a.id_).val.size())
    fail(ErrorCode::kInvalidArgument, "reshape: element count mismatch");
  const int id = new_node(rows, cols);
  node(id).val = node(a.id_).val;
  if (recording) {
    node(id).back = [this, id, ai = a.id_] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
  }
  return own(id);
}

Tensor Tape::slice(Tensor a, int r0, int c0, int rows, int cols) {
  check_same_tape(a);
  const int m = a.rows(), n = a.cols();
  if (r0 < 0 || c0 < 0 || r0 + rows > m || c0 + cols > n)
    fail(ErrorCode::kInvalidArgument, "slice: region out of range");
  const int id = new_node(rows, cols);
  const auto& av = node(a.id_).val;
  auto& out = node(id).val;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out[static_cast<std::size_t>(i) * cols + j] =
          av[static_cast<std::size_t>(i + r0) * n + (j + c0)];
  if (recording) {
    node(id).back = [this, id, ai = a.id_, r0, c0, rows, cols, n] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
          ga[static_cast<std::size_t>(i + r0) * n + (j + c0)] +=
              g[static_cast<std::size_t>(i) * cols + j];
    };
  }
  return own(id);
}

Tensor Tape::concat_rows(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  if (a.cols() != b.cols()) fail(ErrorCode::kInvalidArgument, "concat_rows: column mismatch");
  const int ma = a.rows(), mb = b.rows(), n = a.cols();
  const int id = new_node(ma + mb, n);
  auto& out = node(id).val;
  const auto& av = node(a.id_).val;
  const auto& bv = node(b.id_).val;
  std::copy(av.begin(), av.end(), out.begin());
  std::copy(bv.begin(), bv.end(), out.begin() + av.size());
  if (recording) {
    node(id).back = [this, id, ai = a.id_, bi = b.id_, sz = av.size()] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      auto& gb = node(bi).grad;
      for (std::size_t i = 0; i < sz; ++i) ga[i] += g[i];
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[sz + i];
    };
  }
  return own(id);
}

Tensor Tape::concat_cols3(Tensor a, Tensor b, Tensor c) {
  check_same_tape(a);
  check_same_tape(b);
  check_same_tape(c);
  const int m = a.rows();
  if (a.cols() != 1 || b.cols() != 1 || c.cols() != 1 || b.rows() != m || c.rows() != m)
    fail(ErrorCode::kInvalidArgument, "concat_cols3: expects three [n,1] tensors");
  const int id = new_node(m, 3);
  auto& out = node(id).val;
  const auto& av = node(a.id_).val;
  const auto& bv = node(b.id_).val;
  const auto& cv = node(c.id_).val;
  for (int i = 0; i < m; ++i) {
    out[static_cast<std::size_t>(i) * 3 + 0] = av[i];
    out[static_cast<std::size_t>(i) * 3 + 1] = bv[i];
    out[static_cast<std::size_t>(i) * 3 + 2] = cv[i];
  }
  if (recording) {
    node(id).back = [this, id, ai = a.id_, bi = b.id_, ci = c.id_, m] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      auto& gb = node(bi).grad;
      auto& gc = node(ci).grad;
      for (int i = 0; i < m; ++i) {
        ga[i] += g[static_cast<std::size_t>(i) * 3 + 0];
        gb[i] += g[static_cast<std::size_t>(i) * 3 + 1];
        gc[i] += g[static_cast<std::size_t>(i) * 3 + 2];
      }
    };
  }
  return own(id);
}

Tensor Tape::rows_sum(Tensor table, std::vector<std::vector<int>> groups) {
  check_same_tape(table);
  const int v = table.rows(), d = table.cols();
  const int g_count = static_cast<int>(groups.size());
  const int id = new_node(g_count, d);
  const auto& tv = node(table.id_).val;
  auto& out = node(id).val;
  for (int g = 0; g < g_count; ++g) {
    double* orow = out.data() + static_cast<std::size_t>(g) * d;
    for (int r : groups[g]) {
      if (r < 0 || r >= v) fail(ErrorCode::kData, "rows_sum: row index out of range");
      const double* trow = tv.data() + static_cast<std::size_t>(r) * d;
      for (int j = 0; j < d; ++j) orow[j] += trow[j];
    }
  }
  if (recording) {
    node(id).back = [this, id, ti = table.id_, d, groups = std::move(groups)] {
      const auto& g = node(id).grad;
      auto& gt = node(ti).grad;
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const double* grow = g.data() + gi * d;
        for (int r : groups[gi]) {
          double* trow = gt.data() + static_cast<std::size_t>(r) * d;
          for (int j = 0; j < d; ++j) trow[j] += grow[j];
        }
      }
    };
  }
  return own(id);
}

Tensor Tape::row_block_sum(Tensor a, int block) {
  check_same_tape(a);
  const int m = a.rows(), d = a.cols();
  if (block <= 0 || m % block != 0)
    fail(ErrorCode::kInvalidArgument, "row_block_sum: rows not divisible by block");
  const int g_count = m / block;
  const int id = new_node(g_count, d);
  const auto& av = node(a.id_).val;
  auto& out = node(id).val;
  for (int g = 0; g < g_count; ++g) {
    double* orow = out.data() + static_cast<std::size_t>(g) * d;
    for (int b = 0; b < block; ++b) {
      const double* arow = av.data() + static_cast<std::size_t>(g * block + b) * d;
      for (int j = 0; j < d; ++j) orow[j] += arow[j];
    }
  }
  if (recording) {
    node(id).back = [this, id, ai = a.id_, block, g_count, d] {
      const auto& g = node(id).grad;
      auto& ga = node(ai).grad;
      for (int gi = 0; gi < g_count; ++gi) {
        const double* grow = g.data() + static_cast<std::size_t>(gi) * d;
        for (int b = 0; b < block; ++b) {
          double* arow = ga.data() + static_cast<std::size_t>(gi * block + b) * d;
          for (int j = 0; j < d; ++j) arow[j] += grow[j];
        }
      }
    };
  }
  return own(id);
}

Tensor Tape::weighted_gather(Tensor table, std::vector<std::vector<GatherItem>> items,
                             int rows, int cols) {
  check_same_tape(table);
  if (items.size() != static_cast<std::size_t>(rows) * cols)
    fail(ErrorCode::kInvalidArgument, "weighted_gather: item count does not match shape");
  const auto& tv = node(table.id_).val;
  const int id = new_node(rows, cols);
  auto& out = node(id).val;
  for (std::size_t p = 0; p < items.size(); ++p) {
    double acc = 0.0;
    for (const auto& it : items[p]) {
      if (it.index < 0 || static_cast<std::size_t>(it.index) >= tv.size())
        fail(ErrorCode::kData, "weighted_gather: index out of range");
      acc += it.weight * tv[it.index];
    }
    out[p] = acc;
  }
  if (recording) {
    node(id).back = [this, id, ti = table.id_, items = std::move(items)] {
      const auto& g = node(id).grad;
      auto& gt = node(ti).grad;
      for (std::size_t p = 0; p < items.size(); ++p) {
        if (g[p] == 0.0) continue;
        for (const auto& it : items[p]) gt[it.index] += it.weight * g[p];
      }
    };
  }
  return own(id);
}

Tensor Tape::gaussian_basis(std::span<const double> dist, Tensor gamma, Tensor beta,
                            Tensor mu, Tensor sigma) {
  check_same_tape(gamma);
  check_same_tape(beta);
  check_same_tape(mu);
  check_same_tape(sigma);
  const int p_count = static_cast<int>(dist.size());
  const int k_count = mu.cols();
  if (gamma.rows() != p_count || gamma.cols() != 1 || beta.rows() != p_count ||
      beta.cols() != 1 || mu.rows() != 1 || sigma.rows() != 1 || sigma.cols() != k_count)
    fail(ErrorCode::kInvalidArgument, "gaussian_basis: bad operand shapes");
  const int id = new_node(p_count, k_count);
  const auto& gv = node(gamma.id_).val;
  const auto& bv = node(beta.id_).val;
  const auto& mv = node(mu.id_).val;
  const auto& sv = node(sigma.id_).val;
  auto& out = node(id).val;
  std::vector<double> u_all(static_cast<std::size_t>(p_count) * k_count);
  for (int p = 0; p < p_count; ++p) {
    const double t = gv[p] * dist[p] + bv[p];
    for (int k = 0; k < k_count; ++k) {
      const double s = std::abs(sv[k]);
      const double u = (t - mv[k]) / s;
      u_all[static_cast<std::size_t>(p) * k_count + k] = u;
      out[static_cast<std::size_t>(p) * k_count + k] =
          -kInvSqrt2Pi / s * std::exp(-0.5 * u * u);
    }
  }
  if (recording) {
    std::vector<double> dist_copy(dist.begin(), dist.end());
    node(id).back = [this, id, gi = gamma.id_, bi = beta.id_, mi = mu.id_, si = sigma.id_,
                     p_count, k_count, u_all = std::move(u_all),
                     dist_copy = std::move(dist_copy)] {
      const auto& g = node(id).grad;
      const auto& psi = node(id).val;
      const auto& sv = node(si).val;
      auto& gg = node(gi).grad;
      auto& gb = node(bi).grad;
      auto& gm = node(mi).grad;
      auto& gs = node(si).grad;
      for (int p = 0; p < p_count; ++p) {
        for (int k = 0; k < k_count; ++k) {
          const std::size_t idx = static_cast<std::size_t>(p) * k_count + k;
          const double go = g[idx];
          if (go == 0.0) continue;
          const double s = std::abs(sv[k]);
          const double u = u_all[idx];
          const double dpsi_dt = -psi[idx] * u / s;
          gg[p] += go * dpsi_dt * dist_copy[p];
          gb[p] += go * dpsi_dt;
          gm[k] += go * (-dpsi_dt);
          const double dpsi_ds = -(psi[idx] / s) * (1.0 - u * u);
          gs[k] += go * (sv[k] < 0.0 ? -dpsi_ds : dpsi_ds);
        }
      }
    };
  }
  return own(id);
}

Tensor Tape::cosine_row_loss(Tensor pred, std::span<const double> target) {
  check_same_tape(pred);
  const int n = pred.rows(), d = pred.cols();
  if (target.size() != static_cast<std::size_t>(n) * d)
    fail(ErrorCode::kInvalidArgument, "cosine_row_loss: target size mismatch");
  constexpr double kTinyNorm = 1e-12;
  const int id = new_node(1, 1);
  const auto& pv = node(pred.id_).val;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* p = pv.data() + static_cast<std::size_t>(i) * d;
    const double* t = target.data() + static_cast<std::size_t>(i) * d;
    double pp = 0.0, tt = 0.0, pt = 0.0;
    for (int j = 0; j < d; ++j) {
      pp += p[j] * p[j];
      tt += t[j] * t[j];
      pt += p[j] * t[j];
    }
    const double np = std::sqrt(pp), nt = std::sqrt(tt);
    double cosine = 0.0;
    if (np < kTinyNorm || nt < kTinyNorm) {
      warn("cosine_row_loss: zero-norm vector, cosine taken as 0");
    } else {
      cosine = pt / (np * nt);
    }
    total += 1.0 - cosine;
  }
  node(id).val[0] = total / n;
  if (recording) {
    std::vector<double> target_copy(target.begin(), target.end());
    node(id).back = [this, id, pi = pred.id_, n, d, target_copy = std::move(target_copy)] {
      const double g = node(id).grad[0];
      const auto& pv = node(pi).val;
      auto& gp = node(pi).grad;
      for (int i = 0; i < n; ++i) {
        const double* p = pv.data() + static_cast<std::size_t>(i) * d;
        const double* t = target_copy.data() + static_cast<std::size_t>(i) * d;
        double pp = 0.0, tt = 0.0, pt = 0.0;
        for (int j = 0; j < d; ++j) {
          pp += p[j] * p[j];
          tt += t[j] * t[j];
          pt += p[j] * t[j];
        }
        const double np = std::sqrt(pp), nt = std::sqrt(tt);
        if (np < kTinyNorm || nt < kTinyNorm) continue;
        const double inv = 1.0 / (np * nt);
        const double cosine = pt * inv;
        double* gprow = gp.data() + static_cast<std::size_t>(i) * d;
        // d(1-cos)/dp = -(t/(|p||t|) - cos * p/|p|^2)
        for (int j = 0; j < d; ++j)
          gprow[j] += g * (-(t[j] * inv - cosine * p[j] / pp)) / n;
      }
    };
  }
  return own(id);
}

void Tape::backward(Tensor loss) {
  check_same_tape(loss);
  if (!recording) fail(ErrorCode::kInternal, "backward on a non-recording tape");
  const auto& ln = node(loss.id_);
  if (ln.val.size() != 1)
    fail(ErrorCode::kInvalidArgument, "backward: loss must be a scalar");
  for (auto& n : nodes_) {
    if (!n.is_leaf) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  }
  node(loss.id_).grad[0] += 1.0;
  for (int id = loss.id_; id >= 0; --id) {
    if (nodes_[id].back) nodes_[id].back();
  }
}

void Tape::zero_all_grads() {
  for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

void Tape::reset() { nodes_.clear(); }

}  // namespace mmt::ad
