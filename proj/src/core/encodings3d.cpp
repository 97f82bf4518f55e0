// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0

#include "core/encodings3d.hpp"

#include <cmath>

namespace mmt {

int sym_pair_index(int a, int b, int types) {
  if (a < 0 || b < 0 || a >= types || b >= types)
    fail(ErrorCode::kData, "atom type " + std::to_string(std::max(a, b)) +
                               " outside the configured type vocabulary");
  if (a > b) std::swap(a, b);
  return a * types - a * (a - 1) / 2 + (b - a);
}

Mat gbf_features(std::span<const Vec3> coords, std::span<const int> atom_types,
                 const GbfView& p) {
  const int n = static_cast<int>(coords.size());
  if (atom_types.size() != coords.size())
    fail(ErrorCode::kInvalidArgument, "gbf_features: one atom type per coordinate");
  const int k_count = p.kernels;
  Mat psi(n * n, k_count);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int pair = sym_pair_index(atom_types[i], atom_types[j], p.types);
      const double t = p.gamma[pair] * distance(coords[i], coords[j]) + p.beta[pair];
      double* row = psi.a.data() + static_cast<std::size_t>(i * n + j) * k_count;
      for (int k = 0; k < k_count; ++k) {
        const double s = std::abs(p.sigma[k]);
        const double u = (t - p.mu[k]) / s;
        row[k] = -kInvSqrt2Pi / s * std::exp(-0.5 * u * u);
      }
    }
  }
  return psi;
}

std::vector<Mat> distance_bias(const Mat& psi, const GbfView& p, int heads) {
  const int k_count = p.kernels;
  const int pairs = psi.rows;
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pairs))));
  // hidden = GELU(psi W1)
  Mat hidden(pairs, k_count);
  for (int r = 0; r < pairs; ++r) {
    for (int c = 0; c < k_count; ++c) {
      double acc = 0.0;
      for (int k = 0; k < k_count; ++k)
        acc += psi.at(r, k) * p.wd1[static_cast<std::size_t>(k) * k_count + c];
      hidden.at(r, c) = gelu_value(acc);
    }
  }
  std::vector<Mat> out(heads, Mat(n, n));
  for (int r = 0; r < pairs; ++r) {
    for (int h = 0; h < heads; ++h) {
      double acc = 0.0;
      for (int k = 0; k < k_count; ++k)
        acc += hidden.at(r, k) * p.wd2[static_cast<std::size_t>(k) * heads + h];
      out[h].a[r] = acc;
    }
  }
  return out;
}

Mat centrality_3d(const Mat& psi, const GbfView& p, int dim) {
  const int k_count = p.kernels;
  const int pairs = psi.rows;
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pairs))));
  Mat out(n, dim);
  for (int i = 0; i < n; ++i) {
    std::vector<double> summed(k_count, 0.0);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < k_count; ++k) summed[k] += psi.at(i * n + j, k);
    for (int d = 0; d < dim; ++d) {
      double acc = 0.0;
      for (int k = 0; k < k_count; ++k)
        acc += summed[k] * p.wd3[static_cast<std::size_t>(k) * dim + d];
      out.at(i, d) = acc;
    }
  }
  return out;
}

}  // namespace mmt
