// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0
//
// Geometry-side structural encodings built on Gaussian basis features of
// pairwise Euclidean distances: the per-head 3D distance bias and the summed
// distance centrality. Everything here is a function of distances only, so
// the outputs are invariant under rigid motions of the coordinates.

#pragma once

#include <span>
#include <vector>

#include "core/molecule.hpp"

namespace mmt {

// Packed index of the unordered atom-type pair (a, b) in an upper-triangular
// table over `types` atom types.
int sym_pair_index(int a, int b, int types);
inline int sym_pair_count(int types) { return types * (types + 1) / 2; }

// Read-only view of the Gaussian basis parameters. gamma/beta are packed
// symmetric tables indexed by sym_pair_index.
struct GbfView {
  std::span<const double> mu;     // K
  std::span<const double> sigma;  // K (absolute value is used; clamped >= 1e-3 by the optimizer)
  std::span<const double> gamma;  // sym_pair_count(types)
  std::span<const double> beta;   // sym_pair_count(types)
  std::span<const double> wd1;    // K x K
  std::span<const double> wd2;    // K x H
  std::span<const double> wd3;    // K x d
  int kernels = 0;
  int types = 0;
};

// Kernel features for every ordered pair, [n*n x K]; row p = i*n + j.
Mat gbf_features(std::span<const Vec3> coords, std::span<const int> atom_types,
                 const GbfView& p);

// GELU(psi W1) W2, one n x n matrix per head.
std::vector<Mat> distance_bias(const Mat& psi, const GbfView& p, int heads);

// Row i = (sum_j psi[i][j]) W3, [n x dim]. Self pairs are included.
Mat centrality_3d(const Mat& psi, const GbfView& p, int dim);

}  // namespace mmt
