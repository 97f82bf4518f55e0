// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0
//
// Graph-side structural encodings: all-pairs shortest path distances with a
// deterministic reconstructed path per pair, the per-head SPD bias, the edge
// encoding along shortest paths, and the degree encoding. The plain functions
// here take parameter tables as raw spans; the model replays the same lookups
// through the tape when gradients are required.

#pragma once

#include <span>
#include <vector>

#include "core/molecule.hpp"

namespace mmt {

inline constexpr int kUnreachable = -1;

struct ShortestPaths {
  int n = 0;
  std::vector<int> dist;                     // n*n, kUnreachable for disconnected pairs
  std::vector<std::vector<int>> path_bonds;  // bond indices along one shortest path i->j

  int at(int i, int j) const { return dist[static_cast<std::size_t>(i) * n + j]; }
  const std::vector<int>& path(int i, int j) const {
    return path_bonds[static_cast<std::size_t>(i) * n + j];
  }
};

// BFS from every atom, expanding neighbors in ascending index order so the
// reconstructed path is deterministic.
ShortestPaths shortest_paths(const Molecule& m);

// Bucket layout: 0..d_max hold clamped distances, d_max+1 the unreachable
// pairs, d_max+2 the pseudo atom.
int spd_bucket(int dist, int d_max);
inline int spd_bucket_count(int d_max) { return d_max + 3; }

// table is [heads x (d_max+3)] row-major; one n*n matrix per head.
std::vector<Mat> spd_bias(const ShortestPaths& sp, std::span<const double> table,
                          int heads, int d_max);

// bond_embeddings holds one embedded feature vector (length edge_dim) per bond
// of the molecule; weights is [heads x d_max x edge_dim] row-major. Pairs with
// no path (and the diagonal) encode to zero; paths longer than d_max are
// truncated with a warning.
std::vector<Mat> edge_bias(const ShortestPaths& sp, const Molecule& m,
                           const std::vector<std::vector<double>>& bond_embeddings,
                           std::span<const double> weights, int heads, int d_max,
                           int edge_dim);

// table is [(deg_max+1) x dim] row-major; lookups clamp at deg_max.
Mat degree_encoding(const Molecule& m, std::span<const double> table, int deg_max,
                    int dim);

}  // namespace mmt
