// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0

#include "core/encodings2d.hpp"

#include <algorithm>
#include <map>

namespace mmt {

ShortestPaths shortest_paths(const Molecule& m) {
  const int n = m.atom_count();
  ShortestPaths sp;
  sp.n = n;
  sp.dist.assign(static_cast<std::size_t>(n) * n, kUnreachable);
  sp.path_bonds.assign(static_cast<std::size_t>(n) * n, {});

  std::vector<std::vector<int>> adj(n);
  std::map<std::pair<int, int>, int> bond_index;
  for (int b = 0; b < static_cast<int>(m.bonds.size()); ++b) {
    const auto& bond = m.bonds[b];
    adj[bond.i].push_back(bond.j);
    adj[bond.j].push_back(bond.i);
    bond_index[std::minmax(bond.i, bond.j)] = b;
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());

  std::vector<int> pred(n), queue(n);
  for (int s = 0; s < n; ++s) {
    std::fill(pred.begin(), pred.end(), -1);
    int head = 0, tail = 0;
    queue[tail++] = s;
    sp.dist[static_cast<std::size_t>(s) * n + s] = 0;
    while (head < tail) {
      const int u = queue[head++];
      const int du = sp.dist[static_cast<std::size_t>(s) * n + u];
      for (int v : adj[u]) {
        auto& dv = sp.dist[static_cast<std::size_t>(s) * n + v];
        if (dv != kUnreachable) continue;
        dv = du + 1;
        pred[v] = u;
        queue[tail++] = v;
      }
    }
    for (int t = 0; t < n; ++t) {
      if (t == s || sp.dist[static_cast<std::size_t>(s) * n + t] == kUnreachable) continue;
      auto& path = sp.path_bonds[static_cast<std::size_t>(s) * n + t];
      for (int v = t; v != s; v = pred[v])
        path.push_back(bond_index.at(std::minmax(v, pred[v])));
      std::reverse(path.begin(), path.end());
    }
  }
  return sp;
}

int spd_bucket(int dist, int d_max) {
  if (dist == kUnreachable) return d_max + 1;
  return std::min(dist, d_max);
}

std::vector<Mat> spd_bias(const ShortestPaths& sp, std::span<const double> table,
                          int heads, int d_max) {
  const int buckets = spd_bucket_count(d_max);
  if (table.size() != static_cast<std::size_t>(heads) * buckets)
    fail(ErrorCode::kInvalidArgument, "spd_bias: table size mismatch");
  std::vector<Mat> out;
  out.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    Mat phi(sp.n, sp.n);
    for (int i = 0; i < sp.n; ++i)
      for (int j = 0; j < sp.n; ++j)
        phi.at(i, j) = table[static_cast<std::size_t>(h) * buckets +
                             spd_bucket(sp.at(i, j), d_max)];
    out.push_back(std::move(phi));
  }
  return out;
}

std::vector<Mat> edge_bias(const ShortestPaths& sp, const Molecule& m,
                           const std::vector<std::vector<double>>& bond_embeddings,
                           std::span<const double> weights, int heads, int d_max,
                           int edge_dim) {
  if (bond_embeddings.size() != m.bonds.size())
    fail(ErrorCode::kInvalidArgument, "edge_bias: one embedding per bond required");
  if (weights.size() != static_cast<std::size_t>(heads) * d_max * edge_dim)
    fail(ErrorCode::kInvalidArgument, "edge_bias: weight size mismatch");
  std::vector<Mat> out(heads, Mat(sp.n, sp.n));
  bool warned = false;
  for (int i = 0; i < sp.n; ++i) {
    for (int j = 0; j < sp.n; ++j) {
      const auto& path = sp.path(i, j);
      if (path.empty()) continue;  // diagonal and unreachable pairs stay 0
      int len = static_cast<int>(path.size());
      if (len > d_max) {
        if (!warned) {
          warn("edge_bias: path of length " + std::to_string(len) +
               " truncated to " + std::to_string(d_max));
          warned = true;
        }
        len = d_max;
      }
      for (int h = 0; h < heads; ++h) {
        double acc = 0.0;
        for (int p = 0; p < len; ++p) {
          const auto& emb = bond_embeddings[path[p]];
          const double* w = weights.data() +
                            (static_cast<std::size_t>(h) * d_max + p) * edge_dim;
          for (int e = 0; e < edge_dim; ++e) acc += emb[e] * w[e];
        }
        out[h].at(i, j) = acc / len;
      }
    }
  }
  return out;
}

Mat degree_encoding(const Molecule& m, std::span<const double> table, int deg_max,
                    int dim) {
  if (table.size() != static_cast<std::size_t>(deg_max + 1) * dim)
    fail(ErrorCode::kInvalidArgument, "degree_encoding: table size mismatch");
  const auto deg = degrees(m);
  Mat out(m.atom_count(), dim);
  for (int i = 0; i < m.atom_count(); ++i) {
    const int bucket = std::min(deg[i], deg_max);
    for (int j = 0; j < dim; ++j)
      out.at(i, j) = table[static_cast<std::size_t>(bucket) * dim + j];
  }
  return out;
}

}  // namespace mmt
