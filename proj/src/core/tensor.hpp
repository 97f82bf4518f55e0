// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense 2-d double tensors with tape-based reverse-mode differentiation.
// The op set is exactly what the molecular transformer needs; there is no
// broadcasting beyond that. A Tensor is a cheap handle (tape pointer + node
// id); all storage lives in the Tape and is dropped on reset().

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace mmt::ad {

class Tape;

class Tensor {
 public:
  Tensor() = default;

  int rows() const;
  int cols() const;
  std::span<const double> value() const;
  std::span<const double> grad() const;
  double scalar() const;  // value of a [1,1] tensor
  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// One entry of a weighted gather: out[p] += weight * table[index].
struct GatherItem {
  int index;
  double weight;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // When false, ops compute values only (no grads, no backward closures).
  // Used for finite-difference sweeps where only the loss value matters.
  bool recording = true;

  Tensor leaf(int rows, int cols, std::span<const double> data);
  Tensor constant(int rows, int cols, std::span<const double> data);

  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor scale(Tensor a, double factor);
  Tensor matmul(Tensor a, Tensor b);
  Tensor transpose(Tensor a);
  Tensor sum(Tensor a);
  Tensor softmax_rows(Tensor a);
  Tensor gelu(Tensor a);
  Tensor layer_norm(Tensor x, Tensor gain, Tensor bias);
  Tensor reshape(Tensor a, int rows, int cols);
  Tensor slice(Tensor a, int r0, int c0, int rows, int cols);
  Tensor concat_rows(Tensor a, Tensor b);
  Tensor concat_cols3(Tensor a, Tensor b, Tensor c);
  // out[g] = sum over group g of table rows.
  Tensor rows_sum(Tensor table, std::vector<std::vector<int>> groups);
  // out[g] = sum of `block` consecutive input rows starting at g*block.
  Tensor row_block_sum(Tensor a, int block);
  Tensor weighted_gather(Tensor table, std::vector<std::vector<GatherItem>> items,
                         int rows, int cols);
  // Gaussian basis features of pairwise distances. dist has P entries,
  // gamma/beta are [P,1], mu/sigma are [1,K]; the result is [P,K].
  Tensor gaussian_basis(std::span<const double> dist, Tensor gamma, Tensor beta,
                        Tensor mu, Tensor sigma);
  // Mean over rows of (1 - cosine(pred_row, target_row)); target is fixed.
  Tensor cosine_row_loss(Tensor pred, std::span<const double> target);

  // Reverse pass from a scalar loss. Leaf grads accumulate across calls;
  // intermediate grads are recomputed each time.
  void backward(Tensor loss);

  void zero_all_grads();
  void reset();
  std::size_t size() const { return nodes_.size(); }

  static constexpr double kLayerNormEps = 1e-5;

 private:
  friend class Tensor;

  struct Node {
    int rows = 0, cols = 0;
    std::vector<double> val;
    std::vector<double> grad;
    bool is_leaf = false;
    std::function<void()> back;
  };

  Node& node(int id) { return nodes_[id]; }
  const Node& node(int id) const { return nodes_[id]; }
  int new_node(int rows, int cols);
  Tensor own(int node_id) { return Tensor(this, node_id); }
  void check_same_tape(Tensor t) const;

  std::vector<Node> nodes_;
};

}  // namespace mmt::ad
