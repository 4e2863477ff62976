// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "slidegraph/tensor.hpp"

namespace slidegraph {

/// Constant sparse matrix in compressed-row form. Used for graph adjacency
/// operators, which never carry gradients themselves.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;  // rows + 1 entries
  std::vector<std::size_t> col_index;
  std::vector<double> values;

  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  /// Entries may come in any order; duplicates are summed.
  static SparseMatrix from_entries(std::size_t rows, std::size_t cols,
                                   std::vector<Entry> entries);
  SparseMatrix transposed() const;
  std::size_t nnz() const { return values.size(); }
  Tensor dense() const;
};

Tensor spmm(const SparseMatrix& s, const Tensor& x);

enum class OpKind {
  Leaf,
  MatMul,
  Add,
  AddBias,
  Mul,
  Scale,
  Relu,
  L2NormalizeRows,
  Mean,
  Sum,
  SumAll,
  SoftmaxCrossEntropy,
  GatherRows,
  ScatterAddRows,
  SparseMatMul,
  ConcatCols,
};

std::string_view op_name(OpKind kind);

class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; only valid while the
/// tape is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients of a scalar loss with respect to every trainable leaf on the tape.
class Gradients {
 public:
  /// nullptr when the variable was not a trainable leaf of the source tape.
  const Tensor* find(Var v) const;
  /// Throws ContractViolation when absent.
  const Tensor& at(Var v) const;
  std::size_t size() const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<std::optional<Tensor>> by_node_;
};

/// Accumulates adjoints into parent gradient buffers during the backward sweep.
class GradSink {
 public:
  /// Zero-initialised on first access.
  Tensor& operator[](std::size_t node);
  bool wants(std::size_t node) const;

 private:
  friend class Tape;
  GradSink(const Tape& tape, std::vector<std::optional<Tensor>>& grads)
      : tape_(tape), grads_(grads) {}

  const Tape& tape_;
  std::vector<std::optional<Tensor>>& grads_;
};

/// Reverse-mode autodiff tape. Nodes are appended in evaluation order, so the
/// node index is a topological order and backward simply walks it in reverse.
class Tape {
 public:
  using Adjoint = std::function<void(const Tensor& out_grad, GradSink& sink)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf.
  Var variable(Tensor value);
  Var constant(Tensor value);

  /// Gradients of a one-element loss. The tape is not modified and can be
  /// replayed or cleared afterwards.
  Gradients backward(Var loss) const;

  void clear();
  std::size_t size() const { return nodes_.size(); }
  OpKind kind(std::size_t node) const { return nodes_.at(node).kind; }
  std::span<const std::size_t> parents(std::size_t node) const { return nodes_.at(node).parents; }
  const Tensor& value(std::size_t node) const { return nodes_.at(node).value; }
  bool requires_grad(std::size_t node) const { return nodes_.at(node).requires_grad; }

  /// Append an operation node. The adjoint runs only when the node is on a
  /// gradient path.
  Var record(OpKind kind, Tensor value, std::vector<std::size_t> parents, Adjoint adjoint);

  /// Order in which the last backward() call visited nodes (for inspection).
  const std::vector<std::size_t>& last_backward_order() const { return last_order_; }

 private:
  friend class Var;

  struct Node {
    OpKind kind;
    Tensor value;
    std::vector<std::size_t> parents;
    Adjoint adjoint;
    bool requires_grad;
    bool trainable_leaf;
  };

  std::vector<Node> nodes_;
  mutable std::vector<std::size_t> last_order_;
};

// Differentiable primitives. All operands must live on the same tape.

/// [m,k] x [k,n]
Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// x [m,n] + b [n] (or [1,n]) broadcast over rows.
Var add_bias(Var x, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double c);
Var relu(Var x);
/// Each nonzero row divided by its Euclidean norm; zero rows stay zero.
Var l2_normalize_rows(Var x);
/// Rank-2 mean over axis 0 ([1,n]) or axis 1 ([m,1]).
Var mean(Var x, std::size_t axis);
Var sum(Var x, std::size_t axis);
/// Sum of every element, shape [1].
Var sum_all(Var x);
/// Mean over rows of -log softmax(logits[r])[labels[r]]. A rank-1 [C] input
/// is treated as a single row. Uses max-subtraction for stability.
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels);
Var softmax_cross_entropy(Var logits, std::size_t label);
/// out[i] = x[index[i]]
Var gather_rows(Var x, std::span<const std::size_t> index);
/// out[index[i]] += x[i], out has `rows` rows.
Var scatter_add_rows(Var x, std::span<const std::size_t> index, std::size_t rows);
/// S * x with a constant sparse S.
Var spmm(const SparseMatrix& s, Var x);
Var concat_cols(Var a, Var b);

/// Row-wise softmax of a rank-1 or rank-2 tensor (not recorded).
Tensor softmax_rows(const Tensor& logits);

}  // namespace slidegraph
