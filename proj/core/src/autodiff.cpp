// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "slidegraph/error.hpp"

namespace slidegraph {

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix SparseMatrix::from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
  for (const Entry& e : entries)
    require(e.row < rows && e.col < cols, "sparse entry out of range");
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix s;
  s.rows = rows;
  s.cols = cols;
  s.row_offsets.assign(rows + 1, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (!s.col_index.empty() && i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
      s.values.back() += e.value;
      continue;
    }
    s.col_index.push_back(e.col);
    s.values.push_back(e.value);
    ++s.row_offsets[e.row + 1];
  }
  std::partial_sum(s.row_offsets.begin(), s.row_offsets.end(), s.row_offsets.begin());
  return s;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Entry> entries;
  entries.reserve(nnz());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = row_offsets[r]; i < row_offsets[r + 1]; ++i)
      entries.push_back({col_index[i], r, values[i]});
  return from_entries(cols, rows, std::move(entries));
}

Tensor SparseMatrix::dense() const {
  Tensor d({rows, cols});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = row_offsets[r]; i < row_offsets[r + 1]; ++i) d.at(r, col_index[i]) += values[i];
  return d;
}

Tensor spmm(const SparseMatrix& s, const Tensor& x) {
  require(x.rank() == 2 && x.rows() == s.cols,
          [&] { return "spmm shape mismatch: sparse [" + std::to_string(s.rows) + "," + std::to_string(s.cols) +
              "] x " + shape_string(x.shape()); });
  const std::size_t d = x.cols();
  Tensor out({s.rows, d});
  for (std::size_t r = 0; r < s.rows; ++r) {
    auto orow = out.row(r);
    for (std::size_t i = s.row_offsets[r]; i < s.row_offsets[r + 1]; ++i) {
      const double w = s.values[i];
      auto xrow = x.row(s.col_index[i]);
      for (std::size_t j = 0; j < d; ++j) orow[j] += w * xrow[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tape

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::AddBias: return "add_bias";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::Relu: return "relu";
    case OpKind::L2NormalizeRows: return "l2_normalize_rows";
    case OpKind::Mean: return "mean";
    case OpKind::Sum: return "sum";
    case OpKind::SumAll: return "sum_all";
    case OpKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    case OpKind::GatherRows: return "gather_rows";
    case OpKind::ScatterAddRows: return "scatter_add_rows";
    case OpKind::SparseMatMul: return "spmm";
    case OpKind::ConcatCols: return "concat_cols";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  require(tape_ != nullptr, "use of an unbound Var");
  return tape_->nodes_.at(id_).value;
}

Tensor& GradSink::operator[](std::size_t node) {
  auto& slot = grads_.at(node);
  if (!slot) slot.emplace(tape_.value(node).shape());
  return *slot;
}

bool GradSink::wants(std::size_t node) const { return tape_.requires_grad(node); }

const Tensor* Gradients::find(Var v) const {
  if (v.tape() != tape_ || v.id() >= by_node_.size() || !by_node_[v.id()]) return nullptr;
  return &*by_node_[v.id()];
}

const Tensor& Gradients::at(Var v) const {
  const Tensor* g = find(v);
  require(g != nullptr, "no gradient recorded for variable");
  return *g;
}

std::size_t Gradients::size() const {
  return static_cast<std::size_t>(
      std::count_if(by_node_.begin(), by_node_.end(), [](const auto& g) { return g.has_value(); }));
}

Var Tape::variable(Tensor value) {
  nodes_.push_back({OpKind::Leaf, std::move(value), {}, nullptr, true, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back({OpKind::Leaf, std::move(value), {}, nullptr, false, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind kind, Tensor value, std::vector<std::size_t> parents, Adjoint adjoint) {
  bool needs = false;
  for (std::size_t p : parents) {
    require(p < nodes_.size(), "tape parent index out of range");
    needs = needs || nodes_[p].requires_grad;
  }
  require(kind == OpKind::Leaf || adjoint != nullptr, "operation recorded without an adjoint rule");
  nodes_.push_back({kind, std::move(value), std::move(parents), std::move(adjoint), needs, false});
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var loss) const {
  require(loss.tape() == this, "backward: loss belongs to a different tape");
  const Node& root = nodes_.at(loss.id());
  require(root.value.size() == 1,
          [&] { return "backward: loss must be a scalar, got shape " + shape_string(root.value.shape()); });

  std::vector<std::optional<Tensor>> grads(nodes_.size());
  grads[loss.id()].emplace(root.value.shape(), 1.0);
  GradSink sink(*this, grads);
  last_order_.clear();

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.requires_grad || !grads[i]) continue;
    last_order_.push_back(i);
    if (node.kind == OpKind::Leaf) continue;
    node.adjoint(*grads[i], sink);
  }

  Gradients out;
  out.tape_ = this;
  out.by_node_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].trainable_leaf) continue;
    if (grads[i])
      out.by_node_[i] = std::move(*grads[i]);
    else
      out.by_node_[i].emplace(nodes_[i].value.shape(), 0.0);
  }
  return out;
}

void Tape::clear() {
  nodes_.clear();
  last_order_.clear();
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

Tape& common_tape(Var a) {
  require(a.valid(), "operation on an unbound Var");
  return *a.tape();
}

Tape& common_tape(Var a, Var b) {
  require(a.valid() && b.valid() && a.tape() == b.tape(), "operands live on different tapes");
  return *a.tape();
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

std::size_t as_rows(const Tensor& t) { return t.rank() == 1 ? 1 : t.shape()[0]; }
std::size_t as_cols(const Tensor& t) { return t.rank() == 1 ? t.shape()[0] : t.shape()[1]; }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  Tensor out = matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(OpKind::MatMul, std::move(out), {ia, ib},
                     [&tape, ia, ib](const Tensor& g, GradSink& sink) {
                       if (sink.wants(ia)) add_into(sink[ia], matmul_nt(g, tape.value(ib)));
                       if (sink.wants(ib)) add_into(sink[ib], matmul_tn(tape.value(ia), g));
                     });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require(a.value().same_shape(b.value()), [&] { return "add shape mismatch: " + shape_string(a.shape()) + " vs " +
                                                shape_string(b.shape()); });
  Tensor out = a.value();
  add_into(out, b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(OpKind::Add, std::move(out), {ia, ib}, [ia, ib](const Tensor& g, GradSink& sink) {
    if (sink.wants(ia)) add_into(sink[ia], g);
    if (sink.wants(ib)) add_into(sink[ib], g);
  });
}

Var add_bias(Var x, Var b) {
  Tape& tape = common_tape(x, b);
  const Tensor& xv = x.value();
  const Tensor& bv = b.value();
  require(xv.rank() == 2 && bv.size() == xv.cols() && as_rows(bv) == 1,
          [&] { return "add_bias shape mismatch: " + shape_string(xv.shape()) + " + " + shape_string(bv.shape()); });
  Tensor out = xv;
  const std::size_t n = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t j = 0; j < n; ++j) out.at(r, j) += bv[j];
  const std::size_t ix = x.id(), ib = b.id();
  return tape.record(OpKind::AddBias, std::move(out), {ix, ib}, [ix, ib, n](const Tensor& g, GradSink& sink) {
    if (sink.wants(ix)) add_into(sink[ix], g);
    if (sink.wants(ib)) {
      Tensor& gb = sink[ib];
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t j = 0; j < n; ++j) gb[j] += g.at(r, j);
    }
  });
}

Var mul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require(a.value().same_shape(b.value()), [&] { return "mul shape mismatch: " + shape_string(a.shape()) + " vs " +
                                                shape_string(b.shape()); });
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(OpKind::Mul, std::move(out), {ia, ib}, [&tape, ia, ib](const Tensor& g, GradSink& sink) {
    const Tensor& av = tape.value(ia);
    const Tensor& bv = tape.value(ib);
    if (sink.wants(ia)) {
      Tensor& ga = sink[ia];
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (sink.wants(ib)) {
      Tensor& gb = sink[ib];
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var x, double c) {
  Tape& tape = common_tape(x);
  Tensor out = x.value();
  for (double& v : out.data()) v *= c;
  const std::size_t ix = x.id();
  return tape.record(OpKind::Scale, std::move(out), {ix}, [ix, c](const Tensor& g, GradSink& sink) {
    Tensor& gx = sink[ix];
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += c * g[i];
  });
}

Var relu(Var x) {
  Tape& tape = common_tape(x);
  Tensor out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return tape.record(OpKind::Relu, std::move(out), {ix}, [&tape, ix](const Tensor& g, GradSink& sink) {
    const Tensor& xv = tape.value(ix);
    Tensor& gx = sink[ix];
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  });
}

Var l2_normalize_rows(Var x) {
  Tape& tape = common_tape(x);
  const Tensor& xv = x.value();
  const std::size_t m = as_rows(xv), n = as_cols(xv);
  Tensor out = xv;
  std::vector<double> norms(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += xv[r * n + j] * xv[r * n + j];
    norms[r] = std::sqrt(s);
    if (norms[r] > 0.0)
      for (std::size_t j = 0; j < n; ++j) out[r * n + j] = xv[r * n + j] / norms[r];
  }
  const std::size_t ix = x.id();
  const std::size_t iy = tape.size();
  return tape.record(OpKind::L2NormalizeRows, std::move(out), {ix},
                     [&tape, ix, iy, m, n, norms = std::move(norms)](const Tensor& g, GradSink& sink) {
                       const Tensor& y = tape.value(iy);
                       Tensor& gx = sink[ix];
                       // d(x/|x|) = (g - y (y.g)) / |x|
                       for (std::size_t r = 0; r < m; ++r) {
                         if (norms[r] == 0.0) continue;
                         double dot = 0.0;
                         for (std::size_t j = 0; j < n; ++j) dot += y[r * n + j] * g[r * n + j];
                         for (std::size_t j = 0; j < n; ++j)
                           gx[r * n + j] += (g[r * n + j] - y[r * n + j] * dot) / norms[r];
                       }
                     });
}

Var sum(Var x, std::size_t axis) {
  Tape& tape = common_tape(x);
  const Tensor& xv = x.value();
  require(xv.rank() == 2 && axis < 2, "sum(axis) needs a rank-2 tensor and axis 0 or 1");
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor out(axis == 0 ? Shape{1, n} : Shape{m, 1});
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j < n; ++j) out[axis == 0 ? j : r] += xv.at(r, j);
  const std::size_t ix = x.id();
  return tape.record(OpKind::Sum, std::move(out), {ix}, [ix, axis, m, n](const Tensor& g, GradSink& sink) {
    Tensor& gx = sink[ix];
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t j = 0; j < n; ++j) gx.at(r, j) += g[axis == 0 ? j : r];
  });
}

Var mean(Var x, std::size_t axis) {
  Tape& tape = common_tape(x);
  const Tensor& xv = x.value();
  require(xv.rank() == 2 && axis < 2, "mean(axis) needs a rank-2 tensor and axis 0 or 1");
  const std::size_t m = xv.rows(), n = xv.cols();
  const double count = static_cast<double>(axis == 0 ? m : n);
  Tensor out(axis == 0 ? Shape{1, n} : Shape{m, 1});
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j < n; ++j) out[axis == 0 ? j : r] += xv.at(r, j);
  for (double& v : out.data()) v /= count;
  const std::size_t ix = x.id();
  return tape.record(OpKind::Mean, std::move(out), {ix},
                     [ix, axis, m, n, count](const Tensor& g, GradSink& sink) {
                       Tensor& gx = sink[ix];
                       for (std::size_t r = 0; r < m; ++r)
                         for (std::size_t j = 0; j < n; ++j) gx.at(r, j) += g[axis == 0 ? j : r] / count;
                     });
}

Var sum_all(Var x) {
  Tape& tape = common_tape(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t ix = x.id();
  return tape.record(OpKind::SumAll, Tensor::scalar(s), {ix}, [ix](const Tensor& g, GradSink& sink) {
    Tensor& gx = sink[ix];
    const double gs = g[0];
    for (double& v : gx.data()) v += gs;
  });
}

Tensor softmax_rows(const Tensor& logits) {
  const std::size_t m = as_rows(logits), n = as_cols(logits);
  Tensor p = logits;
  for (std::size_t r = 0; r < m; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, logits[r * n + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[r * n + j] = std::exp(logits[r * n + j] - mx);
      z += p[r * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) p[r * n + j] /= z;
  }
  return p;
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
  Tape& tape = common_tape(logits);
  const Tensor& lv = logits.value();
  require(lv.rank() <= 2, "softmax_cross_entropy needs rank-1 or rank-2 logits");
  const std::size_t m = as_rows(lv), n = as_cols(lv);
  require(n >= 2, "softmax_cross_entropy needs at least two classes");
  require(labels.size() == m, [&] { return "softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                  std::to_string(m) + " rows"; });
  for (std::size_t lab : labels)
    require(lab < n,
            [&] { return "label " + std::to_string(lab) + " out of range for " + std::to_string(n) + " classes"; });

  Tensor probs = softmax_rows(lv);
  double loss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, lv[r * n + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(lv[r * n + j] - mx);
    loss += -(lv[r * n + labels[r]] - mx - std::log(z));
  }
  loss /= static_cast<double>(m);

  const std::size_t il = logits.id();
  std::vector<std::size_t> labs(labels.begin(), labels.end());
  return tape.record(OpKind::SoftmaxCrossEntropy, Tensor::scalar(loss), {il},
                     [il, m, n, probs = std::move(probs), labs = std::move(labs)](const Tensor& g,
                                                                                  GradSink& sink) {
                       Tensor& gl = sink[il];
                       const double s = g[0] / static_cast<double>(m);
                       for (std::size_t r = 0; r < m; ++r)
                         for (std::size_t j = 0; j < n; ++j)
                           gl[r * n + j] += s * (probs[r * n + j] - (j == labs[r] ? 1.0 : 0.0));
                     });
}

Var softmax_cross_entropy(Var logits, std::size_t label) {
  const std::size_t labels[1] = {label};
  return softmax_cross_entropy(logits, std::span<const std::size_t>(labels));
}

Var gather_rows(Var x, std::span<const std::size_t> index) {
  Tape& tape = common_tape(x);
  const Tensor& xv = x.value();
  require(xv.rank() == 2, "gather_rows needs a rank-2 tensor");
  require(!index.empty(), "gather_rows needs a nonempty index list");
  const std::size_t n = xv.cols();
  Tensor out({index.size(), n});
  for (std::size_t i = 0; i < index.size(); ++i) {
    require(index[i] < xv.rows(), "gather_rows index out of range");
    std::copy_n(xv.row(index[i]).begin(), n, out.row(i).begin());
  }
  const std::size_t ix = x.id();
  std::vector<std::size_t> idx(index.begin(), index.end());
  return tape.record(OpKind::GatherRows, std::move(out), {ix},
                     [ix, n, idx = std::move(idx)](const Tensor& g, GradSink& sink) {
                       Tensor& gx = sink[ix];
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t j = 0; j < n; ++j) gx.at(idx[i], j) += g.at(i, j);
                     });
}

Var scatter_add_rows(Var x, std::span<const std::size_t> index, std::size_t rows) {
  Tape& tape = common_tape(x);
  const Tensor& xv = x.value();
  require(xv.rank() == 2 && index.size() == xv.rows(), "scatter_add_rows: one index per input row required");
  require(rows > 0, "scatter_add_rows needs a positive output row count");
  const std::size_t n = xv.cols();
  Tensor out({rows, n});
  for (std::size_t i = 0; i < index.size(); ++i) {
    require(index[i] < rows, "scatter_add_rows index out of range");
    for (std::size_t j = 0; j < n; ++j) out.at(index[i], j) += xv.at(i, j);
  }
  const std::size_t ix = x.id();
  std::vector<std::size_t> idx(index.begin(), index.end());
  return tape.record(OpKind::ScatterAddRows, std::move(out), {ix},
                     [ix, n, idx = std::move(idx)](const Tensor& g, GradSink& sink) {
                       Tensor& gx = sink[ix];
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t j = 0; j < n; ++j) gx.at(i, j) += g.at(idx[i], j);
                     });
}

Var spmm(const SparseMatrix& s, Var x) {
  Tape& tape = common_tape(x);
  Tensor out = spmm(s, x.value());
  const std::size_t ix = x.id();
  return tape.record(OpKind::SparseMatMul, std::move(out), {ix},
                     [ix, st = s.transposed()](const Tensor& g, GradSink& sink) {
                       add_into(sink[ix], spmm(st, g));
                     });
}

Var concat_cols(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.rank() == 2 && bv.rank() == 2 && av.rows() == bv.rows(),
          [&] { return "concat_cols shape mismatch: " + shape_string(av.shape()) + " | " + shape_string(bv.shape()); });
  const std::size_t m = av.rows(), p = av.cols(), q = bv.cols();
  Tensor out({m, p + q});
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(av.row(r).begin(), p, out.row(r).begin());
    std::copy_n(bv.row(r).begin(), q, out.row(r).begin() + static_cast<std::ptrdiff_t>(p));
  }
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(OpKind::ConcatCols, std::move(out), {ia, ib},
                     [ia, ib, m, p, q](const Tensor& g, GradSink& sink) {
                       if (sink.wants(ia)) {
                         Tensor& ga = sink[ia];
                         for (std::size_t r = 0; r < m; ++r)
                           for (std::size_t j = 0; j < p; ++j) ga.at(r, j) += g.at(r, j);
                       }
                       if (sink.wants(ib)) {
                         Tensor& gb = sink[ib];
                         for (std::size_t r = 0; r < m; ++r)
                           for (std::size_t j = 0; j < q; ++j) gb.at(r, j) += g.at(r, p + j);
                       }
                     });
}

}  // namespace slidegraph
