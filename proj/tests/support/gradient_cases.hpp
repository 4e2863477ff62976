// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "slidegraph/gcn.hpp"
#include "slidegraph/ssl.hpp"
#include "slidegraph/wsigraph.hpp"
#include "support.hpp"

namespace slidegraph::testing {

struct GradientCase {
  LossBuilder loss;
  std::vector<Tensor> inputs;
};

struct NamedCase {
  std::string name;
  std::function<GradientCase(Rng&)> make;
};

/// Values bounded away from zero so ReLU kinks sit far outside the FD step.
inline Tensor away_from_zero(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.05, 1.0);
  return t;
}

inline std::vector<Edge> random_edges(std::size_t n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) edges.push_back({u, v});
  return edges;
}

/// One entry per differentiable primitive plus the two graph layers, the
/// contrastive loss and a small two-layer network.
inline std::vector<NamedCase> gradient_cases() {
  std::vector<NamedCase> cases;
  auto unary = [&](std::string name, Shape shape, std::function<Var(Var)> op, Shape out_shape, bool kinked = false) {
    cases.push_back({name, [=](Rng& rng) {
                       auto w = std::make_shared<Tensor>(random_tensor(out_shape, rng));
                       Tensor x = kinked ? away_from_zero(shape, rng) : random_tensor(shape, rng);
                       return GradientCase{[=](Tape&, std::span<const Var> v) { return project(op(v[0]), *w); }, {x}};
                     }});
  };
  auto binary = [&](std::string name, Shape sa, Shape sb, std::function<Var(Var, Var)> op, Shape out_shape) {
    cases.push_back({name, [=](Rng& rng) {
                       auto w = std::make_shared<Tensor>(random_tensor(out_shape, rng));
                       return GradientCase{[=](Tape&, std::span<const Var> v) { return project(op(v[0], v[1]), *w); },
                                           {random_tensor(sa, rng), random_tensor(sb, rng)}};
                     }});
  };

  binary("matmul", {3, 4}, {4, 2}, [](Var a, Var b) { return matmul(a, b); }, {3, 2});
  binary("add", {3, 4}, {3, 4}, [](Var a, Var b) { return add(a, b); }, {3, 4});
  binary("add_bias", {3, 4}, {4}, [](Var a, Var b) { return add_bias(a, b); }, {3, 4});
  binary("mul", {3, 4}, {3, 4}, [](Var a, Var b) { return mul(a, b); }, {3, 4});
  binary("concat_cols", {3, 2}, {3, 4}, [](Var a, Var b) { return concat_cols(a, b); }, {3, 6});
  unary("scale", {3, 4}, [](Var x) { return scale(x, -1.7); }, {3, 4});
  unary("relu", {4, 5}, [](Var x) { return relu(x); }, {4, 5}, true);
  unary("l2_normalize_rows", {4, 5}, [](Var x) { return l2_normalize_rows(x); }, {4, 5}, true);
  unary("mean_axis0", {4, 3}, [](Var x) { return mean(x, 0); }, {1, 3});
  unary("mean_axis1", {4, 3}, [](Var x) { return mean(x, 1); }, {4, 1});
  unary("sum_axis0", {4, 3}, [](Var x) { return sum(x, 0); }, {1, 3});
  unary("sum_axis1", {4, 3}, [](Var x) { return sum(x, 1); }, {4, 1});
  unary("sum_all", {4, 3}, [](Var x) { return sum_all(x); }, {1});

  cases.push_back({"softmax_cross_entropy", [](Rng& rng) {
                     std::vector<std::size_t> labels(4);
                     for (auto& l : labels) l = rng.below(5);
                     return GradientCase{[=](Tape&, std::span<const Var> v) {
                                           return softmax_cross_entropy(scale(v[0], 3.0), labels);
                                         },
                                         {random_tensor({4, 5}, rng)}};
                   }});
  cases.push_back({"gather_rows", [](Rng& rng) {
                     std::vector<std::size_t> index(7);
                     for (auto& i : index) i = rng.below(5);
                     auto w = std::make_shared<Tensor>(random_tensor({7, 3}, rng));
                     return GradientCase{
                         [=](Tape&, std::span<const Var> v) { return project(gather_rows(v[0], index), *w); },
                         {random_tensor({5, 3}, rng)}};
                   }});
  cases.push_back({"scatter_add_rows", [](Rng& rng) {
                     std::vector<std::size_t> index(6);
                     for (auto& i : index) i = rng.below(4);
                     auto w = std::make_shared<Tensor>(random_tensor({4, 3}, rng));
                     return GradientCase{
                         [=](Tape&, std::span<const Var> v) { return project(scatter_add_rows(v[0], index, 4), *w); },
                         {random_tensor({6, 3}, rng)}};
                   }});
  cases.push_back({"spmm", [](Rng& rng) {
                     std::vector<SparseMatrix::Entry> entries;
                     for (std::size_t r = 0; r < 5; ++r)
                       for (std::size_t c = 0; c < 4; ++c)
                         if (rng.bernoulli(0.4)) entries.push_back({r, c, rng.uniform(-1.0, 1.0)});
                     auto s = std::make_shared<SparseMatrix>(SparseMatrix::from_entries(5, 4, entries));
                     auto w = std::make_shared<Tensor>(random_tensor({5, 3}, rng));
                     return GradientCase{[=](Tape&, std::span<const Var> v) { return project(spmm(*s, v[0]), *w); },
                                         {random_tensor({4, 3}, rng)}};
                   }});
  cases.push_back({"info_nce", [](Rng& rng) {
                     auto queue = std::make_shared<ssl::FeatureQueue>(6, 5);
                     Tensor keys = random_tensor({6, 5}, rng);
                     for (std::size_t r = 0; r < 6; ++r) {
                       double n = 0;
                       for (double x : keys.row(r)) n += x * x;
                       for (double& x : keys.row(r)) x /= std::sqrt(n);
                     }
                     queue->enqueue(keys);
                     auto k = std::make_shared<Tensor>(random_tensor({3, 5}, rng));
                     auto loss = [=](Tape& tape, std::span<const Var> v) {
                       return ssl::info_nce(l2_normalize_rows(v[0]), tape.constant(*k), *queue, 0.2);
                     };
                     return GradientCase{loss, {random_tensor({3, 5}, rng)}};
                   }});
  cases.push_back({"gcn_layer", [](Rng& rng) {
                     const std::size_t n = 6;
                     auto a = std::make_shared<SparseMatrix>(
                         normalize_adjacency(random_edges(n, 0.4, rng), n, true).matrix());
                     auto w = std::make_shared<Tensor>(random_tensor({n, 3}, rng));
                     return GradientCase{
                         [=](Tape&, std::span<const Var> v) { return project(gcn::gcn_layer(v[0], *a, v[1]), *w); },
                         {random_tensor({n, 4}, rng), random_tensor({4, 3}, rng)}};
                   }});
  cases.push_back({"basic_gnn_layer", [](Rng& rng) {
                     const std::size_t n = 6;
                     auto a = std::make_shared<SparseMatrix>(adjacency_matrix(random_edges(n, 0.4, rng), n));
                     auto w = std::make_shared<Tensor>(random_tensor({n, 3}, rng));
                     return GradientCase{[=](Tape&, std::span<const Var> v) {
                                           return project(gcn::basic_gnn_layer(v[0], *a, v[1], v[2], v[3]), *w);
                                         },
                                         {random_tensor({n, 4}, rng), random_tensor({4, 3}, rng),
                                          random_tensor({4, 3}, rng), random_tensor({3}, rng)}};
                   }});
  cases.push_back({"two_layer_relu_net", [](Rng& rng) {
                     // 2x3 + 3 + 3x2 + 2 = 17 parameters.
                     auto x = std::make_shared<Tensor>(random_tensor({4, 2}, rng));
                     std::vector<std::size_t> labels(4);
                     for (auto& l : labels) l = rng.below(2);
                     return GradientCase{[=](Tape& tape, std::span<const Var> v) {
                                           Var h = relu(add_bias(matmul(tape.constant(*x), v[0]), v[1]));
                                           return softmax_cross_entropy(add_bias(matmul(h, v[2]), v[3]), labels);
                                         },
                                         {random_tensor({2, 3}, rng), random_tensor({3}, rng),
                                          random_tensor({3, 2}, rng), random_tensor({2}, rng)}};
                   }});
  return cases;
}

}  // namespace slidegraph::testing
