// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "slidegraph/gcn.hpp"
#include "slidegraph/rng.hpp"
#include "slidegraph/wsigraph.hpp"

namespace {

using namespace slidegraph;

std::vector<Point2> scatter(std::size_t n, Rng& rng) {
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = {rng.uniform(0.0, 1000.0), rng.uniform(0.0, 1000.0)};
  return pts;
}

void BM_KnnGraph(benchmark::State& state) {
  Rng rng(3);
  const auto pts = scatter(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(knn_graph(pts, 8));
}
BENCHMARK(BM_KnnGraph)->RangeMultiplier(4)->Range(64, 1024);

// Slide-sized graph with the default two-layer GCN.
void BM_GcnForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  Tensor features({n, 64});
  for (double& v : features.data()) v = rng.normal();
  const WSIGraph graph = build_slide_graph(features, scatter(n, rng), 8, 0);
  gcn::GCNConfig config;
  config.input_dim = 64;
  config.num_classes = 3;
  const gcn::GCNModel model(config, 5);
  const gcn::PreparedGraph prepared = gcn::prepare(graph, config);
  for (auto _ : state) benchmark::DoNotOptimize(gcn::forward(prepared, model));
}
BENCHMARK(BM_GcnForward)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace
