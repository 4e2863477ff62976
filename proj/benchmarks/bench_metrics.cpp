// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "slidegraph/metrics.hpp"
#include "slidegraph/rng.hpp"

namespace {

void BM_QuadraticKappa(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  slidegraph::Rng rng(6);
  std::vector<int> actual(n), predicted(n);
  for (auto& v : actual) v = static_cast<int>(rng.below(6));
  for (auto& v : predicted) v = static_cast<int>(rng.below(6));
  for (auto _ : state) benchmark::DoNotOptimize(slidegraph::metrics::quadratic_weighted_kappa(actual, predicted, 6));
}
BENCHMARK(BM_QuadraticKappa)->Arg(100)->Arg(10000);

}  // namespace
