// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "slidegraph/autodiff.hpp"
#include "slidegraph/rng.hpp"
#include "slidegraph/tensor.hpp"

namespace {

using namespace slidegraph;

Tensor filled(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = filled({n, n}, rng), b = filled({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(32, 256);

// One forward and backward pass through a two-layer MLP on a batch of 64.
void BM_MlpBackward(benchmark::State& state) {
  Rng rng(2);
  const Tensor x = filled({64, 128}, rng), w1 = filled({128, 64}, rng), w2 = filled({64, 8}, rng);
  for (auto _ : state) {
    Tape tape;
    const Var a = tape.variable(w1), b = tape.variable(w2);
    const Var loss = sum_all(matmul(relu(matmul(tape.constant(x), a)), b));
    benchmark::DoNotOptimize(tape.backward(loss).at(a));
  }
}
BENCHMARK(BM_MlpBackward);

}  // namespace
