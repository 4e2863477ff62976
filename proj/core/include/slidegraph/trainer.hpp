// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "slidegraph/autodiff.hpp"
#include "slidegraph/optim.hpp"
#include "slidegraph/params.hpp"

namespace slidegraph {

/// Supervised training settings shared by the graph classifier and the tile
/// baseline. Updates are always per sample (batch size 1).
struct TrainConfig {
  static constexpr std::size_t kBatchSize = 1;

  std::size_t epochs = 30;
  double lr = 1e-4;
  double weight_decay = 1e-6;
  double floor_lr = 0.0;
  std::uint64_t seed = 0;
};

struct LossCurve {
  std::vector<double> epoch_loss;
  /// Learning rate in effect at the first step of each epoch.
  std::vector<double> epoch_lr;
};

/// Builds the scalar loss of sample `index` on `tape` from the bound parameters.
using SampleLoss = std::function<Var(Tape& tape, std::span<const Var> params, std::size_t index)>;

/// Shuffled (seeded) pass over `sample_count` samples per epoch, one Adam step
/// per sample, cosine learning rate over all steps.
LossCurve fit_per_sample(ParameterSet& params, std::size_t sample_count, const TrainConfig& config,
                         const SampleLoss& loss);

}  // namespace slidegraph
