// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slidegraph/params.hpp"
#include "slidegraph/tensor.hpp"

namespace slidegraph {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled (AdamW-style) decay, applied as p -= lr * weight_decay * p.
  double weight_decay = 1e-6;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// First/second moment estimates for every parameter of a ParameterSet.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  static AdamState for_params(const ParameterSet& params, AdamConfig config = {});
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update in place. `grads[i]` pairs with `params[i]`.
void adam_step(ParameterSet& params, std::span<const Tensor> grads, AdamState& state, double lr);

struct CosineSchedule {
  double initial_lr = 1e-3;
  std::uint64_t total_steps = 1;
  double floor_lr = 0.0;
};

/// floor + (initial - floor) * (1 + cos(pi * step / total)) / 2, with `step`
/// clamped to [0, total_steps].
double cosine_lr(std::int64_t step, const CosineSchedule& schedule);

}  // namespace slidegraph
