// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slidegraph/error.hpp"

namespace slidegraph {

AdamState AdamState::for_params(const ParameterSet& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const auto& e : params.entries()) {
    s.first_moment.emplace_back(e.value.shape());
    s.second_moment.emplace_back(e.value.shape());
  }
  return s;
}

void adam_step(ParameterSet& params, std::span<const Tensor> grads, AdamState& state, double lr) {
  require(grads.size() == params.size() && state.first_moment.size() == params.size() &&
              state.second_moment.size() == params.size(),
          "adam_step: parameter, gradient and moment counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].same_shape(grads[i]) && params[i].same_shape(state.first_moment[i]) &&
                params[i].same_shape(state.second_moment[i]),
            [&] { return "adam_step: shape mismatch for parameter " + params.name(i); });
  }

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mhat = m[j] / bias1;
      const double vhat = v[j] / bias2;
      p[j] -= lr * c.weight_decay * p[j];
      p[j] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

double cosine_lr(std::int64_t step, const CosineSchedule& schedule) {
  require(schedule.total_steps > 0, "cosine schedule needs total_steps > 0");
  const auto total = static_cast<std::int64_t>(schedule.total_steps);
  step = std::clamp<std::int64_t>(step, 0, total);
  if (step == total) return schedule.floor_lr;
  const double frac = static_cast<double>(step) / static_cast<double>(total);
  return schedule.floor_lr +
         (schedule.initial_lr - schedule.floor_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace slidegraph
