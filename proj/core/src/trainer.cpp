// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/trainer.hpp"

#include <numeric>

#include "slidegraph/error.hpp"
#include "slidegraph/rng.hpp"

namespace slidegraph {

LossCurve fit_per_sample(ParameterSet& params, std::size_t sample_count, const TrainConfig& config,
                         const SampleLoss& loss) {
  require(sample_count > 0, "training needs at least one sample");
  require(config.epochs > 0, "training needs at least one epoch");
  require(config.lr >= 0.0, "learning rate must be non-negative");

  AdamState adam = AdamState::for_params(params, AdamConfig{.weight_decay = config.weight_decay});
  const CosineSchedule schedule{config.lr, config.epochs * sample_count, config.floor_lr};
  Rng shuffle(mix_seed(config.seed, 0x5u));
  std::vector<std::size_t> order(sample_count);
  LossCurve curve;
  std::int64_t step = 0;
  std::vector<Tensor> g(params.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    curve.epoch_lr.push_back(cosine_lr(step, schedule));
    double total = 0.0;
    for (std::size_t idx : order) {
      Tape tape;
      std::vector<Var> bound = params.bind(tape);
      Var l = loss(tape, bound, idx);
      Gradients grads = tape.backward(l);
      for (std::size_t i = 0; i < bound.size(); ++i) g[i] = grads.at(bound[i]);
      adam_step(params, g, adam, cosine_lr(step, schedule));
      ++step;
      total += l.value().item();
    }
    curve.epoch_loss.push_back(total / static_cast<double>(sample_count));
  }
  return curve;
}

}  // namespace slidegraph
