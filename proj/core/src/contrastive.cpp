// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "slidegraph/error.hpp"
#include "slidegraph/log.hpp"
#include "slidegraph/rng.hpp"
#include "slidegraph/ssl.hpp"

namespace slidegraph::ssl {

FeatureQueue::FeatureQueue(std::size_t capacity, std::size_t dim) : capacity_(capacity), dim_(dim) {
  require(capacity > 0 && dim > 0, "feature queue needs positive capacity and dimension");
}

void FeatureQueue::enqueue(const Tensor& keys) {
  require(keys.rank() == 2 && keys.cols() == dim_,
          [&] { return "queue keys must be [batch, " + std::to_string(dim_) + "], got " +
                       shape_string(keys.shape()); });
  for (std::size_t r = 0; r < keys.rows(); ++r) {
    double s = 0.0;
    for (double v : keys.row(r)) s += v * v;
    require(std::abs(std::sqrt(s) - 1.0) <= 1e-6,
            [&] { return "queue key " + std::to_string(r) + " is not unit-normalised"; });
  }
  for (std::size_t r = 0; r < keys.rows(); ++r) {
    keys_.emplace_back(keys.row(r).begin(), keys.row(r).end());
    if (keys_.size() > capacity_) keys_.pop_front();
  }
}

Tensor FeatureQueue::matrix() const {
  require(!keys_.empty(), "empty queue has no key matrix");
  Tensor m({keys_.size(), dim_});
  for (std::size_t i = 0; i < keys_.size(); ++i) std::copy(keys_[i].begin(), keys_[i].end(), m.row(i).begin());
  return m;
}

Var info_nce(Var q, Var k_pos, const FeatureQueue& queue, double tau) {
  require(tau > 0.0, "info_nce temperature must be positive");
  // Copy the extents: recording new nodes may move the tape's storage.
  const Shape q_shape = q.shape();
  require(q_shape.size() == 2 && q_shape == k_pos.shape(), "info_nce: q and k+ must be equal-shape [B, D]");
  require(q_shape[1] == queue.dim(), "info_nce: query dimension differs from queue dimension");
  Tape& tape = *q.tape();

  Var positive = sum(mul(q, k_pos), 1);  // [B, 1]
  if (queue.empty()) {
    // A lone positive gives -log(1) = 0 for every row.
    return scale(sum_all(positive), 0.0);
  }
  Tensor negatives_t = queue.matrix();
  Tensor transposed({queue.dim(), queue.size()});
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (std::size_t j = 0; j < queue.dim(); ++j) transposed.at(j, i) = negatives_t.at(i, j);
  Var negative = matmul(q, tape.constant(std::move(transposed)));  // [B, K]
  Var logits = scale(concat_cols(positive, negative), 1.0 / tau);
  const std::vector<std::size_t> labels(q_shape[0], 0);
  return softmax_cross_entropy(logits, labels);
}

double info_nce(std::span<const double> q, std::span<const double> k_pos, const FeatureQueue& queue, double tau) {
  require(q.size() == k_pos.size(), "info_nce: q and k+ differ in length");
  Tape tape;
  Var qv = tape.constant(Tensor({1, q.size()}, std::vector<double>(q.begin(), q.end())));
  Var kv = tape.constant(Tensor({1, k_pos.size()}, std::vector<double>(k_pos.begin(), k_pos.end())));
  return info_nce(qv, kv, queue, tau).value().item();
}

void momentum_update(const ParameterSet& query, ParameterSet& key, double momentum) {
  require(momentum >= 0.0 && momentum <= 1.0, "momentum must lie in [0,1]");
  require(query.same_layout(key), "momentum_update: query and key parameter shapes differ");
  for (std::size_t i = 0; i < query.size(); ++i) {
    auto k = key[i].data();
    auto q = query[i].data();
    for (std::size_t j = 0; j < k.size(); ++j) k[j] = momentum * k[j] + (1.0 - momentum) * q[j];
  }
}

namespace {

// A key whose projection collapsed to zero (every unit of the small tap dead)
// has no direction; it is left out of the dictionary.
void enqueue_unit_rows(FeatureQueue& queue, const Tensor& keys) {
  std::vector<double> kept;
  std::size_t rows = 0;
  for (std::size_t r = 0; r < keys.rows(); ++r) {
    double s = 0.0;
    for (double v : keys.row(r)) s += v * v;
    if (std::abs(std::sqrt(s) - 1.0) > 1e-6) continue;
    kept.insert(kept.end(), keys.row(r).begin(), keys.row(r).end());
    ++rows;
  }
  if (rows == keys.rows()) {
    queue.enqueue(keys);
  } else {
    log::warn("dropping " + std::to_string(keys.rows() - rows) + " degenerate keys");
    if (rows > 0) queue.enqueue(Tensor({rows, keys.cols()}, std::move(kept)));
  }
}

}  // namespace

PretrainResult pretrain(std::span<const RasterImage> patches, const EncoderConfig& base_config,
                        const AugmentationParams& augmentation, const PretrainHyper& hyper, std::uint64_t seed,
                        const PretrainObserver& observer) {
  require(patches.size() >= 2, "pretrain needs at least two patches");
  require(hyper.epochs > 0 && hyper.batch > 0, "pretrain needs positive epochs and batch size");
  require(hyper.tau > 0.0, "pretrain temperature must be positive");
  EncoderConfig config = base_config;
  if (hyper.standardize_inputs) fit_input_standardization(config, patches);
  config.validate();
  augmentation.validate();
  for (const RasterImage& p : patches)
    require(p.width() == config.patch_size && p.height() == config.patch_size,
            "pretrain patch size differs from the encoder configuration");

  std::size_t batch = hyper.batch;
  if (batch > patches.size()) {
    log::warn("pretrain batch " + std::to_string(batch) + " exceeds patch count " + std::to_string(patches.size()) +
              "; clamping");
    batch = patches.size();
  }
  const std::size_t capacity = std::min(hyper.queue_capacity, patches.size());

  Encoder query(config, seed);
  ParameterSet key = query.params();
  AdamState adam = AdamState::for_params(query.params(), AdamConfig{.weight_decay = hyper.weight_decay});
  FeatureQueue queue(capacity, config.projection_dim);
  // Start from a full dictionary of momentum-encoder keys of augmented
  // patches so the number and difficulty of negatives hold steady from the
  // first step.
  {
    Rng init_rng(mix_seed(seed, 0x0EEE));
    std::vector<std::size_t> pick(patches.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    for (std::size_t i = 0; i < capacity; ++i) std::swap(pick[i], pick[i + init_rng.below(pick.size() - i)]);
    Tensor x({capacity, config.input_dim()});
    for (std::size_t i = 0; i < capacity; ++i)
      write_input_row(augment(patches[pick[i]], augmentation, init_rng), config, x.row(i));
    enqueue_unit_rows(queue, Encoder::forward_values(config, key, x).query);
  }
  Rng order_rng(mix_seed(seed, 0x0DE5));
  Rng aug_rng(mix_seed(seed, 0xA06));

  const std::size_t steps_per_epoch = (patches.size() + batch - 1) / batch;
  const CosineSchedule schedule{hyper.lr, hyper.epochs * steps_per_epoch, hyper.floor_lr};

  PretrainResult result{query, key, adam, {}, 0};
  std::vector<std::size_t> order(patches.size());
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t n = std::min(batch, order.size() - begin);
      Tensor xq({n, config.input_dim()});
      Tensor xk({n, config.input_dim()});
      for (std::size_t i = 0; i < n; ++i) {
        const RasterImage& src = patches[order[begin + i]];
        write_input_row(augment(src, augmentation, aug_rng), config, xq.row(i));
        write_input_row(augment(src, augmentation, aug_rng), config, xk.row(i));
      }

      // Key branch: momentum encoder, never on the tape.
      Tensor keys = Encoder::forward_values(config, key, xk).query;

      Tape tape;
      std::vector<Var> bound = query.params().bind(tape);
      Var q = query.forward(bound, tape.constant(std::move(xq))).query;
      Var loss = info_nce(q, tape.constant(keys), queue, hyper.tau);
      Gradients grads = tape.backward(loss);
      std::vector<Tensor> g;
      g.reserve(bound.size());
      for (Var v : bound) g.push_back(grads.at(v));

      adam_step(query.params(), g, adam, cosine_lr(static_cast<std::int64_t>(step), schedule));
      momentum_update(query.params(), key, hyper.momentum);
      enqueue_unit_rows(queue, keys);
      ++step;
      epoch_loss += loss.value().item() * static_cast<double>(n);
      if (observer) observer(step, query.params());
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }

  result.query = std::move(query);
  result.momentum_params = std::move(key);
  result.adam = std::move(adam);
  result.steps = step;
  return result;
}

}  // namespace slidegraph::ssl
