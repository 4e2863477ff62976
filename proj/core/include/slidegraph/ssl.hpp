// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slidegraph/autodiff.hpp"
#include "slidegraph/checkpoint.hpp"
#include "slidegraph/optim.hpp"
#include "slidegraph/params.hpp"
#include "slidegraph/raster.hpp"
#include "slidegraph/tissue.hpp"

namespace slidegraph {

class Rng;

namespace ssl {

/// Feature tap points of the patch encoder.
enum class Tap { Small, Large };

std::string_view tap_name(Tap tap);
/// Accepts "small" / "large"; anything else is a ContractViolation.
Tap parse_tap(std::string_view name);

/// MLP patch encoder. Body layers are `hidden` followed by one layer of width
/// `tap_small_dim`, all ReLU. The large tap is the (last) hidden layer whose
/// width equals `tap_large_dim`; the small tap is the final body layer. A
/// linear projection head maps the small tap to the contrastive space.
struct EncoderConfig {
  std::size_t patch_size = 32;
  std::vector<std::size_t> hidden{512, 256};
  std::size_t tap_small_dim = 64;
  std::size_t tap_large_dim = 256;
  std::size_t projection_dim = 64;
  /// Per-channel input standardisation: x = (v - mean[c]) / scale[c].
  std::array<double, 3> input_mean{127.5, 127.5, 127.5};
  std::array<double, 3> input_scale{127.5, 127.5, 127.5};

  std::size_t input_dim() const { return patch_size * patch_size * 3; }
  std::size_t tap_dim(Tap tap) const { return tap == Tap::Small ? tap_small_dim : tap_large_dim; }
  /// Index of the body layer whose output is the large tap.
  std::size_t large_tap_layer() const;
  std::size_t body_layers() const { return hidden.size() + 1; }
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Standardised pixels flattened in (y, x, channel) order.
void write_input_row(const RasterImage& patch, const EncoderConfig& config, std::span<double> row);
Tensor images_to_input(std::span<const RasterImage> images, const EncoderConfig& config);

/// Sets input_mean / input_scale to the per-channel mean and standard
/// deviation over `images` (scale floored at 1).
void fit_input_standardization(EncoderConfig& config, std::span<const RasterImage> images);

class Encoder {
 public:
  Encoder(EncoderConfig config, std::uint64_t seed);
  Encoder(EncoderConfig config, ParameterSet params);

  const EncoderConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  struct TapeOutputs {
    Var large;
    Var small;
    /// Projection head output, L2-normalised per row.
    Var query;
  };
  /// Forward on a tape; `bound` are this encoder's parameters bound to the
  /// same tape (variables or constants), in params() order.
  TapeOutputs forward(std::span<const Var> bound, Var input) const;

  struct Outputs {
    Tensor large;
    Tensor small;
    Tensor query;
  };
  /// Tape-free forward with an arbitrary parameter set of this layout.
  static Outputs forward_values(const EncoderConfig& config, const ParameterSet& params, const Tensor& input);
  Outputs forward_values(const Tensor& input) const { return forward_values(config_, params_, input); }

 private:
  EncoderConfig config_;
  ParameterSet params_;
};

/// Encoder configuration travels in the checkpoint metadata under "ssl.*".
Checkpoint to_checkpoint(const Encoder& encoder);
Encoder from_checkpoint(const Checkpoint& ckpt);

struct AugmentationParams {
  double p_hflip = 0.5;
  double p_vflip = 0.5;
  double contrast_lo = 0.7;
  double contrast_hi = 1.3;
  double p_blur = 0.5;
  double sigma_lo = 0.1;
  double sigma_hi = 1.5;

  /// No randomness: the identity augmentation.
  static AugmentationParams none() { return {0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0}; }
  void validate() const;
};

RasterImage flip_horizontal(const RasterImage& image);
RasterImage flip_vertical(const RasterImage& image);
/// Scale every sample about the mean of all samples, round, clamp to [0, 255].
RasterImage adjust_contrast(const RasterImage& image, double factor);
/// Separable Gaussian blur, kernel radius ceil(3 sigma), reflect padding.
RasterImage gaussian_blur(const RasterImage& image, double sigma);

/// In fixed order: optional h-flip, optional v-flip, contrast jitter, optional blur.
RasterImage augment(const RasterImage& image, const AugmentationParams& params, Rng& rng);

/// FIFO dictionary of unit-norm keys.
class FeatureQueue {
 public:
  FeatureQueue(std::size_t capacity, std::size_t dim);

  /// Rows of `keys` ([B, dim]) appended in order; oldest entries evicted past
  /// capacity. Rows whose norm is off 1 by more than 1e-6 are rejected
  /// (ContractViolation, queue unchanged).
  void enqueue(const Tensor& keys);

  std::size_t size() const { return keys_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return keys_.empty(); }
  /// i = 0 is the oldest stored key.
  const std::vector<double>& key(std::size_t i) const { return keys_.at(i); }
  /// Stored keys as a [size, dim] matrix, oldest first. Requires !empty().
  Tensor matrix() const;

 private:
  std::size_t capacity_;
  std::size_t dim_;
  std::deque<std::vector<double>> keys_;
};

/// Mean over rows of -log(exp(q.k+/tau) / (exp(q.k+/tau) + sum_neg exp(q.k-/tau)))
/// with log-sum-exp stabilisation. `q` and `k_pos` are [B, D]; `k_pos` is
/// typically a constant. Differentiable with respect to q.
Var info_nce(Var q, Var k_pos, const FeatureQueue& queue, double tau);
/// Single-query form.
double info_nce(std::span<const double> q, std::span<const double> k_pos, const FeatureQueue& queue, double tau);

/// theta_k <- m * theta_k + (1 - m) * theta_q, elementwise.
void momentum_update(const ParameterSet& query, ParameterSet& key, double momentum);

struct PretrainHyper {
  std::size_t epochs = 20;
  std::size_t batch = 32;
  double lr = 1e-3;
  double weight_decay = 1e-6;
  double tau = 0.2;
  double momentum = 0.99;
  std::size_t queue_capacity = 4096;
  double floor_lr = 0.0;
  /// Fit the encoder's input standardisation to the training patches first.
  bool standardize_inputs = true;
};

struct PretrainResult {
  Encoder query;
  ParameterSet momentum_params;
  AdamState adam;
  std::vector<double> epoch_loss;
  std::uint64_t steps = 0;
};

/// Called after every optimizer step with the step index (1-based) and the
/// updated query parameters.
using PretrainObserver = std::function<void(std::uint64_t step, const ParameterSet& query)>;

/// Contrastive pretraining with a momentum key encoder and a FIFO negative
/// queue. The queue holds min(queue_capacity, patch count) keys and starts
/// filled with momentum-encoder keys of augmented training patches.
/// Deterministic in `seed`.
PretrainResult pretrain(std::span<const RasterImage> patches, const EncoderConfig& config,
                        const AugmentationParams& augmentation, const PretrainHyper& hyper, std::uint64_t seed,
                        const PretrainObserver& observer = {});

/// Raw activations of the tap layer for one non-augmented patch.
std::vector<double> extract_features(const Encoder& encoder, const RasterImage& patch, Tap tap);

/// Both taps for many patches, processed in fixed-size chunks; row i belongs
/// to patches[i].
struct FeatureMatrices {
  Tensor small;
  Tensor large;
};
FeatureMatrices extract_features(const Encoder& encoder, std::span<const Patch> patches);

}  // namespace ssl
}  // namespace slidegraph
