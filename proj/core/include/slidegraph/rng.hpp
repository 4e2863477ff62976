// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace slidegraph {

// Portable random source. The bit stream of std::mt19937_64 is fixed by the
// C++ standard; every derived variate below is computed by hand so that a
// given seed yields the same sequence on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal variate (Box-Muller, one value per call).
  double normal();

  /// Independent child stream derived from this generator's seed material.
  Rng fork(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to derive seeds for child streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace slidegraph
