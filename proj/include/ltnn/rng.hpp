// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "ltnn/tensor.hpp"

namespace ltnn {

/// Seeded 64-bit Mersenne Twister stream. Distributions are derived here
/// rather than through <random> adaptors so sequences are stable across
/// standard library vendors.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) {
    const double x = lo + (hi - lo) * uniform();
    return x < hi ? x : std::nextafter(hi, lo);
  }

  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// n draws in [lo, hi).
Vector rng_uniform(RngStream& stream, double lo, double hi, Index n);

/// Glorot-style uniform initialisation: U[-L, L) with L = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(RngStream& stream, Index rows, Index cols, Index fan_in, Index fan_out);

}  // namespace ltnn
