// SPDX-License-Identifier: Apache-2.0
#include "ltnn/rng.hpp"

#include <cmath>
#include <limits>

namespace ltnn {

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw ArgumentError("RngStream::below: n must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

Vector rng_uniform(RngStream& stream, double lo, double hi, Index n) {
  if (!(lo < hi)) throw ArgumentError("rng_uniform: lo must be < hi");
  if (n < 0) throw ArgumentError("rng_uniform: negative count");
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = stream.uniform(lo, hi);
  return out;
}

Matrix glorot_uniform(RngStream& stream, Index rows, Index cols, Index fan_in, Index fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = stream.uniform(-limit, limit);
  return m;
}

}  // namespace ltnn
