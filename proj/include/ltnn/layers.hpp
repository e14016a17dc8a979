// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ltnn/rng.hpp"
#include "ltnn/tensor.hpp"

namespace ltnn {

enum class Mode { kTrain, kEval };

/// A convolution window of `size` positions; `mask[o]` is false for the
/// deactivated (skipped) offsets, which always form one contiguous run of
/// `gap` positions strictly inside the window.
struct WindowShape {
  Index size = 0;
  Index gap = 0;
  std::vector<bool> mask;

  static WindowShape plain(Index size);

  Index activated_count() const { return size - gap; }
  std::vector<Index> activated_offsets() const;
  /// "OXOO"-style rendering.
  std::string pattern() const;

  bool operator==(const WindowShape&) const = default;
};

/// All shapes of a size-j window with a gap of i consecutive deactivated
/// positions, ordered by gap start (1-indexed start k in {2, ..., j - i}).
std::vector<WindowShape> gapped_window_shapes(Index gap, Index size);

// ---------------------------------------------------------------------------
// Convolution (stride 1, no padding, ReLU)

/// kernel is F x (activated_count * d): row f holds the activated offsets in
/// order, each a block of d channels. Deactivated offsets carry no weights.
struct ConvLayer {
  WindowShape shape;
  Matrix kernel;
  Vector bias;

  Index filters() const { return kernel.rows(); }
  Index channels() const { return shape.activated_count() == 0 ? 0 : kernel.cols() / shape.activated_count(); }
};

ConvLayer make_conv_layer(const WindowShape& shape, Index channels, Index filters, RngStream& rng);

struct ConvCache {
  Matrix output;  // T' x F, post-ReLU
};

/// Row p gathers the input rows under the activated offsets at position p:
/// T' x (activated_count * d).
Matrix window_patches(const Matrix& input, const WindowShape& shape);

/// Output length T - j + 1.
Index conv_output_length(Index input_length, const WindowShape& shape);

/// Pre-activation output bias + sum over activated offsets of input x kernel.
Matrix conv1d_preactivation(const Matrix& input, const ConvLayer& layer);
Matrix conv1d_forward(const Matrix& input, const ConvLayer& layer, ConvCache* cache = nullptr);

struct ConvGrads {
  Matrix kernel;
  Vector bias;
  Matrix input;
};

/// Gradients under the ReLU sub-gradient (0 at exactly 0). The input
/// gradient is skipped when `need_input_grad` is false.
ConvGrads conv1d_backward(const Matrix& input, const ConvLayer& layer, const ConvCache& cache, const Matrix& upstream,
                          bool need_input_grad = true);

// ---------------------------------------------------------------------------
// Pooling

struct PoolResult {
  Matrix output;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> argmax;  // source row per output cell
  Index input_rows = 0;
};

Index pool_output_length(Index input_length, Index pool, Index stride);

/// Valid max pooling along time; ties resolve to the lowest row.
PoolResult maxpool1d(const Matrix& input, Index pool = 4, Index stride = 4);
Matrix maxpool1d_backward(const PoolResult& forward, const Matrix& upstream);

struct GlobalPoolResult {
  Vector output;
  Eigen::Matrix<Index, Eigen::Dynamic, 1> argmax;
  Index input_rows = 0;
};

GlobalPoolResult global_maxpool(const Matrix& input);
Matrix global_maxpool_backward(const GlobalPoolResult& forward, const Vector& upstream);

// ---------------------------------------------------------------------------
// GRU: h_t = (1 - z) * h_{t-1} + z * tanh(x W_h + (r * h_{t-1}) U_h + b_h)

struct GruLayer {
  Matrix w_z, w_r, w_h;  // d_in x h
  Matrix u_z, u_r, u_h;  // h x h
  Vector b_z, b_r, b_h;  // h

  Index input_dim() const { return w_z.rows(); }
  Index units() const { return w_z.cols(); }
};

GruLayer make_gru_layer(Index input_dim, Index units, RngStream& rng);

struct GruCache {
  Matrix input;     // T x d_in
  Matrix h_prev;    // T x h, row t is h_{t-1}
  Matrix z, r, candidate;
};

Matrix gru_forward(const Matrix& input, const GruLayer& layer, GruCache* cache = nullptr);

struct GruGrads {
  Matrix w_z, w_r, w_h;
  Matrix u_z, u_r, u_h;
  Vector b_z, b_r, b_h;
  Matrix input;
};

GruGrads gru_backward(const GruCache& cache, const GruLayer& layer, const Matrix& upstream);

// ---------------------------------------------------------------------------
// Dropout (inverted) and dense

struct DropoutCache {
  Matrix scale;  // 0 or 1 / (1 - ratio) per element; empty when identity
};

Matrix dropout(const Matrix& input, double ratio, Mode mode, RngStream* rng, DropoutCache* cache = nullptr);
Matrix dropout_backward(const DropoutCache& cache, const Matrix& upstream);

struct DenseLayer {
  Matrix weights;  // d x n
  Vector bias;     // n
};

DenseLayer make_dense_layer(Index inputs, Index outputs, RngStream& rng);

Vector dense_forward(const Vector& input, const Matrix& weights, const Vector& bias);

struct DenseGrads {
  Matrix weights;
  Vector bias;
  Vector input;
};

DenseGrads dense_backward(const Vector& input, const Matrix& weights, const Vector& upstream);

}  // namespace ltnn
