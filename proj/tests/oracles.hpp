// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltnn/layers.hpp"
#include "ltnn/model.hpp"
#include "ltnn/training.hpp"
#include "test_support.hpp"

namespace ltnn::testing {

// ---------------------------------------------------------------------------
// Convolution

/// Masked dense oracle: a full-width kernel whose deactivated columns are
/// zero, evaluated with plain loops.
inline Matrix dense_masked_conv(const Matrix& input, const WindowShape& shape, const Matrix& kernel,
                                const Vector& bias) {
  const Index d = input.cols(), filters = kernel.rows(), out_len = input.rows() - shape.size + 1;
  Matrix full = Matrix::Zero(filters, shape.size * d);
  Index rank = 0;
  for (Index o = 0; o < shape.size; ++o) {
    if (!shape.mask[static_cast<std::size_t>(o)]) continue;
    full.middleCols(o * d, d) = kernel.middleCols(rank * d, d);
    ++rank;
  }
  Matrix out(out_len, filters);
  for (Index p = 0; p < out_len; ++p) {
    for (Index f = 0; f < filters; ++f) {
      double acc = bias(f);
      for (Index o = 0; o < shape.size; ++o) {
        for (Index c = 0; c < d; ++c) acc += input(p + o, c) * full(f, o * d + c);
      }
      out(p, f) = acc;
    }
  }
  return out;
}

/// Jitters `input` until no pre-activation sits within `margin` of the ReLU
/// kink; false if no such draw was found.
inline bool move_off_kinks(Matrix& input, const ConvLayer& layer, RngStream& rng, double margin = 1e-4) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    if (conv1d_preactivation(input, layer).cwiseAbs().minCoeff() > margin) return true;
    input += random_matrix(rng, input.rows(), input.cols(), -1e-3, 1e-3);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Models

inline EmbeddingMatrix random_embeddings(Index vocab, Index dim, std::uint64_t seed) {
  RngStream rng(seed);
  EmbeddingMatrix e;
  e.weights = random_matrix(rng, vocab, dim);
  e.weights.row(kPadIndex).setZero();
  return e;
}

/// Sequences of random length in [1, seq_len], PAD-filled to seq_len.
inline std::vector<IndexSequence> random_batch(RngStream& rng, std::size_t batch, Index seq_len, Index vocab) {
  std::vector<IndexSequence> out(batch);
  for (auto& seq : out) {
    const Index length = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(seq_len)));
    seq.assign(static_cast<std::size_t>(seq_len), kPadIndex);
    for (Index t = 0; t < length; ++t) {
      seq[static_cast<std::size_t>(t)] = 1 + static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(vocab - 1)));
    }
  }
  return out;
}

struct OracleResult {
  Matrix probs;
  double margin = INFINITY;  // distance to the nearest kink or tie
};

/// Smallest gap between the winner and runner-up of any positive pooling window.
inline double pool_margin(const Matrix& x, Index pool, Index stride) {
  double margin = INFINITY;
  for (Index start = 0; start + pool <= x.rows(); start += stride) {
    for (Index f = 0; f < x.cols(); ++f) {
      Vector window = x.col(f).segment(start, pool);
      std::sort(window.data(), window.data() + window.size(), std::greater<>());
      if (window(0) > 0.0 && pool > 1) margin = std::min(margin, window(0) - window(1));
    }
  }
  return margin;
}

inline Matrix naive_pool(const Matrix& x, Index pool, Index stride) {
  const Index out = (x.rows() - pool) / stride + 1;
  Matrix y(out, x.cols());
  for (Index w = 0; w < out; ++w) y.row(w) = x.middleRows(w * stride, pool).colwise().maxCoeff();
  return y;
}

/// Independent forward pass used as a wiring oracle and to screen for
/// non-differentiable points (ReLU kinks, near-ties in max pooling).
inline OracleResult oracle_forward(const Model& model, const std::vector<IndexSequence>& batch,
                                   std::uint64_t dropout_seed, Mode mode) {
  const ModelConfig& c = model.config();
  const LayerSet& L = model.layers();
  RngStream rng(dropout_seed);
  OracleResult r;
  r.probs.resize(static_cast<Index>(batch.size()), c.n_classes);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    Matrix embedded(c.seq_len, c.emb_dim);
    for (Index t = 0; t < c.seq_len; ++t) embedded.row(t) = L.embedding.row(batch[b][static_cast<std::size_t>(t)]);
    Matrix shared;
    if (!c.per_branch_dropout) shared = dropout(embedded, c.dropout, mode, &rng);
    std::vector<Matrix> pooled;
    for (const auto& conv : L.convs) {
      const Matrix input = c.per_branch_dropout ? dropout(embedded, c.dropout, mode, &rng) : shared;
      const Matrix pre = conv1d_preactivation(input, conv);
      r.margin = std::min(r.margin, pre.cwiseAbs().minCoeff());
      const Matrix act = pre.cwiseMax(0.0);
      r.margin = std::min(r.margin, pool_margin(act, c.pool, c.pool_stride));
      pooled.push_back(naive_pool(act, c.pool, c.pool_stride));
    }
    Index rows = 0;
    for (const auto& p : pooled) rows += p.rows();
    Matrix concat(rows, c.filters);
    rows = 0;
    for (const auto& p : pooled) {
      concat.middleRows(rows, p.rows()) = p;
      rows += p.rows();
    }
    Matrix stage = concat;
    if (c.uses_second_pooling()) {
      r.margin = std::min(r.margin, pool_margin(concat, c.pool, c.pool_stride));
      stage = naive_pool(concat, c.pool, c.pool_stride);
    }
    Vector features;
    if (L.gru) {
      const Matrix h = gru_forward(stage, *L.gru);
      r.margin = std::min(r.margin, pool_margin(h.array() + 10.0, h.rows(), 1));
      features = h.colwise().maxCoeff().transpose();
    } else {
      features.resize(stage.size());
      Index k = 0;
      for (Index t = 0; t < stage.rows(); ++t) {
        for (Index f = 0; f < stage.cols(); ++f) features(k++) = stage(t, f);
      }
    }
    const Vector logits = L.dense.weights.transpose() * features + L.dense.bias;
    const Vector e = (logits.array() - logits.maxCoeff()).exp();
    r.probs.row(static_cast<Index>(b)) = (e / e.sum()).transpose();
  }
  return r;
}

struct TensorCheck {
  std::string name;
  double error = INFINITY;  // max elementwise relative error
  bool pad_row_zero = true;
};

/// End-to-end central differences of the mean cross-entropy over every
/// trainable tensor, on a 3-example batch drawn away from kinks and ties.
/// Empty when no kink-free draw was found.
inline std::vector<TensorCheck> model_gradient_checks(ModelConfig c, std::uint64_t embedding_seed) {
  const std::uint64_t dropout_seed = 31;
  RngStream data(embedding_seed + 1);
  std::vector<IndexSequence> batch;
  std::unique_ptr<Model> model;
  for (int attempt = 0; attempt < 50; ++attempt, ++c.seed) {
    model = std::make_unique<Model>(c, random_embeddings(9, c.emb_dim, embedding_seed + static_cast<std::uint64_t>(attempt)));
    // Small random biases move conv outputs off exact zeros from PAD rows.
    RngStream jitter(c.seed);
    for (auto& conv : model->layers().convs) conv.bias = random_vector(jitter, conv.bias.size(), 0.05, 0.3);
    batch = random_batch(data, 3, c.seq_len, 9);
    if (oracle_forward(*model, batch, dropout_seed, Mode::kTrain).margin > 1e-4) break;
    model.reset();
  }
  if (!model) return {};

  Model& m = *model;
  std::vector<int> labels{0, 1, 1};
  const Matrix targets = one_hot(labels, c.n_classes);
  auto loss = [&] {
    RngStream rng(dropout_seed);
    return cross_entropy(m.forward(batch, Mode::kTrain, &rng), targets);
  };
  loss();
  const Gradients grads = m.backward(targets);
  auto params = m.params();
  std::vector<TensorCheck> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    TensorCheck check{params[i].name};
    if (grads[i].name != params[i].name || grads[i].value.shape() != params[i].shape) {
      out.push_back(check);
      continue;
    }
    std::span<double> values = params[i].values;
    Vector analytic = grads[i].value.data();
    if (params[i].name == "embedding") {
      // The PAD row is pinned at zero and never updated.
      check.pad_row_zero = analytic.head(c.emb_dim).isZero(0.0);
      values = values.subspan(static_cast<std::size_t>(c.emb_dim));
      analytic = Vector(analytic.tail(analytic.size() - c.emb_dim));
    }
    check.error = max_relative_error(analytic, numeric_gradient(values, loss));
    out.push_back(check);
  }
  return out;
}

}  // namespace ltnn::testing
