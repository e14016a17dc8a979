// SPDX-License-Identifier: Apache-2.0
#include "ltnn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace ltnn {

WindowShape WindowShape::plain(Index size) {
  if (size < 1) throw ArgumentError("window size must be positive");
  return {size, 0, std::vector<bool>(static_cast<std::size_t>(size), true)};
}

std::vector<Index> WindowShape::activated_offsets() const {
  std::vector<Index> out;
  for (Index o = 0; o < size; ++o) {
    if (mask[static_cast<std::size_t>(o)]) out.push_back(o);
  }
  return out;
}

std::string WindowShape::pattern() const {
  std::string s;
  for (bool on : mask) s.push_back(on ? 'O' : 'X');
  return s;
}

std::vector<WindowShape> gapped_window_shapes(Index gap, Index size) {
  if (gap <= 0 || gap >= size) {
    throw ArgumentError("gapped_window_shapes: need 0 < i < j, got i=" + std::to_string(gap) +
                        " j=" + std::to_string(size));
  }
  std::vector<WindowShape> shapes;
  // 1-indexed gap start k runs over 2..j-i so both endpoints stay active.
  for (Index k = 2; k <= size - gap; ++k) {
    WindowShape w = WindowShape::plain(size);
    w.gap = gap;
    for (Index x = k; x < k + gap; ++x) w.mask[static_cast<std::size_t>(x - 1)] = false;
    shapes.push_back(std::move(w));
  }
  return shapes;
}

// ---------------------------------------------------------------------------

ConvLayer make_conv_layer(const WindowShape& shape, Index channels, Index filters, RngStream& rng) {
  const Index width = shape.activated_count() * channels;
  ConvLayer layer{shape, glorot_uniform(rng, filters, width, width, filters), Vector::Zero(filters)};
  return layer;
}

Index conv_output_length(Index input_length, const WindowShape& shape) { return input_length - shape.size + 1; }

Matrix window_patches(const Matrix& input, const WindowShape& shape) {
  const Index d = input.cols();
  const auto offsets = shape.activated_offsets();
  const Index out_len = conv_output_length(input.rows(), shape);
  Matrix patches(std::max<Index>(out_len, 0), static_cast<Index>(offsets.size()) * d);
  for (Index p = 0; p < out_len; ++p) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      patches.block(p, static_cast<Index>(k) * d, 1, d) = input.row(p + offsets[k]);
    }
  }
  return patches;
}

Matrix conv1d_preactivation(const Matrix& input, const ConvLayer& layer) {
  const Index steps = input.rows();
  const Index d = input.cols();
  if (steps < layer.shape.size) {
    throw ShapeError("conv1d: input length " + std::to_string(steps) + " shorter than window " +
                     std::to_string(layer.shape.size));
  }
  const Index width = layer.shape.activated_count() * d;
  if (layer.kernel.cols() != width || layer.bias.size() != layer.kernel.rows()) {
    throw ShapeError("conv1d: kernel " + shape_to_string({layer.kernel.rows(), layer.kernel.cols()}) +
                     " incompatible with input " + shape_to_string({steps, d}) + " and window " +
                     layer.shape.pattern());
  }
  Matrix pre = window_patches(input, layer.shape) * layer.kernel.transpose();
  pre.rowwise() += layer.bias.transpose();
  return pre;
}

Matrix conv1d_forward(const Matrix& input, const ConvLayer& layer, ConvCache* cache) {
  Matrix out = relu(conv1d_preactivation(input, layer));
  if (cache) cache->output = out;
  return out;
}

ConvGrads conv1d_backward(const Matrix& input, const ConvLayer& layer, const ConvCache& cache, const Matrix& upstream,
                          bool need_input_grad) {
  if (upstream.rows() != cache.output.rows() || upstream.cols() != cache.output.cols()) {
    throw ShapeError("conv1d_backward: upstream " + shape_to_string({upstream.rows(), upstream.cols()}) +
                     " does not match output " + shape_to_string({cache.output.rows(), cache.output.cols()}));
  }
  if (conv_output_length(input.rows(), layer.shape) != cache.output.rows()) {
    throw ShapeError("conv1d_backward: input length does not match cached output");
  }
  const Matrix d_pre = (cache.output.array() > 0.0).select(upstream, 0.0);
  const Matrix patches = window_patches(input, layer.shape);
  ConvGrads g;
  g.kernel = d_pre.transpose() * patches;
  g.bias = d_pre.colwise().sum().transpose();
  if (!need_input_grad) return g;
  const Matrix d_patches = d_pre * layer.kernel;
  const auto offsets = layer.shape.activated_offsets();
  const Index d = input.cols();
  g.input = Matrix::Zero(input.rows(), d);
  for (Index p = 0; p < d_patches.rows(); ++p) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      g.input.row(p + offsets[k]) += d_patches.block(p, static_cast<Index>(k) * d, 1, d);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

Index pool_output_length(Index input_length, Index pool, Index stride) {
  if (input_length < pool) return 0;
  return (input_length - pool) / stride + 1;
}

PoolResult maxpool1d(const Matrix& input, Index pool, Index stride) {
  if (pool < 1 || stride < 1) throw ArgumentError("maxpool1d: pool and stride must be positive");
  if (input.rows() < pool) {
    throw ShapeError("maxpool1d: input length " + std::to_string(input.rows()) + " shorter than pool " +
                     std::to_string(pool));
  }
  const Index out_len = pool_output_length(input.rows(), pool, stride);
  PoolResult r;
  r.input_rows = input.rows();
  r.output.resize(out_len, input.cols());
  r.argmax.resize(out_len, input.cols());
  for (Index q = 0; q < out_len; ++q) {
    const Index start = q * stride;
    for (Index c = 0; c < input.cols(); ++c) {
      Index best = start;
      for (Index t = start + 1; t < start + pool; ++t) {
        if (input(t, c) > input(best, c)) best = t;
      }
      r.output(q, c) = input(best, c);
      r.argmax(q, c) = best;
    }
  }
  return r;
}

Matrix maxpool1d_backward(const PoolResult& forward, const Matrix& upstream) {
  if (upstream.rows() != forward.output.rows() || upstream.cols() != forward.output.cols()) {
    throw ShapeError("maxpool1d_backward: upstream shape mismatch");
  }
  Matrix g = Matrix::Zero(forward.input_rows, upstream.cols());
  for (Index q = 0; q < upstream.rows(); ++q) {
    for (Index c = 0; c < upstream.cols(); ++c) g(forward.argmax(q, c), c) += upstream(q, c);
  }
  return g;
}

GlobalPoolResult global_maxpool(const Matrix& input) {
  if (input.rows() < 1) throw ShapeError("global_maxpool: no timesteps");
  GlobalPoolResult r;
  r.input_rows = input.rows();
  r.output.resize(input.cols());
  r.argmax.resize(input.cols());
  for (Index c = 0; c < input.cols(); ++c) {
    Index best = 0;
    for (Index t = 1; t < input.rows(); ++t) {
      if (input(t, c) > input(best, c)) best = t;
    }
    r.output[c] = input(best, c);
    r.argmax[c] = best;
  }
  return r;
}

Matrix global_maxpool_backward(const GlobalPoolResult& forward, const Vector& upstream) {
  if (upstream.size() != forward.output.size()) throw ShapeError("global_maxpool_backward: upstream size mismatch");
  Matrix g = Matrix::Zero(forward.input_rows, upstream.size());
  for (Index c = 0; c < upstream.size(); ++c) g(forward.argmax[c], c) = upstream[c];
  return g;
}

// ---------------------------------------------------------------------------

GruLayer make_gru_layer(Index input_dim, Index units, RngStream& rng) {
  GruLayer g;
  g.w_z = glorot_uniform(rng, input_dim, units, input_dim, units);
  g.w_r = glorot_uniform(rng, input_dim, units, input_dim, units);
  g.w_h = glorot_uniform(rng, input_dim, units, input_dim, units);
  g.u_z = glorot_uniform(rng, units, units, units, units);
  g.u_r = glorot_uniform(rng, units, units, units, units);
  g.u_h = glorot_uniform(rng, units, units, units, units);
  g.b_z = Vector::Zero(units);
  g.b_r = Vector::Zero(units);
  g.b_h = Vector::Zero(units);
  return g;
}

namespace {

void check_gru(const Matrix& input, const GruLayer& layer) {
  const Index d = layer.input_dim();
  const Index h = layer.units();
  const bool ok = layer.w_r.rows() == d && layer.w_h.rows() == d && layer.w_r.cols() == h && layer.w_h.cols() == h &&
                  layer.u_z.rows() == h && layer.u_z.cols() == h && layer.u_r.rows() == h && layer.u_r.cols() == h &&
                  layer.u_h.rows() == h && layer.u_h.cols() == h && layer.b_z.size() == h && layer.b_r.size() == h &&
                  layer.b_h.size() == h;
  if (!ok) throw ShapeError("gru: inconsistent parameter shapes");
  if (input.rows() < 1) throw ShapeError("gru: no timesteps");
  if (input.cols() != d) {
    throw ShapeError("gru: input " + shape_to_string({input.rows(), input.cols()}) + " but layer expects " +
                     std::to_string(d) + " channels");
  }
}

RowVector sigmoid(const RowVector& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

}  // namespace

Matrix gru_forward(const Matrix& input, const GruLayer& layer, GruCache* cache) {
  check_gru(input, layer);
  const Index steps = input.rows();
  const Index h = layer.units();
  const Matrix xz = input * layer.w_z;
  const Matrix xr = input * layer.w_r;
  const Matrix xh = input * layer.w_h;

  Matrix out(steps, h);
  if (cache) {
    cache->input = input;
    cache->h_prev.resize(steps, h);
    cache->z.resize(steps, h);
    cache->r.resize(steps, h);
    cache->candidate.resize(steps, h);
  }
  RowVector prev = RowVector::Zero(h);
  for (Index t = 0; t < steps; ++t) {
    const RowVector z = sigmoid(xz.row(t) + prev * layer.u_z + layer.b_z.transpose());
    const RowVector r = sigmoid(xr.row(t) + prev * layer.u_r + layer.b_r.transpose());
    const RowVector gated = r.cwiseProduct(prev);
    const RowVector cand = (xh.row(t) + gated * layer.u_h + layer.b_h.transpose()).array().tanh().matrix();
    const RowVector next = (1.0 - z.array()) * prev.array() + z.array() * cand.array();
    if (cache) {
      cache->h_prev.row(t) = prev;
      cache->z.row(t) = z;
      cache->r.row(t) = r;
      cache->candidate.row(t) = cand;
    }
    out.row(t) = next;
    prev = next;
  }
  return out;
}

GruGrads gru_backward(const GruCache& cache, const GruLayer& layer, const Matrix& upstream) {
  const Index steps = cache.input.rows();
  const Index h = layer.units();
  if (upstream.rows() != steps || upstream.cols() != h) {
    throw ShapeError("gru_backward: upstream " + shape_to_string({upstream.rows(), upstream.cols()}) +
                     " does not match output " + shape_to_string({steps, h}));
  }
  // Pre-activation gradients per timestep, reduced into weights afterwards.
  Matrix da_z(steps, h), da_r(steps, h), da_h(steps, h);
  Matrix gated(steps, h);
  RowVector dh_next = RowVector::Zero(h);
  for (Index t = steps - 1; t >= 0; --t) {
    const auto prev = cache.h_prev.row(t).array();
    const auto z = cache.z.row(t).array();
    const auto r = cache.r.row(t).array();
    const auto cand = cache.candidate.row(t).array();

    const RowVector dh = upstream.row(t) + dh_next;
    const RowVector dz = (dh.array() * (cand - prev)).matrix();
    const RowVector dcand = (dh.array() * z).matrix();
    RowVector dprev = (dh.array() * (1.0 - z)).matrix();

    const RowVector a_h = (dcand.array() * (1.0 - cand.square())).matrix();
    const RowVector d_gated = a_h * layer.u_h.transpose();
    const RowVector dr = (d_gated.array() * prev).matrix();
    dprev.array() += d_gated.array() * r;

    const RowVector a_z = (dz.array() * z * (1.0 - z)).matrix();
    const RowVector a_r = (dr.array() * r * (1.0 - r)).matrix();
    dprev += a_z * layer.u_z.transpose() + a_r * layer.u_r.transpose();

    da_z.row(t) = a_z;
    da_r.row(t) = a_r;
    da_h.row(t) = a_h;
    gated.row(t) = (r * prev).matrix();
    dh_next = dprev;
  }

  GruGrads g;
  const Matrix& x = cache.input;
  g.w_z = x.transpose() * da_z;
  g.w_r = x.transpose() * da_r;
  g.w_h = x.transpose() * da_h;
  g.u_z = cache.h_prev.transpose() * da_z;
  g.u_r = cache.h_prev.transpose() * da_r;
  g.u_h = gated.transpose() * da_h;
  g.b_z = da_z.colwise().sum().transpose();
  g.b_r = da_r.colwise().sum().transpose();
  g.b_h = da_h.colwise().sum().transpose();
  g.input = da_z * layer.w_z.transpose() + da_r * layer.w_r.transpose() + da_h * layer.w_h.transpose();
  return g;
}

// ---------------------------------------------------------------------------

Matrix dropout(const Matrix& input, double ratio, Mode mode, RngStream* rng, DropoutCache* cache) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw ArgumentError("dropout: ratio must lie in [0, 1)");
  if (cache) cache->scale.resize(0, 0);
  if (mode == Mode::kEval || ratio == 0.0) return input;
  if (!rng) throw ArgumentError("dropout: train mode requires an rng stream");
  const double keep_scale = 1.0 / (1.0 - ratio);
  Matrix scale(input.rows(), input.cols());
  for (Index i = 0; i < scale.size(); ++i) scale.data()[i] = rng->bernoulli(ratio) ? 0.0 : keep_scale;
  Matrix out = input.cwiseProduct(scale);
  if (cache) cache->scale = std::move(scale);
  return out;
}

Matrix dropout_backward(const DropoutCache& cache, const Matrix& upstream) {
  if (cache.scale.size() == 0) return upstream;
  if (cache.scale.rows() != upstream.rows() || cache.scale.cols() != upstream.cols()) {
    throw ShapeError("dropout_backward: upstream shape mismatch");
  }
  return upstream.cwiseProduct(cache.scale);
}

DenseLayer make_dense_layer(Index inputs, Index outputs, RngStream& rng) {
  return {glorot_uniform(rng, inputs, outputs, inputs, outputs), Vector::Zero(outputs)};
}

Vector dense_forward(const Vector& input, const Matrix& weights, const Vector& bias) {
  if (weights.rows() != input.size() || weights.cols() != bias.size()) {
    throw ShapeError("dense: input " + std::to_string(input.size()) + ", weights " +
                     shape_to_string({weights.rows(), weights.cols()}) + ", bias " + std::to_string(bias.size()));
  }
  return weights.transpose() * input + bias;
}

DenseGrads dense_backward(const Vector& input, const Matrix& weights, const Vector& upstream) {
  if (weights.rows() != input.size() || weights.cols() != upstream.size()) {
    throw ShapeError("dense_backward: shape mismatch");
  }
  return {input * upstream.transpose(), upstream, weights * upstream};
}

}  // namespace ltnn
