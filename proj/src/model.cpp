// SPDX-License-Identifier: Apache-2.0
#include "ltnn/model.hpp"

#include <charconv>
#include <sstream>
#include <unordered_map>

namespace ltnn {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

Index parse_index(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw UsageError("config key '" + key + "': expected integer, got '" + v + "'");
  return static_cast<Index>(out);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key '" + key + "': expected true/false, got '" + v + "'");
}

template <typename LS, typename F>
void visit_tensors(LS& layers, bool include_embedding, F&& f) {
  if (include_embedding) f("embedding", Shape{layers.embedding.rows(), layers.embedding.cols()}, layers.embedding);
  for (std::size_t b = 0; b < layers.convs.size(); ++b) {
    auto& conv = layers.convs[b];
    const std::string prefix = "branch" + std::to_string(b) + "_" + conv.shape.pattern();
    const Index width = conv.shape.activated_count();
    f(prefix + ".kernel", Shape{conv.kernel.rows(), width, conv.kernel.cols() / width}, conv.kernel);
    f(prefix + ".bias", Shape{conv.bias.size()}, conv.bias);
  }
  if (layers.gru) {
    auto& g = *layers.gru;
    f("gru.w_z", Shape{g.w_z.rows(), g.w_z.cols()}, g.w_z);
    f("gru.u_z", Shape{g.u_z.rows(), g.u_z.cols()}, g.u_z);
    f("gru.b_z", Shape{g.b_z.size()}, g.b_z);
    f("gru.w_r", Shape{g.w_r.rows(), g.w_r.cols()}, g.w_r);
    f("gru.u_r", Shape{g.u_r.rows(), g.u_r.cols()}, g.u_r);
    f("gru.b_r", Shape{g.b_r.size()}, g.b_r);
    f("gru.w_h", Shape{g.w_h.rows(), g.w_h.cols()}, g.w_h);
    f("gru.u_h", Shape{g.u_h.rows(), g.u_h.cols()}, g.u_h);
    f("gru.b_h", Shape{g.b_h.size()}, g.b_h);
  }
  f("dense.weights", Shape{layers.dense.weights.rows(), layers.dense.weights.cols()}, layers.dense.weights);
  f("dense.bias", Shape{layers.dense.bias.size()}, layers.dense.bias);
}

LayerSet zeros_like(const LayerSet& layers, bool with_embedding) {
  LayerSet z;
  if (with_embedding) z.embedding = Matrix::Zero(layers.embedding.rows(), layers.embedding.cols());
  for (const auto& c : layers.convs) {
    z.convs.push_back({c.shape, Matrix::Zero(c.kernel.rows(), c.kernel.cols()), Vector::Zero(c.bias.size())});
  }
  if (layers.gru) {
    const auto& g = *layers.gru;
    GruLayer zg;
    zg.w_z = zg.w_r = zg.w_h = Matrix::Zero(g.w_z.rows(), g.w_z.cols());
    zg.u_z = zg.u_r = zg.u_h = Matrix::Zero(g.u_z.rows(), g.u_z.cols());
    zg.b_z = zg.b_r = zg.b_h = Vector::Zero(g.b_z.size());
    z.gru = std::move(zg);
  }
  z.dense = {Matrix::Zero(layers.dense.weights.rows(), layers.dense.weights.cols()),
             Vector::Zero(layers.dense.bias.size())};
  return z;
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
  if (name == "base_cnn") return ModelKind::kBaseCnn;
  if (name == "cnn_gru") return ModelKind::kCnnGru;
  if (name == "cnn_scnn") return ModelKind::kCnnScnn;
  throw UsageError("unknown model kind '" + name + "' (expected base_cnn, cnn_gru or cnn_scnn)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBaseCnn:
      return "base_cnn";
    case ModelKind::kCnnGru:
      return "cnn_gru";
    case ModelKind::kCnnScnn:
      return "cnn_scnn";
  }
  return "unknown";
}

std::vector<WindowShape> ModelConfig::branch_shapes() const {
  std::vector<WindowShape> shapes;
  for (Index j : plain_window_sizes) shapes.push_back(WindowShape::plain(j));
  if (kind == ModelKind::kCnnScnn) {
    for (const auto& spec : skipped_specs) {
      for (auto& w : gapped_window_shapes(spec.gap, spec.size)) shapes.push_back(std::move(w));
    }
  }
  return shapes;
}

void ModelConfig::validate() const {
  auto positive = [](Index v, const char* what) {
    if (v <= 0) throw ArgumentError(std::string("model config: ") + what + " must be positive");
  };
  positive(seq_len, "seq_len");
  positive(emb_dim, "emb_dim");
  positive(filters, "filters");
  positive(pool, "pool");
  positive(pool_stride, "pool_stride");
  positive(gru_units, "gru_units");
  if (n_classes < 2) throw ArgumentError("model config: n_classes must be >= 2");
  if (plain_window_sizes.empty()) throw ArgumentError("model config: plain_window_sizes is empty");
  for (Index j : plain_window_sizes) positive(j, "plain window size");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ArgumentError("model config: dropout must lie in [0, 1)");
  if (kind == ModelKind::kCnnScnn) {
    if (skipped_specs.empty()) throw ArgumentError("model config: cnn_scnn needs skipped_specs");
    for (const auto& s : skipped_specs) gapped_window_shapes(s.gap, s.size);
  }
}

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  std::map<std::string, std::string> kv;
  kv["kind"] = to_string(kind);
  kv["seq_len"] = std::to_string(seq_len);
  kv["emb_dim"] = std::to_string(emb_dim);
  std::string windows;
  for (Index j : plain_window_sizes) windows += (windows.empty() ? "" : ",") + std::to_string(j);
  kv["plain_window_sizes"] = windows;
  kv["filters"] = std::to_string(filters);
  kv["pool"] = std::to_string(pool);
  kv["pool_stride"] = std::to_string(pool_stride);
  std::string specs;
  for (const auto& s : skipped_specs) {
    specs += (specs.empty() ? "" : ",") + std::to_string(s.gap) + ":" + std::to_string(s.size);
  }
  kv["skipped_specs"] = specs;
  kv["gru_units"] = std::to_string(gru_units);
  kv["dropout"] = format_double(dropout);
  kv["n_classes"] = std::to_string(n_classes);
  kv["second_pooling"] = second_pooling ? (*second_pooling ? "true" : "false") : "auto";
  kv["trainable_embeddings"] = trainable_embeddings ? "true" : "false";
  kv["per_branch_dropout"] = per_branch_dropout ? "true" : "false";
  kv["seed"] = std::to_string(seed);
  return kv;
}

void ModelConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "kind") {
      kind = parse_model_kind(value);
    } else if (key == "seq_len") {
      seq_len = parse_index(key, value);
    } else if (key == "emb_dim") {
      emb_dim = parse_index(key, value);
    } else if (key == "plain_window_sizes") {
      plain_window_sizes.clear();
      for (const auto& item : split_list(value)) plain_window_sizes.push_back(parse_index(key, item));
    } else if (key == "filters") {
      filters = parse_index(key, value);
    } else if (key == "pool") {
      pool = parse_index(key, value);
    } else if (key == "pool_stride") {
      pool_stride = parse_index(key, value);
    } else if (key == "skipped_specs") {
      skipped_specs.clear();
      for (const auto& item : split_list(value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("config key 'skipped_specs': expected gap:size items");
        skipped_specs.push_back({parse_index(key, item.substr(0, colon)), parse_index(key, item.substr(colon + 1))});
      }
    } else if (key == "gru_units") {
      gru_units = parse_index(key, value);
    } else if (key == "dropout") {
      double d = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
      if (ec != std::errc() || ptr != value.data() + value.size()) throw UsageError("config key 'dropout': bad number");
      dropout = d;
    } else if (key == "n_classes") {
      n_classes = parse_index(key, value);
    } else if (key == "second_pooling") {
      if (value == "auto") {
        second_pooling.reset();
      } else {
        second_pooling = parse_bool(key, value);
      }
    } else if (key == "trainable_embeddings") {
      trainable_embeddings = parse_bool(key, value);
    } else if (key == "per_branch_dropout") {
      per_branch_dropout = parse_bool(key, value);
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(parse_index(key, value));
    }
  }
}

ArchitectureSummary summarize(const ModelConfig& config) {
  config.validate();
  ArchitectureSummary s;
  const auto shapes = config.branch_shapes();
  for (std::size_t b = 0; b < shapes.size(); ++b) {
    const auto& w = shapes[b];
    const std::string stage = "branch " + std::to_string(b) + " (" + w.pattern() + ")";
    const Index conv_len = conv_output_length(config.seq_len, w);
    if (conv_len < 1) {
      throw ShapeError("build: stage '" + stage + "': sequence length " + std::to_string(config.seq_len) +
                       " shorter than window " + std::to_string(w.size));
    }
    const Index pooled = pool_output_length(conv_len, config.pool, config.pool_stride);
    if (pooled < 1) {
      throw ShapeError("build: stage 'pooling after " + stage + "': length " + std::to_string(conv_len) +
                       " shorter than pool " + std::to_string(config.pool));
    }
    s.branch_patterns.push_back(w.pattern());
    s.conv_lengths.push_back(conv_len);
    s.pooled_lengths.push_back(pooled);
    s.concat_length += pooled;
  }
  Index stage_len = s.concat_length;
  if (config.uses_second_pooling()) {
    s.second_pool_length = pool_output_length(s.concat_length, config.pool, config.pool_stride);
    if (s.second_pool_length < 1) {
      throw ShapeError("build: stage 'second pooling': concatenated length " + std::to_string(s.concat_length) +
                       " shorter than pool " + std::to_string(config.pool));
    }
    stage_len = s.second_pool_length;
  }
  if (config.kind == ModelKind::kCnnGru) {
    s.gru_steps = stage_len;
    s.feature_count = config.gru_units;
  } else {
    s.feature_count = stage_len * config.filters;
  }
  return s;
}

// ---------------------------------------------------------------------------

struct Model::SampleCache {
  IndexSequence seq;
  Matrix embedded;
  Matrix shared_input;  // embedded after the shared dropout
  DropoutCache shared_drop;
  std::vector<Matrix> branch_inputs;
  std::vector<DropoutCache> branch_drop;
  std::vector<ConvCache> conv;
  std::vector<PoolResult> pooled;
  PoolResult second;
  GruCache gru;
  GlobalPoolResult global;
  Vector features;
  Vector probs;
};

Model::~Model() = default;
Model::Model(const Model&) = default;
Model& Model::operator=(const Model&) = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;

Model::Model(const ModelConfig& config, const EmbeddingMatrix& embeddings)
    : config_(config), summary_(summarize(config)) {
  if (embeddings.weights.cols() != config.emb_dim) {
    throw ShapeError("build: stage 'embedding': matrix has dimension " + std::to_string(embeddings.weights.cols()) +
                     " but config.emb_dim is " + std::to_string(config.emb_dim));
  }
  if (embeddings.weights.rows() < 2) throw ShapeError("build: stage 'embedding': fewer than two rows");
  layers_.embedding = embeddings.weights;

  RngStream rng(config.seed);
  for (const auto& shape : config.branch_shapes()) {
    layers_.convs.push_back(make_conv_layer(shape, config.emb_dim, config.filters, rng));
  }
  if (config.kind == ModelKind::kCnnGru) layers_.gru = make_gru_layer(config.filters, config.gru_units, rng);
  layers_.dense = make_dense_layer(summary_.feature_count, config.n_classes, rng);
}

std::vector<ParamView> Model::params() {
  std::vector<ParamView> out;
  visit_tensors(layers_, config_.trainable_embeddings, [&](const std::string& name, Shape shape, auto& t) {
    out.push_back({name, std::move(shape), std::span<double>(t.data(), static_cast<std::size_t>(t.size()))});
  });
  return out;
}

Index Model::parameter_count() const {
  Index n = 0;
  visit_tensors(layers_, config_.trainable_embeddings, [&](const std::string&, const Shape&, const auto& t) { n += t.size(); });
  return n;
}

std::vector<NamedTensor> Model::state() const {
  std::vector<NamedTensor> out;
  visit_tensors(layers_, true, [&](const std::string& name, Shape shape, const auto& t) {
    out.push_back({name, Tensor(std::move(shape), Eigen::Map<const Vector>(t.data(), t.size()))});
  });
  return out;
}

void Model::load_state(const std::vector<NamedTensor>& tensors) {
  std::unordered_map<std::string, const NamedTensor*> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t;

  // The vocabulary travels with the weights, so only the embedding width is fixed.
  auto emb = by_name.find("embedding");
  if (emb == by_name.end()) throw FormatError("weights: missing tensor 'embedding'");
  const Tensor& src_emb = emb->second->value;
  if (src_emb.rank() != 2 || src_emb.shape()[1] != config_.emb_dim) {
    throw FormatError("weights: tensor 'embedding' has shape " + shape_to_string(src_emb.shape()) +
                      ", architecture expects [Vx" + std::to_string(config_.emb_dim) + "]");
  }
  std::size_t used = 1;
  visit_tensors(layers_, false, [&](const std::string& name, const Shape& shape, auto&) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("weights: missing tensor '" + name + "'");
    const Tensor& src = it->second->value;
    if (src.shape() != shape) {
      throw FormatError("weights: tensor '" + name + "' has shape " + shape_to_string(src.shape()) +
                        ", architecture expects " + shape_to_string(shape));
    }
    ++used;
  });
  if (used != by_name.size()) {
    for (const auto& t : tensors) {
      bool known = t.name == "embedding";
      visit_tensors(layers_, false, [&](const std::string& name, const Shape&, const auto&) { known |= name == t.name; });
      if (!known) throw FormatError("weights: unexpected tensor '" + t.name + "'");
    }
  }
  layers_.embedding = src_emb.as_matrix();
  visit_tensors(layers_, false, [&](const std::string& name, const Shape&, auto& t) {
    Eigen::Map<Vector>(t.data(), t.size()) = by_name.at(name)->value.data();
  });
}

void Model::check_sequence(const IndexSequence& seq, std::size_t row) const {
  if (static_cast<Index>(seq.size()) != config_.seq_len) {
    throw ArgumentError("input row " + std::to_string(row) + ": sequence length " + std::to_string(seq.size()) +
                        ", expected " + std::to_string(config_.seq_len));
  }
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq[t] < 0 || seq[t] >= vocab_size()) {
      throw ArgumentError("input row " + std::to_string(row) + ", position " + std::to_string(t) + ": index " +
                          std::to_string(seq[t]) + " outside vocabulary of size " + std::to_string(vocab_size()));
    }
  }
}

Vector Model::forward_sample(const IndexSequence& seq, Mode mode, RngStream* rng, SampleCache* cache) const {
  SampleCache& c = *cache;
  const Index steps = static_cast<Index>(seq.size());
  c.seq = seq;
  c.embedded.resize(steps, config_.emb_dim);
  for (Index t = 0; t < steps; ++t) c.embedded.row(t) = layers_.embedding.row(seq[static_cast<std::size_t>(t)]);

  const std::size_t branches = layers_.convs.size();
  c.conv.resize(branches);
  c.pooled.resize(branches);
  if (config_.per_branch_dropout) {
    c.branch_inputs.resize(branches);
    c.branch_drop.resize(branches);
  } else {
    c.shared_input = dropout(c.embedded, config_.dropout, mode, rng, &c.shared_drop);
  }

  Matrix concat(summary_.concat_length, config_.filters);
  Index offset = 0;
  for (std::size_t b = 0; b < branches; ++b) {
    const Matrix* input = &c.shared_input;
    if (config_.per_branch_dropout) {
      c.branch_inputs[b] = dropout(c.embedded, config_.dropout, mode, rng, &c.branch_drop[b]);
      input = &c.branch_inputs[b];
    }
    const Matrix out = conv1d_forward(*input, layers_.convs[b], &c.conv[b]);
    c.pooled[b] = maxpool1d(out, config_.pool, config_.pool_stride);
    concat.middleRows(offset, c.pooled[b].output.rows()) = c.pooled[b].output;
    offset += c.pooled[b].output.rows();
  }

  const Matrix* stage = &concat;
  if (config_.uses_second_pooling()) {
    c.second = maxpool1d(concat, config_.pool, config_.pool_stride);
    stage = &c.second.output;
  }

  if (layers_.gru) {
    const Matrix h = gru_forward(*stage, *layers_.gru, &c.gru);
    c.global = global_maxpool(h);
    c.features = c.global.output;
  } else {
    // Flatten time-major, then channel.
    c.features = Eigen::Map<const Vector>(stage->data(), stage->size());
  }
  c.probs = softmax(dense_forward(c.features, layers_.dense.weights, layers_.dense.bias));
  return c.probs;
}

Matrix Model::forward(const std::vector<IndexSequence>& batch, Mode mode, RngStream* rng) {
  for (std::size_t b = 0; b < batch.size(); ++b) check_sequence(batch[b], b);
  caches_.clear();
  caches_.resize(batch.size());
  Matrix probs(static_cast<Index>(batch.size()), config_.n_classes);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    probs.row(static_cast<Index>(b)) = forward_sample(batch[b], mode, rng, &caches_[b]).transpose();
  }
  return probs;
}

Vector Model::features(const IndexSequence& seq) const {
  check_sequence(seq, 0);
  SampleCache c;
  forward_sample(seq, Mode::kEval, nullptr, &c);
  return c.features;
}

void Model::backward_sample(const SampleCache& c, const Vector& d_logits, LayerSet& grads) const {
  const DenseGrads dg = dense_backward(c.features, layers_.dense.weights, d_logits);
  grads.dense.weights += dg.weights;
  grads.dense.bias += dg.bias;

  Matrix d_stage;
  if (layers_.gru) {
    const Matrix d_h = global_maxpool_backward(c.global, dg.input);
    const GruGrads gg = gru_backward(c.gru, *layers_.gru, d_h);
    auto& g = *grads.gru;
    g.w_z += gg.w_z;
    g.w_r += gg.w_r;
    g.w_h += gg.w_h;
    g.u_z += gg.u_z;
    g.u_r += gg.u_r;
    g.u_h += gg.u_h;
    g.b_z += gg.b_z;
    g.b_r += gg.b_r;
    g.b_h += gg.b_h;
    d_stage = gg.input;
  } else {
    const Index rows = summary_.feature_count / config_.filters;
    d_stage = Eigen::Map<const Matrix>(dg.input.data(), rows, config_.filters);
  }

  const Matrix d_concat = config_.uses_second_pooling() ? maxpool1d_backward(c.second, d_stage) : d_stage;

  const bool need_input = config_.trainable_embeddings;
  Matrix d_embedded;
  if (need_input) d_embedded = Matrix::Zero(c.embedded.rows(), c.embedded.cols());
  Index offset = 0;
  for (std::size_t b = 0; b < layers_.convs.size(); ++b) {
    const Index len = c.pooled[b].output.rows();
    const Matrix d_conv = maxpool1d_backward(c.pooled[b], d_concat.middleRows(offset, len));
    offset += len;
    const Matrix& input = config_.per_branch_dropout ? c.branch_inputs[b] : c.shared_input;
    const ConvGrads cg = conv1d_backward(input, layers_.convs[b], c.conv[b], d_conv, need_input);
    grads.convs[b].kernel += cg.kernel;
    grads.convs[b].bias += cg.bias;
    if (need_input) {
      d_embedded += config_.per_branch_dropout ? dropout_backward(c.branch_drop[b], cg.input) : cg.input;
    }
  }
  if (!need_input) return;
  if (!config_.per_branch_dropout) d_embedded = dropout_backward(c.shared_drop, d_embedded);
  for (std::size_t t = 0; t < c.seq.size(); ++t) {
    // PAD stays a zero row.
    if (c.seq[t] != kPadIndex) grads.embedding.row(c.seq[t]) += d_embedded.row(static_cast<Index>(t));
  }
}

Gradients Model::backward(const Matrix& one_hot_targets) {
  if (caches_.empty()) throw ArgumentError("backward: no cached forward pass");
  if (one_hot_targets.rows() != static_cast<Index>(caches_.size()) || one_hot_targets.cols() != config_.n_classes) {
    throw ShapeError("backward: targets " + shape_to_string({one_hot_targets.rows(), one_hot_targets.cols()}) +
                     " do not match batch " +
                     shape_to_string({static_cast<Index>(caches_.size()), config_.n_classes}));
  }
  LayerSet grads = zeros_like(layers_, config_.trainable_embeddings);
  const double inv_batch = 1.0 / static_cast<double>(caches_.size());
  for (std::size_t b = 0; b < caches_.size(); ++b) {
    const Vector d_logits = (caches_[b].probs - one_hot_targets.row(static_cast<Index>(b)).transpose()) * inv_batch;
    backward_sample(caches_[b], d_logits, grads);
  }
  Gradients out;
  visit_tensors(grads, config_.trainable_embeddings, [&](const std::string& name, Shape shape, const auto& t) {
    out.push_back({name, Tensor(std::move(shape), Eigen::Map<const Vector>(t.data(), t.size()))});
  });
  return out;
}

}  // namespace ltnn
