// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltnn/layers.hpp"
#include "ltnn/vocab.hpp"

namespace ltnn {

enum class ModelKind { kBaseCnn, kCnnGru, kCnnScnn };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

struct SkipSpec {
  Index gap = 1;
  Index size = 3;
  bool operator==(const SkipSpec&) const = default;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kCnnScnn;
  Index seq_len = kDefaultSeqLen;
  Index emb_dim = 300;
  std::vector<Index> plain_window_sizes{2, 3, 4};
  Index filters = 100;
  Index pool = 4;
  Index pool_stride = 4;
  std::vector<SkipSpec> skipped_specs{{1, 3}, {1, 4}, {2, 4}};
  Index gru_units = 100;
  double dropout = 0.2;
  Index n_classes = 2;
  /// Unset means "pool the concatenation again" for the CNN kinds and
  /// "feed the GRU directly" for cnn_gru.
  std::optional<bool> second_pooling;
  bool trainable_embeddings = false;
  /// One dropout mask per convolution branch instead of one shared mask.
  bool per_branch_dropout = false;
  std::uint64_t seed = 0;

  bool uses_second_pooling() const { return second_pooling.value_or(kind != ModelKind::kCnnGru); }
  /// Plain windows followed (for cnn_scnn) by every gapped shape.
  std::vector<WindowShape> branch_shapes() const;
  void validate() const;

  /// Flat key/value view used by config files and weight sidecars.
  std::map<std::string, std::string> to_key_values() const;
  /// Applies recognised keys; unknown keys are left to the caller.
  void apply(const std::map<std::string, std::string>& kv);
};

/// Time lengths at every stage for T = seq_len.
struct ArchitectureSummary {
  std::vector<std::string> branch_patterns;
  std::vector<Index> conv_lengths;
  std::vector<Index> pooled_lengths;
  Index concat_length = 0;
  Index second_pool_length = 0;  // 0 when no second pooling
  Index gru_steps = 0;           // 0 unless cnn_gru
  Index feature_count = 0;       // dense-head input width
  Index branch_count() const { return static_cast<Index>(conv_lengths.size()); }
};

ArchitectureSummary summarize(const ModelConfig& config);

struct ParamView {
  std::string name;
  Shape shape;
  std::span<double> values;
};

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Gradients, aligned one-to-one with Model::params().
using Gradients = std::vector<NamedTensor>;

/// Every weight the model owns. Gradients reuse the same layout.
struct LayerSet {
  Matrix embedding;  // V x d
  std::vector<ConvLayer> convs;
  std::optional<GruLayer> gru;
  DenseLayer dense;
};

class Model {
 public:
  /// Builds one of the three architectures; throws ShapeError naming the
  /// stage whose dimensions do not fit.
  Model(const ModelConfig& config, const EmbeddingMatrix& embeddings);
  ~Model();
  Model(const Model&);
  Model& operator=(const Model&);
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;

  const ModelConfig& config() const { return config_; }
  const ArchitectureSummary& summary() const { return summary_; }
  Index vocab_size() const { return layers_.embedding.rows(); }

  LayerSet& layers() { return layers_; }
  const LayerSet& layers() const { return layers_; }

  /// Trainable tensors in a fixed order (embedding first when trainable).
  std::vector<ParamView> params();
  Index parameter_count() const;

  /// All tensors including a frozen embedding; used for weight files.
  std::vector<NamedTensor> state() const;
  /// Replaces tensors by name; every tensor must be present with a matching shape.
  void load_state(const std::vector<NamedTensor>& tensors);

  /// Softmax rows, B x n_classes. Caches activations for backward().
  Matrix forward(const std::vector<IndexSequence>& batch, Mode mode, RngStream* rng = nullptr);
  /// Gradient of the mean batch cross-entropy for the last forward().
  Gradients backward(const Matrix& one_hot_targets);

  /// Dense-head input for one sequence (flattened pooled features, or the
  /// GRU's global max-pooled state), computed in eval mode.
  Vector features(const IndexSequence& seq) const;

 private:
  struct SampleCache;

  Vector forward_sample(const IndexSequence& seq, Mode mode, RngStream* rng, SampleCache* cache) const;
  void backward_sample(const SampleCache& cache, const Vector& d_logits, LayerSet& grads) const;
  void check_sequence(const IndexSequence& seq, std::size_t row) const;

  ModelConfig config_;
  ArchitectureSummary summary_;
  LayerSet layers_;
  std::vector<SampleCache> caches_;
};

}  // namespace ltnn
