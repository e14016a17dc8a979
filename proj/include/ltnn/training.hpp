// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltnn/metrics.hpp"
#include "ltnn/model.hpp"

namespace ltnn {

/// Mean categorical cross-entropy; probabilities are clamped to >= 1e-12
/// before the logarithm.
double cross_entropy(const Matrix& pred, const Matrix& targets);

inline constexpr double kProbabilityFloor = 1e-12;

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig hp;
  std::vector<std::string> names;
  std::vector<Vector> m;
  std::vector<Vector> v;
  long long step = 0;
};

AdamState make_adam_state(std::span<const ParamView> params, AdamConfig hp = {});

/// One bias-corrected Adam update; gradients must align with params by name.
void adam_step(std::span<ParamView> params, const Gradients& grads, AdamState& state);

/// Encoded rows plus class indices (into a sorted label list).
struct EncodedDataset {
  std::vector<IndexSequence> inputs;
  std::vector<int> labels;
  std::vector<std::string> label_names;

  std::size_t size() const { return inputs.size(); }
};

Matrix one_hot(std::span<const int> labels, Index n_classes);

struct TrainOptions {
  int epochs = 10;
  std::size_t batch_size = 100;
  std::uint64_t seed = 0;
};

struct TrainRecord {
  std::vector<double> epoch_loss;  // mean per-example training loss
  double seconds = 0.0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
};

nlohmann::ordered_json to_json(const TrainRecord& record);

/// Sizes of the mini-batches covering n rows; the last may be smaller.
std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch);

/// Per epoch: reshuffle rows with the seeded stream, then forward (train
/// mode), backward and one Adam step per mini-batch.
TrainRecord train(Model& model, const EncodedDataset& data, std::span<const std::size_t> rows,
                  const TrainOptions& options);

/// Arg-max class per row, eval mode; ties go to the lowest class index.
std::vector<int> predict(Model& model, const std::vector<IndexSequence>& inputs, std::size_t batch = 100);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;  // row indices, ascending within a fold

  /// Every row not in `fold`, ascending.
  std::vector<std::size_t> complement(std::size_t fold) const;
};

/// Stratified: each class is shuffled and dealt round-robin over the folds,
/// continuing the deal where the previous class stopped. Unstratified deals
/// the shuffled rows round-robin.
FoldSplit kfold_split(std::span<const int> labels, const std::vector<std::string>& label_names, std::size_t k,
                      std::uint64_t seed, bool stratified = true);

struct CrossValidationOptions {
  std::size_t k = 5;
  TrainOptions train;
  std::string non_hate_label;
  bool stratified = true;
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> test_rows;
  std::vector<int> predictions;  // aligned with test_rows
  EvalReport report;
  TrainRecord record;
  Model model;
};

struct CrossValidationResult {
  std::vector<FoldResult> folds;
  EvalReport average;
  FoldSplit split;
};

/// Fold f builds its model from seed derive_seed(seed, f) and trains with a
/// separate derived stream.
CrossValidationResult cross_validate(const ModelConfig& config, const EncodedDataset& data,
                                     const EmbeddingMatrix& embeddings, const CrossValidationOptions& options);

/// SplitMix64-style derivation of independent stream seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace ltnn
