// SPDX-License-Identifier: Apache-2.0
#include "ltnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace ltnn {

double cross_entropy(const Matrix& pred, const Matrix& targets) {
  if (pred.rows() != targets.rows() || pred.cols() != targets.cols()) {
    throw ShapeError("cross_entropy: predictions " + shape_to_string({pred.rows(), pred.cols()}) + " vs targets " +
                     shape_to_string({targets.rows(), targets.cols()}));
  }
  if (pred.rows() == 0) throw ShapeError("cross_entropy: empty batch");
  const double total = -(targets.array() * pred.array().max(kProbabilityFloor).log()).sum();
  return total / static_cast<double>(pred.rows());
}

AdamState make_adam_state(std::span<const ParamView> params, AdamConfig hp) {
  AdamState s;
  s.hp = hp;
  for (const auto& p : params) {
    s.names.push_back(p.name);
    s.m.push_back(Vector::Zero(static_cast<Index>(p.values.size())));
    s.v.push_back(Vector::Zero(static_cast<Index>(p.values.size())));
  }
  return s;
}

void adam_step(std::span<ParamView> params, const Gradients& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.names.size()) {
    throw ArgumentError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                        std::to_string(grads.size()) + " gradients, " + std::to_string(state.names.size()) +
                        " optimiser slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != grads[i].name || params[i].name != state.names[i]) {
      throw ArgumentError("adam_step: misaligned tensor '" + params[i].name + "' vs gradient '" + grads[i].name + "'");
    }
    if (static_cast<Index>(params[i].values.size()) != grads[i].value.size()) {
      throw ArgumentError("adam_step: size mismatch for '" + params[i].name + "'");
    }
  }
  ++state.step;
  const auto& hp = state.hp;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(hp.beta1, t);
  const double correct2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = grads[i].value.data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = hp.beta1 * m + (1.0 - hp.beta1) * g;
    v = hp.beta2 * v + (1.0 - hp.beta2) * g.cwiseProduct(g);
    Eigen::Map<Vector> theta(params[i].values.data(), static_cast<Index>(params[i].values.size()));
    theta.array() -= hp.learning_rate * (m.array() / correct1) / ((v.array() / correct2).sqrt() + hp.epsilon);
  }
}

Matrix one_hot(std::span<const int> labels, Index n_classes) {
  Matrix out = Matrix::Zero(static_cast<Index>(labels.size()), n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) throw DataError("one_hot: label index out of range");
    out(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return out;
}

nlohmann::ordered_json to_json(const TrainRecord& record) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : record.config) config[k] = v;
  return {{"seed", record.seed}, {"epoch_loss", record.epoch_loss}, {"seconds", record.seconds}, {"config", config}};
}

std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch) {
  if (batch == 0) throw ArgumentError("batch size must be positive");
  std::vector<std::size_t> out;
  for (std::size_t start = 0; start < n; start += batch) out.push_back(std::min(batch, n - start));
  return out;
}

TrainRecord train(Model& model, const EncodedDataset& data, std::span<const std::size_t> rows,
                  const TrainOptions& options) {
  if (rows.empty()) throw ArgumentError("train: empty training fold");
  if (options.epochs < 1) throw ArgumentError("train: epochs must be >= 1");
  const auto start_time = std::chrono::steady_clock::now();
  TrainRecord record;
  record.seed = options.seed;
  record.config = model.config().to_key_values();

  RngStream rng(options.seed);
  auto params = model.params();
  AdamState adam = make_adam_state(params);
  std::vector<std::size_t> order(rows.begin(), rows.end());
  const auto sizes = batch_sizes(order.size(), options.batch_size);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t offset = 0;
    for (std::size_t size : sizes) {
      std::vector<IndexSequence> batch;
      std::vector<int> labels;
      for (std::size_t i = offset; i < offset + size; ++i) {
        batch.push_back(data.inputs[order[i]]);
        labels.push_back(data.labels[order[i]]);
      }
      offset += size;
      const Matrix targets = one_hot(labels, model.config().n_classes);
      const Matrix probs = model.forward(batch, Mode::kTrain, &rng);
      const double loss = cross_entropy(probs, targets);
      if (!std::isfinite(loss)) {
        throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch + 1));
      }
      loss_sum += loss * static_cast<double>(size);
      const Gradients grads = model.backward(targets);
      adam_step(params, grads, adam);
    }
    record.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
  }
  record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return record;
}

std::vector<int> predict(Model& model, const std::vector<IndexSequence>& inputs, std::size_t batch) {
  std::vector<int> out;
  out.reserve(inputs.size());
  for (std::size_t start = 0; start < inputs.size(); start += batch) {
    const std::size_t end = std::min(inputs.size(), start + batch);
    const std::vector<IndexSequence> chunk(inputs.begin() + static_cast<std::ptrdiff_t>(start),
                                           inputs.begin() + static_cast<std::ptrdiff_t>(end));
    const Matrix probs = model.forward(chunk, Mode::kEval);
    for (Index r = 0; r < probs.rows(); ++r) {
      Index best = 0;
      probs.row(r).maxCoeff(&best);
      out.push_back(static_cast<int>(best));
    }
  }
  return out;
}

std::vector<std::size_t> FoldSplit::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldSplit kfold_split(std::span<const int> labels, const std::vector<std::string>& label_names, std::size_t k,
                      std::uint64_t seed, bool stratified) {
  if (k < 2) throw ArgumentError("kfold_split: k must be >= 2");
  RngStream rng(seed);
  FoldSplit split;
  split.folds.resize(k);
  std::size_t next = 0;
  auto deal = [&](std::vector<std::size_t>& rows) {
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t r : rows) {
      split.folds[next].push_back(r);
      next = (next + 1) % k;
    }
  };
  if (stratified) {
    for (std::size_t c = 0; c < label_names.size(); ++c) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == static_cast<int>(c)) rows.push_back(i);
      }
      if (rows.size() < k) {
        throw DataError("class '" + label_names[c] + "' has " + std::to_string(rows.size()) + " members, fewer than k=" +
                        std::to_string(k));
      }
      deal(rows);
    }
  } else {
    if (labels.size() < k) throw DataError("kfold_split: fewer rows than folds");
    std::vector<std::size_t> rows(labels.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    deal(rows);
  }
  for (auto& f : split.folds) std::sort(f.begin(), f.end());
  return split;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CrossValidationResult cross_validate(const ModelConfig& config, const EncodedDataset& data,
                                     const EmbeddingMatrix& embeddings, const CrossValidationOptions& options) {
  if (data.size() == 0) throw DataError("cross_validate: empty dataset");
  CrossValidationResult result;
  result.split = kfold_split(data.labels, data.label_names, options.k, options.train.seed, options.stratified);

  std::vector<EvalReport> reports;
  for (std::size_t f = 0; f < options.k; ++f) {
    ModelConfig fold_config = config;
    fold_config.n_classes = static_cast<Index>(data.label_names.size());
    fold_config.seed = derive_seed(options.train.seed, 2 * f);
    Model model(fold_config, embeddings);

    TrainOptions train_options = options.train;
    train_options.seed = derive_seed(options.train.seed, 2 * f + 1);
    const auto train_rows = result.split.complement(f);
    TrainRecord record = train(model, data, train_rows, train_options);
    record.seed = options.train.seed;

    const auto& test_rows = result.split.folds[f];
    std::vector<IndexSequence> test_inputs;
    std::vector<int> gold;
    for (std::size_t r : test_rows) {
      test_inputs.push_back(data.inputs[r]);
      gold.push_back(data.labels[r]);
    }
    auto predictions = predict(model, test_inputs);
    EvalReport report = make_report(confusion(gold, predictions, data.label_names), options.non_hate_label);
    reports.push_back(report);
    result.folds.push_back(
        {f, test_rows, std::move(predictions), std::move(report), std::move(record), std::move(model)});
  }
  result.average = average_reports(reports);
  return result;
}

}  // namespace ltnn
