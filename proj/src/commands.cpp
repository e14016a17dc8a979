// SPDX-License-Identifier: Apache-2.0
#include "ltnn/commands.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "ltnn/dataset.hpp"
#include "ltnn/serialize.hpp"

namespace ltnn {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kRunConfigFile = "run.config";
constexpr const char* kVocabFile = "vocab.txt";
constexpr const char* kLabelsFile = "labels.txt";

void write_json(const fs::path& path, const ordered_json& doc) { write_file(path, doc.dump(2) + "\n"); }

void require_output_dir(const fs::path& out) {
  if (out.empty()) throw UsageError("an output directory (--out) is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

std::string format_score(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

EncodedDataset encode_dataset(const std::vector<ProcessedTweet>& tweets, const Vocabulary& vocab,
                              const std::vector<std::string>& labels, Index seq_len) {
  std::unordered_map<std::string, int> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i) label_index.emplace(labels[i], static_cast<int>(i));
  EncodedDataset data;
  data.label_names = labels;
  for (const auto& t : tweets) {
    auto it = label_index.find(t.label);
    if (it == label_index.end()) throw DataError("tweet '" + t.id + "' has unknown label '" + t.label + "'");
    data.inputs.push_back(encode(t, vocab, seq_len));
    data.labels.push_back(it->second);
  }
  return data;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kArgument:
      return kExitUsage;
    case ErrorKind::kNumeric:
      return kExitNumeric;
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kShape:
    case ErrorKind::kParse:
    case ErrorKind::kFormat:
    case ErrorKind::kData:
      return kExitData;
  }
  return kExitData;
}

Preprocessing Preprocessing::load(const fs::path& lexicon, const fs::path& contractions) {
  Preprocessing p;
  if (!lexicon.empty()) p.lexicon = Lexicon::load(lexicon);
  if (!contractions.empty()) p.contractions = load_contractions(contractions);
  return p;
}

// ---------------------------------------------------------------------------

UniquenessReport cmd_analyze(const AnalyzeOptions& options) {
  require_output_dir(options.out);
  const auto pre = Preprocessing::load(options.lexicon, options.contractions);
  const auto tweets = normalize_all(read_dataset(options.dataset), pre.lexicon, pre.contractions);
  UniquenessReport report = distribution(tweets);

  write_json(options.out / "uniqueness_report.json", to_json(report));
  std::string csv = "id,label,score,bin\n";
  for (const auto& s : report.scores) {
    csv += csv_escape(s.id) + "," + csv_escape(s.label) + "," + format_score(s.score) + "," + bin_label(s.bin) + "\n";
  }
  write_file(options.out / "uniqueness_scores.csv", csv);
  return report;
}

// ---------------------------------------------------------------------------

TrainSummary cmd_train(const RunConfig& config) {
  if (!config.seed) throw UsageError("train requires an explicit --seed");
  if (config.dataset.empty()) throw UsageError("train requires a dataset");
  if (config.embeddings.empty()) throw UsageError("train requires an embeddings file");
  for (const auto& p : {config.dataset, config.embeddings, config.lexicon, config.contractions}) {
    if (!p.empty() && !fs::exists(p)) throw UsageError("referenced file does not exist: " + p.string());
  }
  if (config.k < 2) throw UsageError("k must be >= 2");
  require_output_dir(config.out);

  const auto pre = Preprocessing::load(config.lexicon, config.contractions);
  const auto tweets = normalize_all(read_dataset(config.dataset), pre.lexicon, pre.contractions);
  if (tweets.empty()) throw DataError(config.dataset.string() + ": dataset is empty");
  const auto labels = label_set(tweets);
  if (std::find(labels.begin(), labels.end(), config.non_hate_label) == labels.end()) {
    throw UsageError("non_hate_label '" + config.non_hate_label + "' is not a dataset label");
  }

  ModelConfig model_config = config.model;
  model_config.n_classes = static_cast<Index>(labels.size());
  model_config.seed = *config.seed;
  model_config.validate();

  const Vocabulary vocab = Vocabulary::build(tweets);
  const EmbeddingTable table = EmbeddingTable::load(config.embeddings, config.embeddings_format);
  const EmbeddingMatrix embeddings = build_matrix(vocab, table, *config.seed);
  const EncodedDataset data = encode_dataset(tweets, vocab, labels, model_config.seq_len);

  CrossValidationOptions cv_options;
  cv_options.k = config.k;
  cv_options.train = {config.epochs, config.batch_size, *config.seed};
  cv_options.non_hate_label = config.non_hate_label;
  cv_options.stratified = config.stratified;

  TrainSummary summary;
  summary.cv = cross_validate(model_config, data, embeddings, cv_options);
  summary.parameter_count = summary.cv.folds.front().model.parameter_count();
  summary.oov_rate = embeddings.oov_rate;

  const fs::path& out = config.out;
  auto record = [&](const fs::path& name) {
    summary.artifacts.push_back(out / name);
    return out / name;
  };

  RunConfig saved = config;
  saved.model = model_config;
  write_file(record(kRunConfigFile), format_key_values(saved.to_key_values()));
  vocab.save(record(kVocabFile));
  std::string label_text;
  for (const auto& l : labels) label_text += l + "\n";
  write_file(record(kLabelsFile), label_text);

  ordered_json metrics;
  metrics["folds"] = ordered_json::array();
  ordered_json records = ordered_json::array();
  std::vector<std::string> fold_of(tweets.size());
  std::vector<std::string> oof(tweets.size());
  for (const auto& fold : summary.cv.folds) {
    save_weights(record("fold_" + std::to_string(fold.fold) + ".ltnn"), fold.model);
    auto report = to_json(fold.report);
    report["fold"] = fold.fold;
    metrics["folds"].push_back(std::move(report));
    auto rec = to_json(fold.record);
    rec["fold"] = fold.fold;
    records.push_back(std::move(rec));
    for (std::size_t i = 0; i < fold.test_rows.size(); ++i) {
      fold_of[fold.test_rows[i]] = std::to_string(fold.fold);
      oof[fold.test_rows[i]] = labels[static_cast<std::size_t>(fold.predictions[i])];
    }
  }
  metrics["average"] = to_json(summary.cv.average);
  write_json(record("metrics.json"), metrics);
  write_json(record("train_record.json"), ordered_json{{"folds", records}});

  std::vector<Prediction> predictions;
  std::string folds_csv = "id,fold\n";
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    predictions.push_back({tweets[i].id, oof[i]});
    folds_csv += csv_escape(tweets[i].id) + "," + fold_of[i] + "\n";
  }
  write_predictions(record("predictions.csv"), predictions);
  write_file(record("folds.csv"), folds_csv);

  ordered_json artifacts = ordered_json::array();
  for (const auto& a : summary.artifacts) artifacts.push_back(a.filename().string());
  artifacts.push_back("manifest.json");
  ordered_json manifest = {{"seed", *config.seed},
                           {"kind", to_string(model_config.kind)},
                           {"parameter_count", summary.parameter_count},
                           {"n_classes", labels.size()},
                           {"labels", labels},
                           {"vocabulary_size", vocab.size()},
                           {"oov_rate", embeddings.oov_rate},
                           {"k", config.k},
                           {"artifacts", artifacts}};
  write_json(record("manifest.json"), manifest);
  return summary;
}

// ---------------------------------------------------------------------------

EvaluateResult cmd_evaluate(const EvaluateOptions& options) {
  if (options.weights.empty()) throw UsageError("evaluate requires --weights");
  if (options.dataset.empty()) throw UsageError("evaluate requires --dataset");
  require_output_dir(options.out);
  const fs::path run_dir = options.weights.parent_path();
  const fs::path run_config_path = options.run_config.empty() ? run_dir / kRunConfigFile : options.run_config;

  RunConfig config;
  config.apply(read_key_values(run_config_path));
  if (options.non_hate_label) config.non_hate_label = *options.non_hate_label;

  const Vocabulary vocab = Vocabulary::load(run_dir / kVocabFile);
  const auto labels = read_lines(run_dir / kLabelsFile);
  ModelConfig model_config = config.model;
  model_config.n_classes = static_cast<Index>(labels.size());

  EmbeddingMatrix placeholder;
  placeholder.weights = Matrix::Zero(vocab.size(), model_config.emb_dim);
  Model model(model_config, placeholder);
  model.load_state(load_weights(options.weights));
  if (model.vocab_size() != vocab.size()) {
    throw FormatError("weights: tensor 'embedding' has " + std::to_string(model.vocab_size()) +
                      " rows but the vocabulary has " + std::to_string(vocab.size()) + " entries");
  }

  const auto pre = Preprocessing::load(config.lexicon, config.contractions);
  auto tweets = normalize_all(read_dataset(options.dataset), pre.lexicon, pre.contractions);

  if (options.fold) {
    if (options.folds.empty()) throw UsageError("--fold requires --folds");
    if (options.split != "test" && options.split != "train") throw UsageError("--split must be 'test' or 'train'");
    std::unordered_map<std::string, std::string> fold_of;
    for (auto& row : parse_csv(read_file(options.folds), options.folds.string())) {
      if (row.size() == 2) fold_of[row[0]] = row[1];
    }
    const std::string wanted = std::to_string(*options.fold);
    std::vector<ProcessedTweet> kept;
    for (auto& t : tweets) {
      auto it = fold_of.find(t.id);
      if (it == fold_of.end()) throw DataError(options.folds.string() + ": no fold for id '" + t.id + "'");
      if ((it->second == wanted) == (options.split == "test")) kept.push_back(std::move(t));
    }
    tweets = std::move(kept);
  }

  const EncodedDataset data = encode_dataset(tweets, vocab, labels, model_config.seq_len);
  const auto predicted = predict(model, data.inputs);

  EvaluateResult result;
  result.report = make_report(confusion(data.labels, predicted, labels), config.non_hate_label);
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    result.predictions.push_back({tweets[i].id, labels[static_cast<std::size_t>(predicted[i])]});
  }
  write_json(options.out / "evaluation_report.json", to_json(result.report));
  write_predictions(options.out / "predictions.csv", result.predictions);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<Comparison> cmd_compare(const CompareOptions& options) {
  if (options.pred_a.empty()) throw UsageError("compare requires at least one --pred-a file");
  if (options.pred_b.empty()) throw UsageError("compare requires a --pred-b reference file");
  require_output_dir(options.out);

  const auto pre = Preprocessing::load(options.lexicon, options.contractions);
  const auto tweets = normalize_all(read_dataset(options.dataset), pre.lexicon, pre.contractions);
  const UniquenessReport uniq = distribution(tweets);
  std::map<std::string, double> scores;
  for (const auto& s : uniq.scores) scores.emplace(s.id, s.score);

  std::vector<Prediction> gold;
  for (const auto& t : tweets) gold.push_back({t.id, t.label});
  const auto reference = read_predictions(options.pred_b);

  std::vector<Comparison> out;
  ordered_json columns = ordered_json::array();
  for (const auto& path : options.pred_a) {
    const auto ids = additional_true_positives(gold, read_predictions(path), reference);
    Comparison c{path.stem().string() + " vs " + options.pred_b.stem().string(), atp_distribution(ids, scores)};
    ordered_json col = {{"name", c.name}};
    col.update(to_json(c.report));
    columns.push_back(std::move(col));
    out.push_back(std::move(c));
  }
  write_json(options.out / "atp_report.json",
             ordered_json{{"reference", options.pred_b.stem().string()}, {"comparisons", columns}});
  return out;
}

}  // namespace ltnn
