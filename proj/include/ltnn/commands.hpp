// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ltnn/config.hpp"
#include "ltnn/errors.hpp"
#include "ltnn/longtail.hpp"
#include "ltnn/training.hpp"

namespace ltnn {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitIo = 5,
};

int exit_code_for(ErrorKind kind);

struct Preprocessing {
  Lexicon lexicon;
  ContractionTable contractions;

  /// Empty paths mean "no lexicon" / "no contraction table".
  static Preprocessing load(const std::filesystem::path& lexicon, const std::filesystem::path& contractions);
};

// analyze -------------------------------------------------------------------

struct AnalyzeOptions {
  std::filesystem::path dataset;
  std::filesystem::path lexicon;
  std::filesystem::path contractions;
  std::filesystem::path out;
};

/// Writes uniqueness_report.json and uniqueness_scores.csv under `out`.
UniquenessReport cmd_analyze(const AnalyzeOptions& options);

// train ---------------------------------------------------------------------

struct TrainSummary {
  CrossValidationResult cv;
  Index parameter_count = 0;
  double oov_rate = 0.0;
  std::vector<std::filesystem::path> artifacts;
};

/// k-fold cross-validation run. Writes per-fold weights (fold_<k>.ltnn),
/// the shared vocabulary/labels/run config, metrics.json (per-fold and
/// averaged reports), train_record.json, out-of-fold predictions.csv,
/// folds.csv and manifest.json.
TrainSummary cmd_train(const RunConfig& config);

// evaluate ------------------------------------------------------------------

struct EvaluateOptions {
  std::filesystem::path weights;
  std::filesystem::path dataset;
  std::filesystem::path out;
  /// Defaults to run.config next to the weights.
  std::filesystem::path run_config;
  std::optional<std::string> non_hate_label;
  /// Restrict to one fold's rows: folds.csv + fold index + "test" | "train".
  std::filesystem::path folds;
  std::optional<std::size_t> fold;
  std::string split = "test";
};

struct EvaluateResult {
  EvalReport report;
  std::vector<Prediction> predictions;
};

/// Writes evaluation_report.json and predictions.csv under `out`.
EvaluateResult cmd_evaluate(const EvaluateOptions& options);

// compare -------------------------------------------------------------------

struct CompareOptions {
  std::filesystem::path dataset;
  std::vector<std::filesystem::path> pred_a;  // one column per file
  std::filesystem::path pred_b;               // reference
  std::filesystem::path lexicon;
  std::filesystem::path contractions;
  std::filesystem::path out;
};

struct Comparison {
  std::string name;
  AtpReport report;
};

/// Writes atp_report.json under `out`.
std::vector<Comparison> cmd_compare(const CompareOptions& options);

}  // namespace ltnn
