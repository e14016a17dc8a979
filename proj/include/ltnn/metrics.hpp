// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltnn/tensor.hpp"

namespace ltnn {

using CountMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// counts(g, p): rows with gold label g predicted as p.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  CountMatrix counts;

  long long total() const { return counts.sum(); }
  Index label_index(const std::string& label) const;
};

ConfusionMatrix confusion(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                          const std::vector<std::string>& labels);
/// Index-based variant; entries must lie in [0, labels.size()).
ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred, const std::vector<std::string>& labels);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassMetrics {
  std::string label;
  Prf prf;
  long long support = 0;  // gold count
};

/// 0/0 is taken as 0 throughout.
std::vector<ClassMetrics> prf_per_class(const ConfusionMatrix& cm);
/// Pooled TP/FP/FN across classes.
Prf micro_f1(const ConfusionMatrix& cm);
/// Unweighted means of per-class P, R and F1, optionally over a label subset.
Prf macro_f1(std::span<const ClassMetrics> per_class,
             const std::optional<std::vector<std::string>>& restrict_to = std::nullopt);

struct EvalReport {
  std::string non_hate_label;
  std::vector<ClassMetrics> per_class;
  Prf micro;
  Prf macro;
  Prf macro_hate;  // every class except non_hate_label
};

EvalReport make_report(const ConfusionMatrix& cm, const std::string& non_hate_label);
/// Arithmetic mean of every metric across reports (labels must agree).
EvalReport average_reports(std::span<const EvalReport> reports);

nlohmann::ordered_json to_json(const Prf& prf);
nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace ltnn
