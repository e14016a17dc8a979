// SPDX-License-Identifier: Apache-2.0
#include "ltnn/metrics.hpp"

#include <algorithm>
#include <unordered_map>

namespace ltnn {
namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

Prf from_counts(double tp, double fp, double fn) {
  Prf m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  // 2PR / (P + R) in count form.
  m.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  return m;
}

}  // namespace

Index ConfusionMatrix::label_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw DataError("unknown label '" + label + "'");
  return static_cast<Index>(it - labels.begin());
}

ConfusionMatrix confusion(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                          const std::vector<std::string>& labels) {
  if (gold.size() != pred.size()) {
    throw ArgumentError("confusion: " + std::to_string(gold.size()) + " gold labels vs " +
                        std::to_string(pred.size()) + " predictions");
  }
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], static_cast<int>(i));
  auto lookup = [&](const std::string& l) {
    auto it = index.find(l);
    if (it == index.end()) throw DataError("confusion: unknown label '" + l + "'");
    return it->second;
  };
  std::vector<int> g, p;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    g.push_back(lookup(gold[i]));
    p.push_back(lookup(pred[i]));
  }
  return confusion(g, p, labels);
}

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred, const std::vector<std::string>& labels) {
  if (gold.size() != pred.size()) throw ArgumentError("confusion: gold and prediction lengths differ");
  const auto n = static_cast<Index>(labels.size());
  ConfusionMatrix cm{labels, CountMatrix::Zero(n, n)};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= n || pred[i] < 0 || pred[i] >= n) {
      throw DataError("confusion: label index out of range at row " + std::to_string(i));
    }
    ++cm.counts(gold[i], pred[i]);
  }
  return cm;
}

std::vector<ClassMetrics> prf_per_class(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out;
  for (Index c = 0; c < cm.counts.rows(); ++c) {
    const auto tp = static_cast<double>(cm.counts(c, c));
    const auto fp = static_cast<double>(cm.counts.col(c).sum()) - tp;
    const auto fn = static_cast<double>(cm.counts.row(c).sum()) - tp;
    out.push_back({cm.labels[static_cast<std::size_t>(c)], from_counts(tp, fp, fn), cm.counts.row(c).sum()});
  }
  return out;
}

Prf micro_f1(const ConfusionMatrix& cm) {
  const auto tp = static_cast<double>(cm.counts.trace());
  const auto all = static_cast<double>(cm.counts.sum());
  // Every off-diagonal cell is one FP (for its column) and one FN (for its row).
  return from_counts(tp, all - tp, all - tp);
}

Prf macro_f1(std::span<const ClassMetrics> per_class, const std::optional<std::vector<std::string>>& restrict_to) {
  std::vector<const ClassMetrics*> chosen;
  if (restrict_to) {
    if (restrict_to->empty()) throw ArgumentError("macro_f1: empty label subset");
    for (const auto& label : *restrict_to) {
      auto it = std::find_if(per_class.begin(), per_class.end(), [&](const auto& m) { return m.label == label; });
      if (it == per_class.end()) throw DataError("macro_f1: unknown label '" + label + "'");
      chosen.push_back(&*it);
    }
  } else {
    for (const auto& m : per_class) chosen.push_back(&m);
  }
  if (chosen.empty()) throw ArgumentError("macro_f1: no classes");
  Prf mean;
  for (const auto* m : chosen) {
    mean.precision += m->prf.precision;
    mean.recall += m->prf.recall;
    mean.f1 += m->prf.f1;
  }
  const auto n = static_cast<double>(chosen.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  return mean;
}

EvalReport make_report(const ConfusionMatrix& cm, const std::string& non_hate_label) {
  EvalReport r;
  r.non_hate_label = non_hate_label;
  r.per_class = prf_per_class(cm);
  r.micro = micro_f1(cm);
  r.macro = macro_f1(r.per_class);
  std::vector<std::string> hate;
  bool found = false;
  for (const auto& l : cm.labels) {
    if (l == non_hate_label) {
      found = true;
    } else {
      hate.push_back(l);
    }
  }
  if (!found) throw DataError("non-hate label '" + non_hate_label + "' is not among the dataset labels");
  r.macro_hate = macro_f1(r.per_class, hate);
  return r;
}

EvalReport average_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw ArgumentError("average_reports: no reports");
  EvalReport avg = reports.front();
  auto accumulate = [](Prf& into, const Prf& x) {
    into.precision += x.precision;
    into.recall += x.recall;
    into.f1 += x.f1;
  };
  auto scale = [](Prf& p, double s) {
    p.precision *= s;
    p.recall *= s;
    p.f1 *= s;
  };
  for (std::size_t k = 1; k < reports.size(); ++k) {
    const auto& r = reports[k];
    if (r.per_class.size() != avg.per_class.size()) throw DataError("average_reports: label sets differ");
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
      if (r.per_class[c].label != avg.per_class[c].label) throw DataError("average_reports: label sets differ");
      accumulate(avg.per_class[c].prf, r.per_class[c].prf);
      avg.per_class[c].support += r.per_class[c].support;
    }
    accumulate(avg.micro, r.micro);
    accumulate(avg.macro, r.macro);
    accumulate(avg.macro_hate, r.macro_hate);
  }
  const double s = 1.0 / static_cast<double>(reports.size());
  for (auto& c : avg.per_class) scale(c.prf, s);
  scale(avg.micro, s);
  scale(avg.macro, s);
  scale(avg.macro_hate, s);
  return avg;
}

nlohmann::ordered_json to_json(const Prf& prf) {
  return {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& c : report.per_class) {
    auto entry = to_json(c.prf);
    entry["support"] = c.support;
    classes[c.label] = std::move(entry);
  }
  return {{"non_hate_label", report.non_hate_label},
          {"classes", std::move(classes)},
          {"micro", to_json(report.micro)},
          {"macro", to_json(report.macro)},
          {"macro_hate", to_json(report.macro_hate)}};
}

}  // namespace ltnn
