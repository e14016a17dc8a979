// SPDX-License-Identifier: Apache-2.0
#include "ltnn/longtail.hpp"

#include <iostream>
#include <unordered_map>

#include "ltnn/errors.hpp"

namespace ltnn {

UniqueWordIndex unique_words(const std::vector<ProcessedTweet>& tweets) {
  // word -> the single class it was seen in, or empty once seen in two.
  std::map<std::string, std::string> owner;
  std::set<std::string> shared;
  UniqueWordIndex index;
  for (const auto& t : tweets) {
    index[t.label];
    for (const auto& w : t.tokens) {
      if (shared.count(w)) continue;
      auto [it, inserted] = owner.emplace(w, t.label);
      if (!inserted && it->second != t.label) {
        shared.insert(w);
        owner.erase(it);
      }
    }
  }
  for (const auto& [word, label] : owner) index[label].insert(word);
  return index;
}

double uniqueness(const ProcessedTweet& tweet, const UniqueWordIndex& index) {
  const std::set<std::string> distinct(tweet.tokens.begin(), tweet.tokens.end());
  if (distinct.empty()) throw ArgumentError("uniqueness: tweet '" + tweet.id + "' has no tokens");
  auto it = index.find(tweet.label);
  std::size_t hits = 0;
  if (it != index.end()) {
    for (const auto& w : distinct) hits += it->second.count(w);
  }
  return static_cast<double>(hits) / static_cast<double>(distinct.size());
}

int uniqueness_bin(double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw ArgumentError("uniqueness_bin: score outside [0, 1]");
  if (score == 0.0) return 0;
  // Compare against the correctly rounded boundaries k/10 so that exact
  // tenths land in the lower bin.
  for (int k = 1; k < 10; ++k) {
    if (score <= static_cast<double>(k) / 10.0) return k;
  }
  return 10;
}

std::string bin_label(int bin) {
  if (bin < 0 || bin >= kBinCount) throw ArgumentError("bin_label: bin out of range");
  if (bin == 0) return "0";
  if (bin == 10) return "1.0";
  return "0." + std::to_string(bin);
}

UniquenessReport distribution(const std::vector<ProcessedTweet>& tweets) {
  if (tweets.empty()) throw DataError("distribution: dataset is empty");
  const auto index = unique_words(tweets);
  UniquenessReport r;
  std::map<std::string, std::array<long long, kBinCount>> per_class_counts;
  for (const auto& [label, words] : index) {
    r.unique_word_counts[label] = words.size();
    per_class_counts[label] = {};
  }
  for (const auto& t : tweets) {
    if (t.tokens.empty()) {
      std::cerr << "warning: tweet '" << t.id << "' has no tokens after preprocessing; excluded\n";
      r.skipped_ids.push_back(t.id);
      continue;
    }
    const double u = uniqueness(t, index);
    const int b = uniqueness_bin(u);
    r.scores.push_back({t.id, t.label, u, b});
    ++r.bin_counts[static_cast<std::size_t>(b)];
    ++per_class_counts[t.label][static_cast<std::size_t>(b)];
  }
  if (r.scores.empty()) throw DataError("distribution: no tweet has tokens");
  const auto n = static_cast<double>(r.scores.size());
  double running = 0.0;
  for (int b = 0; b < kBinCount; ++b) {
    const auto k = static_cast<std::size_t>(b);
    r.bin_percent[k] = 100.0 * static_cast<double>(r.bin_counts[k]) / n;
    running += r.bin_percent[k];
    r.cumulative_percent[k] = running;
  }
  for (const auto& [label, counts] : per_class_counts) {
    long long total = 0;
    for (auto c : counts) total += c;
    auto& fractions = r.class_fractions[label];
    for (std::size_t k = 0; k < counts.size(); ++k) {
      fractions[k] = total == 0 ? 0.0 : static_cast<double>(counts[k]) / static_cast<double>(total);
    }
  }
  return r;
}

std::vector<std::string> additional_true_positives(const std::vector<Prediction>& gold,
                                                   const std::vector<Prediction>& pred_a,
                                                   const std::vector<Prediction>& pred_b) {
  auto to_map = [&](const std::vector<Prediction>& preds, const char* name) {
    std::unordered_map<std::string, std::string> m;
    for (const auto& p : preds) m.emplace(p.id, p.label);
    for (const auto& g : gold) {
      if (!m.count(g.id)) throw DataError(std::string(name) + " is missing id '" + g.id + "'");
    }
    if (m.size() != gold.size()) {
      std::unordered_map<std::string, bool> gold_ids;
      for (const auto& g : gold) gold_ids.emplace(g.id, true);
      for (const auto& p : preds) {
        if (!gold_ids.count(p.id)) throw DataError(std::string(name) + " has id '" + p.id + "' not in the gold data");
      }
    }
    return m;
  };
  const auto a = to_map(pred_a, "prediction file A");
  const auto b = to_map(pred_b, "prediction file B");
  std::vector<std::string> ids;
  for (const auto& g : gold) {
    if (a.at(g.id) == g.label && b.at(g.id) != g.label) ids.push_back(g.id);
  }
  return ids;
}

AtpReport atp_distribution(const std::vector<std::string>& atp_ids, const std::map<std::string, double>& scores) {
  AtpReport r;
  r.ids = atp_ids;
  std::array<long long, kBinCount> counts{};
  for (const auto& id : atp_ids) {
    auto it = scores.find(id);
    if (it == scores.end()) throw DataError("atp_distribution: no uniqueness score for id '" + id + "'");
    ++counts[static_cast<std::size_t>(uniqueness_bin(it->second))];
  }
  if (atp_ids.empty()) return r;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    r.percent[k] = 100.0 * static_cast<double>(counts[k]) / static_cast<double>(atp_ids.size());
  }
  return r;
}

nlohmann::ordered_json to_json(const UniquenessReport& report) {
  nlohmann::ordered_json bins = nlohmann::ordered_json::object();
  for (int b = 0; b < kBinCount; ++b) {
    const auto k = static_cast<std::size_t>(b);
    nlohmann::ordered_json classes = nlohmann::ordered_json::object();
    for (const auto& [label, fractions] : report.class_fractions) classes[label] = fractions[k];
    bins[bin_label(b)] = {{"count", report.bin_counts[k]},
                          {"percent", report.bin_percent[k]},
                          {"cumulative_percent", report.cumulative_percent[k]},
                          {"class_fractions", std::move(classes)}};
  }
  nlohmann::ordered_json uwords = nlohmann::ordered_json::object();
  for (const auto& [label, n] : report.unique_word_counts) uwords[label] = n;
  return {{"tweets", report.scores.size()},
          {"skipped_ids", report.skipped_ids},
          {"unique_word_counts", std::move(uwords)},
          {"bins", std::move(bins)}};
}

nlohmann::ordered_json to_json(const AtpReport& report) {
  nlohmann::ordered_json bins = nlohmann::ordered_json::object();
  for (int b = 0; b < kBinCount; ++b) bins[bin_label(b)] = report.percent[static_cast<std::size_t>(b)];
  nlohmann::ordered_json out = {{"count", report.ids.size()}, {"ids", report.ids}, {"percent", std::move(bins)}};
  if (report.ids.empty()) out["note"] = "no additional true positives";
  return out;
}

}  // namespace ltnn
