// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltnn/dataset.hpp"
#include "ltnn/preprocess.hpp"

namespace ltnn {

/// Class label -> words that occur in tweets of that class and no other.
using UniqueWordIndex = std::map<std::string, std::set<std::string>>;

UniqueWordIndex unique_words(const std::vector<ProcessedTweet>& tweets);

/// Fraction of the tweet's distinct words that are unique to its class.
/// Throws ArgumentError for a tweet without tokens.
double uniqueness(const ProcessedTweet& tweet, const UniqueWordIndex& index);

inline constexpr int kBinCount = 11;

/// 0 for a score of exactly 0, otherwise the k in 1..10 with score in ((k-1)/10, k/10].
int uniqueness_bin(double score);
/// Upper-bound label of a bin: "0", "0.1", ..., "1.0".
std::string bin_label(int bin);

struct TweetScore {
  std::string id;
  std::string label;
  double score = 0.0;
  int bin = 0;
};

struct UniquenessReport {
  std::vector<TweetScore> scores;         // scored tweets, dataset order
  std::vector<std::string> skipped_ids;   // tweets without tokens
  std::map<std::string, std::size_t> unique_word_counts;
  std::array<long long, kBinCount> bin_counts{};
  std::array<double, kBinCount> bin_percent{};
  std::array<double, kBinCount> cumulative_percent{};
  /// Per class, the fraction of that class's tweets in each bin.
  std::map<std::string, std::array<double, kBinCount>> class_fractions;
};

UniquenessReport distribution(const std::vector<ProcessedTweet>& tweets);

/// Ids (in gold order) that `pred_a` gets right and `pred_b` gets wrong.
/// All three lists must cover the same ids.
std::vector<std::string> additional_true_positives(const std::vector<Prediction>& gold,
                                                   const std::vector<Prediction>& pred_a,
                                                   const std::vector<Prediction>& pred_b);

struct AtpReport {
  std::vector<std::string> ids;
  std::array<double, kBinCount> percent{};  // sums to 100 unless ids is empty
};

AtpReport atp_distribution(const std::vector<std::string>& atp_ids, const std::map<std::string, double>& scores);

nlohmann::ordered_json to_json(const UniquenessReport& report);
nlohmann::ordered_json to_json(const AtpReport& report);

}  // namespace ltnn
