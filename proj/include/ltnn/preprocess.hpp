// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ltnn {

struct RawTweet {
  std::string id;
  std::string label;
  std::string text;
};

struct ProcessedTweet {
  std::string id;
  std::string label;
  std::vector<std::string> tokens;
};

/// Word frequency table used for elongation checks and hashtag segmentation.
class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon load(const std::filesystem::path& path);

  void add(std::string word, std::uint64_t count);
  bool contains(std::string_view word) const { return counts_.find(std::string(word)) != counts_.end(); }
  std::uint64_t count(std::string_view word) const;
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  std::size_t longest_word() const { return longest_; }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::size_t longest_ = 0;
};

/// Maps a contraction ("can't") onto its expansion words ("can", "not").
using ContractionTable = std::unordered_map<std::string, std::vector<std::string>>;

ContractionTable load_contractions(const std::filesystem::path& path);

/// Optional per-token hook run after the built-in steps. This is where a
/// spelling corrector or lemmatiser would plug in; returning an empty string
/// drops the token.
using TokenHook = std::function<std::string(const std::string&)>;

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kMentionToken = "<mention>";
inline constexpr std::string_view kNumberToken = "<number>";

bool is_placeholder(std::string_view token);

/// Collapses runs of three or more identical characters. Runs are first
/// shortened to two; if that word is unknown they are shortened to one; if
/// that is unknown as well the two-character form is kept.
std::string collapse_elongation(std::string_view word, const Lexicon& lexicon);

/// Splits a hashtag into lowercase words: camel-case and letter/digit
/// boundaries first, then a unigram Viterbi segmentation of each chunk.
/// Runs of characters the lexicon cannot explain are kept together.
std::vector<std::string> segment_hashtag(std::string_view tag, const Lexicon& lexicon);

std::vector<std::string> normalize_text(std::string_view text, const Lexicon& lexicon,
                                        const ContractionTable& contractions, const TokenHook& hook = {});

ProcessedTweet normalize(const RawTweet& raw, const Lexicon& lexicon, const ContractionTable& contractions,
                         const TokenHook& hook = {});

std::vector<ProcessedTweet> normalize_all(const std::vector<RawTweet>& raw, const Lexicon& lexicon,
                                          const ContractionTable& contractions, const TokenHook& hook = {});

}  // namespace ltnn
