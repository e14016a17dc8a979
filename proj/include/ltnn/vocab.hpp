// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltnn/preprocess.hpp"
#include "ltnn/rng.hpp"
#include "ltnn/tensor.hpp"

namespace ltnn {

using IndexSequence = std::vector<std::int32_t>;

inline constexpr std::int32_t kPadIndex = 0;
inline constexpr std::int32_t kUnkIndex = 1;
inline constexpr Index kDefaultSeqLen = 100;

/// Word <-> index map. Index 0 is PAD, index 1 is UNK, surface words start
/// at 2 in first-seen order.
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary build(const std::vector<ProcessedTweet>& tweets);
  /// One surface word per line, in index order starting at 2.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Returns the index of `word`, adding it if absent.
  std::int32_t add(const std::string& word);
  std::int32_t index_of(const std::string& word) const;
  std::optional<std::int32_t> find(const std::string& word) const;
  const std::string& word_at(std::int32_t index) const;

  Index size() const { return static_cast<Index>(words_.size()); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> index_;
};

enum class EmbeddingFormat { kWord2VecText, kGloveText };

EmbeddingFormat parse_embedding_format(const std::string& name);
std::string to_string(EmbeddingFormat format);

/// Pretrained word vectors of a common dimension.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(Index dim = 0) : dim_(dim) {}

  static EmbeddingTable load(const std::filesystem::path& path, EmbeddingFormat format);

  Index dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const RowVector* find(const std::string& word) const;
  /// Keeps the first vector seen for a word; returns false for duplicates.
  bool insert(const std::string& word, RowVector vec);

 private:
  Index dim_;
  std::unordered_map<std::string, RowVector> vectors_;
};

struct EmbeddingMatrix {
  Matrix weights;  // V x d
  std::set<std::string> oov_words;
  double oov_rate = 0.0;  // |oov_words| / number of surface words
};

inline constexpr double kOovInitRange = 0.25;

/// Known words copy their table row; OOV words and UNK draw U[-0.25, 0.25)
/// in index order; PAD stays zero.
EmbeddingMatrix build_matrix(const Vocabulary& vocab, const EmbeddingTable& table, std::uint64_t seed);

/// Maps tokens to indices, truncating to the first `max_len` and post-padding
/// with PAD.
IndexSequence encode(const ProcessedTweet& tweet, const Vocabulary& vocab, Index max_len = kDefaultSeqLen);
std::vector<std::string> decode(const IndexSequence& seq, const Vocabulary& vocab);

}  // namespace ltnn
