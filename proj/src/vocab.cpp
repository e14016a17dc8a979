// SPDX-License-Identifier: Apache-2.0
#include "ltnn/vocab.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ltnn/dataset.hpp"
#include "ltnn/errors.hpp"

namespace ltnn {
namespace {

const std::string kPadWord = "<pad>";
const std::string kUnkWord = "<unk>";

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Vocabulary::Vocabulary() : words_{kPadWord, kUnkWord} {}

Vocabulary Vocabulary::build(const std::vector<ProcessedTweet>& tweets) {
  Vocabulary v;
  for (const auto& t : tweets) {
    for (const auto& tok : t.tokens) v.add(tok);
  }
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path.string());
  Vocabulary v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": empty vocabulary entry");
    if (v.find(line)) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": duplicate word '" + line + "'");
    v.add(line);
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::string out;
  for (std::size_t i = 2; i < words_.size(); ++i) out += words_[i] + "\n";
  write_file(path, out);
}

std::int32_t Vocabulary::add(const std::string& word) {
  if (auto it = index_.find(word); it != index_.end()) return it->second;
  const auto idx = static_cast<std::int32_t>(words_.size());
  words_.push_back(word);
  index_.emplace(word, idx);
  return idx;
}

std::optional<std::int32_t> Vocabulary::find(const std::string& word) const {
  if (auto it = index_.find(word); it != index_.end()) return it->second;
  return std::nullopt;
}

std::int32_t Vocabulary::index_of(const std::string& word) const { return find(word).value_or(kUnkIndex); }

const std::string& Vocabulary::word_at(std::int32_t index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= words_.size()) {
    throw ArgumentError("vocabulary index " + std::to_string(index) + " out of range");
  }
  return words_[static_cast<std::size_t>(index)];
}

EmbeddingFormat parse_embedding_format(const std::string& name) {
  if (name == "word2vec-text" || name == "word2vec") return EmbeddingFormat::kWord2VecText;
  if (name == "glove-text" || name == "glove") return EmbeddingFormat::kGloveText;
  throw UsageError("unknown embedding format '" + name + "' (expected word2vec-text or glove-text)");
}

std::string to_string(EmbeddingFormat format) {
  return format == EmbeddingFormat::kWord2VecText ? "word2vec-text" : "glove-text";
}

const RowVector* EmbeddingTable::find(const std::string& word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

bool EmbeddingTable::insert(const std::string& word, RowVector vec) {
  if (vec.size() != dim_) {
    throw FormatError("embedding for '" + word + "' has dimension " + std::to_string(vec.size()) + ", expected " +
                      std::to_string(dim_));
  }
  return vectors_.emplace(word, std::move(vec)).second;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, EmbeddingFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file " + path.string());
  const std::string src = path.string();

  std::string line;
  std::size_t line_no = 0;
  Index dim = 0;
  long long declared_count = -1;
  if (format == EmbeddingFormat::kWord2VecText) {
    if (!std::getline(in, line)) throw ParseError(src + ":1: missing 'V d' header");
    ++line_no;
    auto fields = split_spaces(line);
    long long d = 0;
    if (fields.size() != 2 || std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), declared_count).ec != std::errc() ||
        std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), d).ec != std::errc() || d <= 0 ||
        declared_count < 0) {
      throw ParseError(src + ":1: malformed header, expected 'V d'");
    }
    dim = static_cast<Index>(d);
  }

  EmbeddingTable table(dim);
  long long rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_spaces(line);
    if (fields.size() < 2) throw ParseError(src + ":" + std::to_string(line_no) + ": expected 'word v1 ... vd'");
    const Index got = static_cast<Index>(fields.size() - 1);
    if (table.dim_ == 0) table.dim_ = got;
    if (got != table.dim_) {
      throw FormatError(src + ":" + std::to_string(line_no) + ": vector has " + std::to_string(got) +
                        " components, expected " + std::to_string(table.dim_));
    }
    RowVector vec(got);
    for (Index k = 0; k < got; ++k) {
      if (!parse_double(fields[static_cast<std::size_t>(k + 1)], vec[k])) {
        throw ParseError(src + ":" + std::to_string(line_no) + ": malformed number '" +
                         std::string(fields[static_cast<std::size_t>(k + 1)]) + "'");
      }
    }
    table.insert(std::string(fields[0]), std::move(vec));
    ++rows;
  }
  if (declared_count >= 0 && rows != declared_count) {
    throw FormatError(src + ": header declares " + std::to_string(declared_count) + " vectors, found " +
                      std::to_string(rows));
  }
  if (table.dim_ == 0) throw FormatError(src + ": no vectors found");
  return table;
}

EmbeddingMatrix build_matrix(const Vocabulary& vocab, const EmbeddingTable& table, std::uint64_t seed) {
  if (table.dim() <= 0) throw ArgumentError("build_matrix: embedding dimension must be positive");
  if (vocab.size() <= 2) throw ArgumentError("build_matrix: vocabulary has no words");
  RngStream rng(seed);
  EmbeddingMatrix out;
  out.weights = Matrix::Zero(vocab.size(), table.dim());
  for (Index i = 1; i < vocab.size(); ++i) {
    const auto idx = static_cast<std::int32_t>(i);
    const RowVector* known = i == kUnkIndex ? nullptr : table.find(vocab.word_at(idx));
    if (known) {
      out.weights.row(i) = *known;
    } else {
      out.weights.row(i) = rng_uniform(rng, -kOovInitRange, kOovInitRange, table.dim()).transpose();
      if (i != kUnkIndex) out.oov_words.insert(vocab.word_at(idx));
    }
  }
  out.oov_rate = static_cast<double>(out.oov_words.size()) / static_cast<double>(vocab.size() - 2);
  return out;
}

IndexSequence encode(const ProcessedTweet& tweet, const Vocabulary& vocab, Index max_len) {
  if (max_len < 1) throw ArgumentError("encode: max_len must be >= 1");
  IndexSequence seq(static_cast<std::size_t>(max_len), kPadIndex);
  const std::size_t n = std::min(tweet.tokens.size(), seq.size());
  for (std::size_t i = 0; i < n; ++i) seq[i] = vocab.index_of(tweet.tokens[i]);
  return seq;
}

std::vector<std::string> decode(const IndexSequence& seq, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (auto idx : seq) {
    if (idx == kPadIndex) break;
    out.push_back(vocab.word_at(idx));
  }
  return out;
}

}  // namespace ltnn
