// SPDX-License-Identifier: Apache-2.0
#include "ltnn/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ltnn/errors.hpp"

namespace ltnn {
namespace {

bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_high(char c) { return static_cast<unsigned char>(c) >= 0x80; }

// Letters, digits, underscore and any non-ASCII byte (UTF-8 passthrough).
bool is_word_char(char c) { return is_ascii_upper(c) || is_ascii_lower(c) || is_digit(c) || c == '_' || is_high(c); }

char to_lower(char c) { return is_ascii_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

bool is_numeral(std::string_view s) {
  if (s.empty() || !is_digit(s.front()) || !is_digit(s.back())) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return is_digit(c) || c == '.' || c == ','; });
}

bool starts_with_icase(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (to_lower(s[pos + i]) != prefix[i]) return false;
  }
  return true;
}

std::size_t find_url_start(std::string_view chunk) {
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    if (starts_with_icase(chunk, i, "http://") || starts_with_icase(chunk, i, "https://") ||
        starts_with_icase(chunk, i, "www.")) {
      return i;
    }
  }
  return std::string_view::npos;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      if (i > start) out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// Camel-case and letter/digit boundaries. Underscores separate chunks and
// are dropped.
std::vector<std::string> camel_chunks(std::string_view body) {
  std::vector<std::string> chunks;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) chunks.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (!current.empty()) {
      const char prev = current.back();
      const bool next_lower = i + 1 < body.size() && is_ascii_lower(body[i + 1]);
      const bool boundary = (is_ascii_upper(c) && (is_ascii_lower(prev) || is_digit(prev))) ||
                            (is_ascii_upper(c) && is_ascii_upper(prev) && next_lower) ||
                            (is_digit(c) != is_digit(prev));
      if (boundary) flush();
    }
    current.push_back(c);
  }
  flush();
  return chunks;
}

// Unigram Viterbi segmentation of one lowercase chunk.
std::vector<std::string> viterbi_segment(const std::string& chunk, const Lexicon& lexicon) {
  const std::size_t n = chunk.size();
  const double total = static_cast<double>(std::max<std::uint64_t>(lexicon.total(), 1));
  const double unknown_cost = std::log(1.0 / total);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<double> best(n + 1, kNegInf);
  std::vector<std::size_t> back(n + 1, 0);
  std::vector<bool> known(n + 1, false);
  best[0] = 0.0;
  const std::size_t max_len = std::max<std::size_t>(lexicon.longest_word(), 1);
  for (std::size_t end = 1; end <= n; ++end) {
    const std::size_t min_start = end > max_len ? end - max_len : 0;
    for (std::size_t start = min_start; start < end; ++start) {
      if (best[start] == kNegInf) continue;
      const std::string_view piece(chunk.data() + start, end - start);
      const std::uint64_t freq = lexicon.count(piece);
      double score;
      bool is_known = freq > 0;
      if (is_known) {
        score = best[start] + std::log(static_cast<double>(freq) / total);
      } else if (end - start == 1) {
        score = best[start] + unknown_cost;
      } else {
        continue;
      }
      if (score > best[end]) {
        best[end] = score;
        back[end] = start;
        known[end] = is_known;
      }
    }
  }

  std::vector<std::pair<std::string, bool>> pieces;
  for (std::size_t end = n; end > 0; end = back[end]) {
    pieces.emplace_back(chunk.substr(back[end], end - back[end]), known[end]);
  }
  std::reverse(pieces.begin(), pieces.end());

  // Adjacent unknown characters are merged into one token.
  std::vector<std::string> words;
  bool previous_unknown = false;
  for (auto& [piece, is_known] : pieces) {
    if (!is_known && previous_unknown) {
      words.back() += piece;
    } else {
      words.push_back(std::move(piece));
    }
    previous_unknown = !is_known;
  }
  return words;
}

void emit_word(std::string_view word, const ContractionTable& contractions, std::vector<std::string>& out) {
  std::string lower = lowercase(word);
  while (!lower.empty() && lower.front() == '\'') lower.erase(lower.begin());
  while (!lower.empty() && lower.back() == '\'') lower.pop_back();
  if (lower.empty()) return;
  if (auto it = contractions.find(lower); it != contractions.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
    return;
  }
  for (auto& part : split_on(lower, '\'')) {
    out.push_back(is_numeral(part) ? std::string(kNumberToken) : std::move(part));
  }
}

struct PreToken {
  std::string text;
  bool hashtag = false;
};

// Splits a non-URL chunk into words, hashtags and placeholders; everything
// else is punctuation and dropped.
void scan_chunk(std::string_view chunk, const ContractionTable& contractions, std::vector<PreToken>& out) {
  std::size_t i = 0;
  while (i < chunk.size()) {
    const char c = chunk[i];
    if ((c == '#' || c == '@') && i + 1 < chunk.size() && is_word_char(chunk[i + 1])) {
      std::size_t j = i + 1;
      while (j < chunk.size() && is_word_char(chunk[j])) ++j;
      if (c == '#') {
        out.push_back({std::string(chunk.substr(i, j - i)), true});
      } else {
        out.push_back({std::string(kMentionToken), false});
      }
      i = j;
      continue;
    }
    if (c == '<') {
      bool matched = false;
      for (std::string_view ph : {kUrlToken, kMentionToken, kNumberToken}) {
        if (starts_with_icase(chunk, i, ph)) {
          out.push_back({std::string(ph), false});
          i += ph.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < chunk.size()) {
        const char d = chunk[j];
        const bool numeric_sep = (d == '.' || d == ',') && j > i && is_digit(chunk[j - 1]) && j + 1 < chunk.size() &&
                                 is_digit(chunk[j + 1]);
        if (is_word_char(d) || d == '\'' || numeric_sep) {
          ++j;
        } else {
          break;
        }
      }
      std::vector<std::string> words;
      emit_word(chunk.substr(i, j - i), contractions, words);
      for (auto& w : words) out.push_back({std::move(w), false});
      i = j;
      continue;
    }
    ++i;
  }
}

}  // namespace

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file " + path.string());
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    long long count = 0;
    if (!(fields >> word >> count) || count < 1) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'word count' with count >= 1");
    }
    lex.add(lowercase(word), static_cast<std::uint64_t>(count));
  }
  return lex;
}

void Lexicon::add(std::string word, std::uint64_t count) {
  if (word.empty() || count == 0) throw ArgumentError("Lexicon::add: empty word or zero count");
  longest_ = std::max(longest_, word.size());
  total_ += count;
  counts_[std::move(word)] += count;
}

std::uint64_t Lexicon::count(std::string_view word) const {
  auto it = counts_.find(std::string(word));
  return it == counts_.end() ? 0 : it->second;
}

ContractionTable load_contractions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open contractions file " + path.string());
  ContractionTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'contraction<TAB>expansion'");
    }
    auto expansion = split_whitespace(lowercase(std::string_view(line).substr(tab + 1)));
    if (expansion.empty()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": empty expansion");
    }
    table.emplace(lowercase(std::string_view(line).substr(0, tab)), std::move(expansion));
  }
  return table;
}

bool is_placeholder(std::string_view token) {
  return token == kUrlToken || token == kMentionToken || token == kNumberToken;
}

std::string collapse_elongation(std::string_view word, const Lexicon& lexicon) {
  // Run-length view: (char, run length).
  std::vector<std::pair<char, std::size_t>> runs;
  for (char c : word) {
    if (!runs.empty() && runs.back().first == c) {
      ++runs.back().second;
    } else {
      runs.emplace_back(c, 1);
    }
  }
  const bool elongated = std::any_of(runs.begin(), runs.end(), [](const auto& r) { return r.second >= 3; });
  if (!elongated) return std::string(word);

  auto rebuild = [&](std::size_t cap) {
    std::string out;
    for (const auto& [c, len] : runs) out.append(len >= 3 ? cap : len, c);
    return out;
  };
  std::string two = rebuild(2);
  if (lexicon.contains(two)) return two;
  std::string one = rebuild(1);
  if (lexicon.contains(one)) return one;
  return two;
}

std::vector<std::string> segment_hashtag(std::string_view tag, const Lexicon& lexicon) {
  if (tag.empty() || tag.front() != '#') throw ArgumentError("segment_hashtag: tag must begin with '#'");
  std::vector<std::string> words;
  for (const auto& chunk : camel_chunks(tag.substr(1))) {
    auto pieces = viterbi_segment(lowercase(chunk), lexicon);
    words.insert(words.end(), std::make_move_iterator(pieces.begin()), std::make_move_iterator(pieces.end()));
  }
  return words;
}

std::vector<std::string> normalize_text(std::string_view text, const Lexicon& lexicon,
                                        const ContractionTable& contractions, const TokenHook& hook) {
  std::vector<PreToken> pre;
  for (const auto& chunk : split_whitespace(text)) {
    const std::size_t url = find_url_start(chunk);
    scan_chunk(std::string_view(chunk).substr(0, url == std::string_view::npos ? chunk.size() : url), contractions,
               pre);
    if (url != std::string_view::npos) pre.push_back({std::string(kUrlToken), false});
  }

  std::vector<std::string> tokens;
  auto push = [&](std::string token) {
    if (!is_placeholder(token)) {
      token = collapse_elongation(token, lexicon);
      if (hook) token = hook(token);
    }
    if (!token.empty()) tokens.push_back(std::move(token));
  };
  for (auto& p : pre) {
    if (!p.hashtag) {
      push(std::move(p.text));
      continue;
    }
    for (auto& word : segment_hashtag(p.text, lexicon)) {
      push(is_numeral(word) ? std::string(kNumberToken) : std::move(word));
    }
  }
  return tokens;
}

ProcessedTweet normalize(const RawTweet& raw, const Lexicon& lexicon, const ContractionTable& contractions,
                         const TokenHook& hook) {
  return {raw.id, raw.label, normalize_text(raw.text, lexicon, contractions, hook)};
}

std::vector<ProcessedTweet> normalize_all(const std::vector<RawTweet>& raw, const Lexicon& lexicon,
                                          const ContractionTable& contractions, const TokenHook& hook) {
  std::vector<ProcessedTweet> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(normalize(r, lexicon, contractions, hook));
  return out;
}

}  // namespace ltnn
