// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "ltnn/model.hpp"
#include "ltnn/vocab.hpp"

namespace ltnn {

using KeyValues = std::map<std::string, std::string>;

/// Flat UTF-8 `key = value` text; '#' starts a comment line.
KeyValues parse_key_values(const std::string& text, const std::string& source = "<config>");
KeyValues read_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path embeddings;
  EmbeddingFormat embeddings_format = EmbeddingFormat::kGloveText;
  std::filesystem::path lexicon;       // optional
  std::filesystem::path contractions;  // optional
  ModelConfig model;
  std::string non_hate_label = "none";
  std::size_t k = 5;
  int epochs = 10;
  std::size_t batch_size = 100;
  bool stratified = true;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;

  /// Unknown keys raise UsageError.
  void apply(const KeyValues& kv);
  KeyValues to_key_values() const;
};

}  // namespace ltnn
