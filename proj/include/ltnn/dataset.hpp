// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ltnn/preprocess.hpp"

namespace ltnn {

/// RFC-4180 CSV: quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& content, const std::string& source);
std::string csv_escape(const std::string& field);

/// Reads `id,label,text`. Ids must be unique.
std::vector<RawTweet> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<RawTweet>& rows);

/// Sorted distinct labels; this order defines class indices everywhere.
std::vector<std::string> label_set(const std::vector<RawTweet>& rows);
std::vector<std::string> label_set(const std::vector<ProcessedTweet>& rows);

struct Prediction {
  std::string id;
  std::string label;
};

/// Reads `id,pred_label`.
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& rows);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ltnn
