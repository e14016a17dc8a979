// SPDX-License-Identifier: Apache-2.0
#include "ltnn/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ltnn/errors.hpp"

namespace ltnn {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::vector<std::string>> parse_csv(const std::string& content, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) {
          throw ParseError(source + ":" + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError(source + ":" + std::to_string(row_line) + ": unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

namespace {

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::vector<std::string>& header) {
  auto rows = parse_csv(read_file(path), path.string());
  if (rows.empty()) throw ParseError(path.string() + ":1: missing header");
  if (rows.front() != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw ParseError(path.string() + ":1: expected header '" + expected + "'");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw ParseError(path.string() + ": record " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                       " fields, expected " + std::to_string(header.size()));
    }
  }
  rows.erase(rows.begin());
  return rows;
}

}  // namespace

std::vector<RawTweet> read_dataset(const std::filesystem::path& path) {
  std::vector<RawTweet> out;
  std::unordered_set<std::string> seen;
  for (auto& r : read_table(path, {"id", "label", "text"})) {
    if (r[0].empty() || r[1].empty()) throw DataError(path.string() + ": empty id or label in record '" + r[0] + "'");
    if (!seen.insert(r[0]).second) throw DataError(path.string() + ": duplicate id '" + r[0] + "'");
    out.push_back({std::move(r[0]), std::move(r[1]), std::move(r[2])});
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<RawTweet>& rows) {
  std::string out = "id,label,text\n";
  for (const auto& r : rows) out += csv_escape(r.id) + "," + csv_escape(r.label) + "," + csv_escape(r.text) + "\n";
  write_file(path, out);
}

std::vector<std::string> label_set(const std::vector<RawTweet>& rows) {
  std::set<std::string> labels;
  for (const auto& r : rows) labels.insert(r.label);
  return {labels.begin(), labels.end()};
}

std::vector<std::string> label_set(const std::vector<ProcessedTweet>& rows) {
  std::set<std::string> labels;
  for (const auto& r : rows) labels.insert(r.label);
  return {labels.begin(), labels.end()};
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  std::unordered_set<std::string> seen;
  for (auto& r : read_table(path, {"id", "pred_label"})) {
    if (!seen.insert(r[0]).second) throw DataError(path.string() + ": duplicate id '" + r[0] + "'");
    out.push_back({std::move(r[0]), std::move(r[1])});
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& rows) {
  std::string out = "id,pred_label\n";
  for (const auto& r : rows) out += csv_escape(r.id) + "," + csv_escape(r.label) + "\n";
  write_file(path, out);
}

}  // namespace ltnn
