// SPDX-License-Identifier: Apache-2.0
#include "ltnn/config.hpp"

#include <charconv>
#include <sstream>

#include "ltnn/dataset.hpp"

namespace ltnn {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

unsigned long long parse_unsigned(const std::string& key, const std::string& v) {
  unsigned long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("config key '" + key + "': expected non-negative integer, got '" + v + "'");
  }
  return out;
}

const std::set<std::string>& model_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k;
    for (const auto& [key, _] : ModelConfig{}.to_key_values()) k.insert(key);
    return k;
  }();
  return keys;
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(source + ":" + std::to_string(line_no) + ": empty key");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) { return parse_key_values(read_file(path), path.string()); }

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::apply(const KeyValues& kv) {
  KeyValues model_kv;
  for (const auto& [key, value] : kv) {
    if (model_keys().count(key)) {
      if (key == "seed") seed = parse_unsigned(key, value);
      model_kv[key] = value;
    } else if (key == "dataset") {
      dataset = value;
    } else if (key == "embeddings") {
      embeddings = value;
    } else if (key == "embeddings_format") {
      try {
        embeddings_format = parse_embedding_format(value);
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
    } else if (key == "lexicon") {
      lexicon = value;
    } else if (key == "contractions") {
      contractions = value;
    } else if (key == "non_hate_label") {
      non_hate_label = value;
    } else if (key == "k") {
      k = parse_unsigned(key, value);
    } else if (key == "epochs") {
      epochs = static_cast<int>(parse_unsigned(key, value));
    } else if (key == "batch_size") {
      batch_size = parse_unsigned(key, value);
    } else if (key == "stratified") {
      if (value != "true" && value != "false") throw UsageError("config key 'stratified': expected true/false");
      stratified = value == "true";
    } else if (key == "out") {
      out = value;
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  model.apply(model_kv);
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv = model.to_key_values();
  kv["dataset"] = dataset.string();
  kv["embeddings"] = embeddings.string();
  kv["embeddings_format"] = to_string(embeddings_format);
  kv["lexicon"] = lexicon.string();
  kv["contractions"] = contractions.string();
  kv["non_hate_label"] = non_hate_label;
  kv["k"] = std::to_string(k);
  kv["epochs"] = std::to_string(epochs);
  kv["batch_size"] = std::to_string(batch_size);
  kv["stratified"] = stratified ? "true" : "false";
  if (seed) kv["seed"] = std::to_string(*seed);
  kv["out"] = out.string();
  return kv;
}

}  // namespace ltnn
