// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ltnn/model.hpp"

namespace ltnn {

inline constexpr char kWeightMagic[4] = {'L', 'T', 'N', 'N'};
inline constexpr std::uint32_t kWeightFormatVersion = 1;

/// Little-endian container: magic "LTNN", u32 version, u32 tensor count, then
/// per tensor u32 name length + UTF-8 name, u32 rank, u32 extents, f64 values.
std::string encode_weights(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_weights(const std::string& bytes, const std::string& source = "<memory>");

void save_weights(const std::filesystem::path& path, const Model& model);
std::vector<NamedTensor> load_weights(const std::filesystem::path& path);

}  // namespace ltnn
