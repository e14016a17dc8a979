// SPDX-License-Identifier: Apache-2.0
#include "ltnn/serialize.hpp"

#include <bit>
#include <cstring>

#include "ltnn/dataset.hpp"

namespace ltnn {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64(const char* what) {
    need(8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(source_ + ": truncated weight file while reading " + what + " at byte " + std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_weights(const std::vector<NamedTensor>& tensors) {
  std::string out(kWeightMagic, 4);
  put_u32(out, kWeightFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.value.rank()));
    for (Index e : t.value.shape()) put_u32(out, static_cast<std::uint32_t>(e));
    for (Index i = 0; i < t.value.size(); ++i) put_f64(out, t.value.data()[i]);
  }
  return out;
}

std::vector<NamedTensor> decode_weights(const std::string& bytes, const std::string& source) {
  Reader in(bytes, source);
  if (in.bytes(4, "magic") != std::string(kWeightMagic, 4)) throw FormatError(source + ": not an LTNN weight file");
  const auto version = in.u32("version");
  if (version != kWeightFormatVersion) {
    throw FormatError(source + ": unsupported weight format version " + std::to_string(version));
  }
  const auto count = in.u32("tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = in.u32("name length");
    std::string name = in.bytes(name_len, "tensor name");
    const auto rank = in.u32("rank");
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto e = in.u32("extent");
      if (e == 0) throw FormatError(source + ": tensor '" + name + "' has a zero extent");
      shape.push_back(static_cast<Index>(e));
    }
    Vector values(shape_size(shape));
    for (Index i = 0; i < values.size(); ++i) values[i] = in.f64("values");
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  if (!in.done()) throw FormatError(source + ": trailing bytes after last tensor");
  return out;
}

void save_weights(const std::filesystem::path& path, const Model& model) {
  write_file(path, encode_weights(model.state()));
}

std::vector<NamedTensor> load_weights(const std::filesystem::path& path) {
  return decode_weights(read_file(path), path.string());
}

}  // namespace ltnn
