#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <variant>
#include <vector>

#include "shapeval/error.hpp"

namespace shapeval {

enum class Dtype : std::uint8_t { F32 = 1, F64 = 2 };

/// Dense row-major tensor as stored on disk. Elements keep their stored
/// precision so that write/read is bitwise lossless.
struct TensorFile {
  Dtype dtype = Dtype::F64;
  std::vector<std::uint64_t> shape;
  std::variant<std::vector<float>, std::vector<double>> data = std::vector<double>{};

  std::size_t element_count() const {
    return std::visit([](const auto& v) { return v.size(); }, data);
  }

  /// Values promoted to double.
  std::vector<double> as_f64() const {
    return std::visit([](const auto& v) { return std::vector<double>(v.begin(), v.end()); }, data);
  }

  static TensorFile from_f64(std::vector<std::uint64_t> shape, std::vector<double> values) {
    return TensorFile{Dtype::F64, std::move(shape), std::move(values)};
  }
  static TensorFile from_f32(std::vector<std::uint64_t> shape, std::vector<float> values) {
    return TensorFile{Dtype::F32, std::move(shape), std::move(values)};
  }

  friend bool operator==(const TensorFile&, const TensorFile&) = default;
};

namespace tensor_format {

inline constexpr std::array<char, 8> kMagic{'S', 'T', 'N', 'S', 'R', '1', '\n', '\0'};
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kMaxRank = 8;
inline constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 48;

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(p[i]) << (8 * i);
  return value;
}

inline std::uint64_t checked_product(const std::vector<std::uint64_t>& shape) {
  std::uint64_t product = 1;
  for (auto extent : shape) {
    if (extent == 0) return 0;
  }
  for (auto extent : shape) {
    if (extent > kMaxElements || product > kMaxElements / extent) {
      fail(ErrorCode::ShapeOverflow, "tensor element count exceeds 2^48");
    }
    product *= extent;
  }
  if (product > kMaxElements) fail(ErrorCode::ShapeOverflow, "tensor element count exceeds 2^48");
  return product;
}

inline std::string encode(const TensorFile& t) {
  if (t.shape.size() > kMaxRank) fail(ErrorCode::BadHeader, "tensor rank exceeds 8");
  if (checked_product(t.shape) != t.element_count()) {
    fail(ErrorCode::InvalidArgument, "tensor shape does not match element count");
  }
  const bool dtype_matches = (t.dtype == Dtype::F32) == std::holds_alternative<std::vector<float>>(t.data);
  if (!dtype_matches) fail(ErrorCode::UnknownDtype, "tensor dtype tag does not match its storage");

  std::string out(kMagic.begin(), kMagic.end());
  out.push_back(static_cast<char>(t.dtype));
  out.push_back(static_cast<char>(t.shape.size()));
  out.append(6, '\0');
  for (auto extent : t.shape) put_le<std::uint64_t>(out, extent);
  std::visit(
      [&](const auto& values) {
        using T = typename std::decay_t<decltype(values)>::value_type;
        using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
        out.reserve(out.size() + values.size() * sizeof(T));
        for (T v : values) put_le<Bits>(out, std::bit_cast<Bits>(v));
      },
      t.data);
  return out;
}

inline TensorFile decode(const std::string& bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < kMagic.size() || std::memcmp(p, kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorCode::BadMagic, "missing STNSR1 magic");
  }
  if (bytes.size() < kHeaderSize) fail(ErrorCode::TruncatedFile, "tensor header is truncated");
  TensorFile t;
  const std::uint8_t dtype = p[8];
  if (dtype != 1 && dtype != 2) {
    fail(ErrorCode::UnknownDtype, "dtype code " + std::to_string(dtype));
  }
  t.dtype = static_cast<Dtype>(dtype);
  const std::size_t rank = p[9];
  if (rank > kMaxRank) fail(ErrorCode::BadHeader, "tensor rank " + std::to_string(rank));
  for (std::size_t i = 10; i < kHeaderSize; ++i) {
    if (p[i] != 0) fail(ErrorCode::BadHeader, "non-zero header padding");
  }
  if (bytes.size() < kHeaderSize + 8 * rank) fail(ErrorCode::TruncatedFile, "tensor extents are truncated");
  for (std::size_t i = 0; i < rank; ++i) {
    t.shape.push_back(get_le<std::uint64_t>(p + kHeaderSize + 8 * i));
  }
  const std::uint64_t count = checked_product(t.shape);
  const std::size_t elem = t.dtype == Dtype::F32 ? 4 : 8;
  const std::size_t offset = kHeaderSize + 8 * rank;
  const std::uint64_t payload = count * elem;
  if (bytes.size() - offset < payload) fail(ErrorCode::TruncatedFile, "tensor payload is truncated");
  if (bytes.size() - offset > payload) fail(ErrorCode::BadHeader, "trailing bytes after tensor payload");

  const unsigned char* data = p + offset;
  if (t.dtype == Dtype::F32) {
    std::vector<float> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = std::bit_cast<float>(get_le<std::uint32_t>(data + 4 * i));
    t.data = std::move(v);
  } else {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = std::bit_cast<double>(get_le<std::uint64_t>(data + 8 * i));
    t.data = std::move(v);
  }
  return t;
}

}  // namespace tensor_format

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoFailure, "read failed for " + path.string());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

inline TensorFile read_tensor(const std::filesystem::path& path) {
  return tensor_format::decode(read_file_bytes(path));
}

inline void write_tensor(const TensorFile& t, const std::filesystem::path& path) {
  write_file_bytes(path, tensor_format::encode(t));
}

}  // namespace shapeval
