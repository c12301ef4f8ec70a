#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace vstain::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

inline void put_u32(std::string& out, std::uint32_t v) {
  v = to_little_endian(v);
  out.append(reinterpret_cast<const char*>(&v), 4);
}

inline void put_u64(std::string& out, std::uint64_t v) {
  v = to_little_endian(v);
  out.append(reinterpret_cast<const char*>(&v), 8);
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

/// Cursor over a byte buffer; every read reports whether enough bytes remained.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  bool u32(std::uint32_t& v) { return raw(v); }
  bool u64(std::uint64_t& v) { return raw(v); }
  bool f32(float& f) {
    std::uint32_t bits;
    if (!raw(bits)) return false;
    f = std::bit_cast<float>(bits);
    return true;
  }
  bool bytes(std::size_t n, std::string_view& out) {
    if (remaining() < n) return false;
    out = bytes_.substr(pos_, n);
    pos_ += n;
    return true;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  template <typename T>
  bool raw(T& v) {
    if (remaining() < sizeof(T)) return false;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    v = to_little_endian(v);
    pos_ += sizeof(T);
    return true;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace vstain::detail
