#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace lade {

namespace detail {
constexpr std::array<std::uint32_t, 256> crc32_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    t[i] = c;
  }
  return t;
}
}  // namespace detail

// IEEE CRC-32 (reflected, poly 0xEDB88320), as used by zip/png.
inline std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0) {
  static constexpr std::array<std::uint32_t, 256> table = detail::crc32_table();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

}  // namespace lade
