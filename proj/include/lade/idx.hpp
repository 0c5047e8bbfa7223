#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lade/array.hpp"
#include "lade/errors.hpp"

namespace lade {

namespace detail {

inline std::uint32_t read_u32_be(std::istream& f, const std::string& path) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (f.gcount() != 4) throw IoError("idx: truncated header in " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

inline void write_u32_be(std::ostream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

// IDX image file (magic 0x00000803): returns raw intensities 0..255 as
// [n x h*w] rows. The whole payload must be present; a short file is an error.
inline DenseArray idx_load_images(const std::string& path, std::size_t* h_out = nullptr,
                                  std::size_t* w_out = nullptr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("idx: cannot open " + path);
  const std::uint32_t magic = detail::read_u32_be(f, path);
  if (magic != 0x00000803u)
    throw IoError("idx: bad image magic in " + path + " (expected 0x00000803)");
  const std::uint32_t n = detail::read_u32_be(f, path);
  const std::uint32_t h = detail::read_u32_be(f, path);
  const std::uint32_t w = detail::read_u32_be(f, path);
  if (n == 0 || h == 0 || w == 0) throw IoError("idx: empty dimensions in " + path);
  const std::size_t count = std::size_t(n) * h * w;
  std::vector<unsigned char> bytes(count);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
  if (f.gcount() != static_cast<std::streamsize>(count))
    throw IoError("idx: truncated payload in " + path);
  DenseArray out({n, std::size_t(h) * w});
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<double>(bytes[i]);
  if (h_out) *h_out = h;
  if (w_out) *w_out = w;
  return out;
}

// IDX label file (magic 0x00000801).
inline std::vector<std::uint8_t> idx_load_labels(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("idx: cannot open " + path);
  const std::uint32_t magic = detail::read_u32_be(f, path);
  if (magic != 0x00000801u)
    throw IoError("idx: bad label magic in " + path + " (expected 0x00000801)");
  const std::uint32_t n = detail::read_u32_be(f, path);
  std::vector<std::uint8_t> labels(n);
  f.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(n));
  if (f.gcount() != static_cast<std::streamsize>(n))
    throw IoError("idx: truncated payload in " + path);
  return labels;
}

// Writes [n x h*w] rows of 0..255 intensities as an IDX image file.
inline void idx_write_images(const std::string& path, const DenseArray& images, std::size_t h,
                             std::size_t w) {
  require_rank(images, 2, "idx_write_images: images");
  if (images.dim(1) != h * w) throw DimensionError("idx_write_images: row width is not h*w");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("idx: cannot open " + path + " for writing");
  detail::write_u32_be(f, 0x00000803u);
  detail::write_u32_be(f, static_cast<std::uint32_t>(images.dim(0)));
  detail::write_u32_be(f, static_cast<std::uint32_t>(h));
  detail::write_u32_be(f, static_cast<std::uint32_t>(w));
  std::vector<unsigned char> bytes(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    double v = images[i];
    v = v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v);
    bytes[i] = static_cast<unsigned char>(v + 0.5);
  }
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("idx: write failed for " + path);
}

}  // namespace lade
