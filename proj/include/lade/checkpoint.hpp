#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "lade/array.hpp"
#include "lade/autoencoder.hpp"
#include "lade/crc32.hpp"
#include "lade/errors.hpp"
#include "lade/lde.hpp"

namespace lade {

// Container layout (all integers little-endian):
//   "LDE1" | u32 version | u32 section count
//   per section: u32 name length | name bytes | u64 payload offset | u64 payload length
//   payloads:    u32 rank | u32 dims[rank] | f64 values
//   u32 CRC-32 of every preceding byte
// Section order is preserved, so write -> read -> write round-trips to
// identical bytes.

struct Section {
  std::string name;
  DenseArray data;
};

namespace detail {

inline void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_f64(std::vector<unsigned char>& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

struct Cursor {
  const unsigned char* p;
  std::size_t len;
  std::size_t pos = 0;
  const std::string* path;

  void need(std::size_t k) const {
    if (pos + k > len) throw IoError("checkpoint: truncated file " + *path);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace detail

inline void checkpoint_write(const std::string& path, const std::vector<Section>& sections,
                             std::uint32_t version = 1) {
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (sections[i].name.empty()) throw ParameterError("checkpoint: empty section name");
    for (std::size_t j = i + 1; j < sections.size(); ++j)
      if (sections[i].name == sections[j].name)
        throw ParameterError("checkpoint: duplicate section name '" + sections[i].name + "'");
  }
  std::vector<unsigned char> buf;
  buf.push_back('L');
  buf.push_back('D');
  buf.push_back('E');
  buf.push_back('1');
  detail::put_u32(buf, version);
  detail::put_u32(buf, static_cast<std::uint32_t>(sections.size()));
  std::size_t table_bytes = 0;
  for (const Section& s : sections) table_bytes += 4 + s.name.size() + 8 + 8;
  std::size_t offset = buf.size() + table_bytes;
  for (const Section& s : sections) {
    const std::size_t payload = 4 + 4 * s.data.rank() + 8 * s.data.size();
    detail::put_u32(buf, static_cast<std::uint32_t>(s.name.size()));
    buf.insert(buf.end(), s.name.begin(), s.name.end());
    detail::put_u64(buf, offset);
    detail::put_u64(buf, payload);
    offset += payload;
  }
  for (const Section& s : sections) {
    detail::put_u32(buf, static_cast<std::uint32_t>(s.data.rank()));
    for (std::size_t d : s.data.shape()) detail::put_u32(buf, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < s.data.size(); ++i) detail::put_f64(buf, s.data[i]);
  }
  detail::put_u32(buf, crc32(buf.data(), buf.size()));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw IoError("checkpoint: write failed for " + path);
}

inline std::vector<Section> checkpoint_read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 16) throw IoError("checkpoint: truncated file " + path);
  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) stored_crc |= std::uint32_t(buf[buf.size() - 4 + i]) << (8 * i);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc)
    throw IoError("checkpoint: CRC mismatch in " + path + " (corrupt file)");
  detail::Cursor c{buf.data(), buf.size() - 4, 0, &path};
  c.need(4);
  if (std::memcmp(buf.data(), "LDE1", 4) != 0)
    throw IoError("checkpoint: bad magic in " + path);
  c.pos = 4;
  const std::uint32_t version = c.u32();
  if (version != 1)
    throw IoError("checkpoint: unsupported version " + std::to_string(version) + " in " + path);
  const std::uint32_t count = c.u32();
  struct Entry {
    std::string name;
    std::uint64_t offset, length;
  };
  std::vector<Entry> entries(count);
  for (Entry& e : entries) {
    const std::uint32_t nlen = c.u32();
    c.need(nlen);
    e.name.assign(reinterpret_cast<const char*>(buf.data() + c.pos), nlen);
    c.pos += nlen;
    e.offset = c.u64();
    e.length = c.u64();
  }
  std::vector<Section> sections;
  sections.reserve(count);
  for (const Entry& e : entries) {
    for (const Section& done : sections)
      if (done.name == e.name)
        throw IoError("checkpoint: duplicate section '" + e.name + "' in " + path);
    const std::size_t payload_end = buf.size() - 4;
    if (e.offset < c.pos || e.offset > payload_end || e.length > payload_end - e.offset)
      throw IoError("checkpoint: section '" + e.name + "' out of bounds in " + path);
    detail::Cursor sc{buf.data(), static_cast<std::size_t>(e.offset + e.length),
                      static_cast<std::size_t>(e.offset), &path};
    const std::uint32_t rank = sc.u32();
    if (rank > 8) throw IoError("checkpoint: implausible rank in section '" + e.name + "'");
    Shape shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) shape[i] = sc.u32();
    const std::size_t nvals = shape_product(shape);
    if (sc.pos + 8 * nvals != e.offset + e.length)
      throw IoError("checkpoint: section '" + e.name + "' length does not match its shape");
    DenseArray data(shape);
    for (std::size_t i = 0; i < nvals; ++i) data[i] = sc.f64();
    sections.push_back(Section{e.name, std::move(data)});
  }
  return sections;
}

inline const DenseArray& section_get(const std::vector<Section>& sections,
                                     const std::string& name) {
  for (const Section& s : sections)
    if (s.name == name) return s.data;
  throw IoError("checkpoint: missing section '" + name + "'");
}

inline bool section_has(const std::vector<Section>& sections, const std::string& name) {
  for (const Section& s : sections)
    if (s.name == name) return true;
  return false;
}

// ---- model persistence ----

inline void save_ae(const std::string& path, const AeModel& m) {
  std::vector<Section> s;
  DenseArray cfg({5 + m.config.hidden.size()});
  cfg[0] = static_cast<double>(m.config.input_dim);
  cfg[1] = static_cast<double>(m.config.latent_dim);
  cfg[2] = m.config.output_activation == OutputActivation::Tanh ? 0.0 : 1.0;
  cfg[3] = m.config.beta;
  cfg[4] = static_cast<double>(m.config.hidden.size());
  for (std::size_t i = 0; i < m.config.hidden.size(); ++i)
    cfg[5 + i] = static_cast<double>(m.config.hidden[i]);
  s.push_back({"config", std::move(cfg)});
  for (std::size_t l = 0; l < m.enc_w.size(); ++l) {
    s.push_back({"enc_w" + std::to_string(l), m.enc_w[l]});
    s.push_back({"enc_b" + std::to_string(l), m.enc_b[l]});
  }
  for (std::size_t l = 0; l < m.dec_w.size(); ++l) {
    s.push_back({"dec_w" + std::to_string(l), m.dec_w[l]});
    s.push_back({"dec_b" + std::to_string(l), m.dec_b[l]});
  }
  checkpoint_write(path, s);
}

inline AeModel load_ae(const std::string& path) {
  const std::vector<Section> s = checkpoint_read(path);
  const DenseArray& cfg = section_get(s, "config");
  if (cfg.rank() != 1 || cfg.size() < 5) throw IoError("checkpoint: malformed AE config section");
  AeConfig c;
  c.input_dim = static_cast<std::size_t>(cfg[0]);
  c.latent_dim = static_cast<std::size_t>(cfg[1]);
  c.output_activation = cfg[2] == 0.0 ? OutputActivation::Tanh : OutputActivation::Sigmoid;
  c.beta = cfg[3];
  const std::size_t nh = static_cast<std::size_t>(cfg[4]);
  if (cfg.size() != 5 + nh) throw IoError("checkpoint: malformed AE config section");
  for (std::size_t i = 0; i < nh; ++i) c.hidden.push_back(static_cast<std::size_t>(cfg[5 + i]));
  c.validate();
  AeModel m = ae_init(c, 0);
  auto expect = [&](const std::string& name, DenseArray& dst) {
    const DenseArray& got = section_get(s, name);
    if (got.shape() != dst.shape())
      throw IoError("checkpoint: section '" + name + "' shape " + shape_str(got.shape()) +
                    " does not match config shape " + shape_str(dst.shape()));
    dst = got;
  };
  for (std::size_t l = 0; l < m.enc_w.size(); ++l) {
    expect("enc_w" + std::to_string(l), m.enc_w[l]);
    expect("enc_b" + std::to_string(l), m.enc_b[l]);
  }
  for (std::size_t l = 0; l < m.dec_w.size(); ++l) {
    expect("dec_w" + std::to_string(l), m.dec_w[l]);
    expect("dec_b" + std::to_string(l), m.dec_b[l]);
  }
  return m;
}

inline void save_lde(const std::string& path, const LdeModel& m) {
  std::vector<Section> s;
  DenseArray cfg({4});
  cfg[0] = static_cast<double>(m.config.latent_dim);
  cfg[1] = static_cast<double>(m.config.mixture_count);
  cfg[2] = static_cast<double>(m.config.filter_size);
  cfg[3] = m.config.sigma_floor;
  s.push_back({"config", std::move(cfg)});
  for (std::size_t l = 0; l < m.conv_w.size(); ++l) {
    s.push_back({"conv_w" + std::to_string(l), m.conv_w[l]});
    s.push_back({"conv_b" + std::to_string(l), m.conv_b[l]});
  }
  s.push_back({"head_w", m.head_w});
  s.push_back({"head_b", m.head_b});
  checkpoint_write(path, s);
}

inline LdeModel load_lde(const std::string& path) {
  const std::vector<Section> s = checkpoint_read(path);
  const DenseArray& cfg = section_get(s, "config");
  if (cfg.rank() != 1 || cfg.size() != 4) throw IoError("checkpoint: malformed LDE config section");
  LdeConfig c;
  c.latent_dim = static_cast<std::size_t>(cfg[0]);
  c.mixture_count = static_cast<std::size_t>(cfg[1]);
  c.filter_size = static_cast<std::size_t>(cfg[2]);
  c.sigma_floor = cfg[3];
  c.validate();
  LdeModel m = lde_init(c, 0);
  auto expect = [&](const std::string& name, DenseArray& dst) {
    const DenseArray& got = section_get(s, name);
    if (got.shape() != dst.shape())
      throw IoError("checkpoint: section '" + name + "' shape " + shape_str(got.shape()) +
                    " does not match config shape " + shape_str(dst.shape()));
    dst = got;
  };
  for (std::size_t l = 0; l < m.conv_w.size(); ++l) {
    expect("conv_w" + std::to_string(l), m.conv_w[l]);
    expect("conv_b" + std::to_string(l), m.conv_b[l]);
  }
  expect("head_w", m.head_w);
  expect("head_b", m.head_b);
  return m;
}

// Latents and samples travel in the same container: train/validation/test
// sections for latents, a single "samples" section for generator output.

inline void save_latents(const std::string& path, const DenseArray& train,
                         const DenseArray& validation, const DenseArray& test) {
  DenseArray cfg({1});
  cfg[0] = static_cast<double>(train.dim(1));
  std::vector<Section> s;
  s.push_back({"config", std::move(cfg)});
  s.push_back({"train", train});
  s.push_back({"validation", validation});
  s.push_back({"test", test});
  checkpoint_write(path, s);
}

inline void save_samples(const std::string& path, const DenseArray& samples, std::size_t image_h,
                         std::size_t image_w) {
  DenseArray meta({2});
  meta[0] = static_cast<double>(image_h);
  meta[1] = static_cast<double>(image_w);
  std::vector<Section> s;
  s.push_back({"samples", samples});
  s.push_back({"meta", std::move(meta)});
  checkpoint_write(path, s);
}

struct LatentFile {
  DenseArray train{{0, 0}};
  DenseArray val{{0, 0}};
  DenseArray test{{0, 0}};
};

inline LatentFile load_latents(const std::string& path) {
  const std::vector<Section> s = checkpoint_read(path);
  const DenseArray& cfg = section_get(s, "config");
  require_shape(cfg, {1}, "latent file config");
  const std::size_t dim = static_cast<std::size_t>(cfg[0]);
  LatentFile out;
  out.train = section_get(s, "train");
  out.val = section_get(s, "validation");
  out.test = section_get(s, "test");
  for (const DenseArray* a : {&out.train, &out.val, &out.test}) {
    if (a->shape().size() != 2 || a->shape()[1] != dim)
      throw IoError("latent file " + path + ": split shape " + shape_str(a->shape()) +
                    " inconsistent with declared dim " + std::to_string(dim));
  }
  return out;
}

struct SampleFile {
  DenseArray samples{{0, 0}};
  std::size_t image_h = 0;
  std::size_t image_w = 0;
};

inline SampleFile load_samples(const std::string& path) {
  const std::vector<Section> s = checkpoint_read(path);
  SampleFile out;
  out.samples = section_get(s, "samples");
  if (out.samples.shape().size() != 2)
    throw IoError("sample file " + path + ": samples section must be rank 2");
  const DenseArray& meta = section_get(s, "meta");
  require_shape(meta, {2}, "sample file meta");
  out.image_h = static_cast<std::size_t>(meta[0]);
  out.image_w = static_cast<std::size_t>(meta[1]);
  return out;
}

}  // namespace lade
