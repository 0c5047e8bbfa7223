#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "lade/array.hpp"
#include "lade/errors.hpp"
#include "lade/idx.hpp"
#include "lade/image_io.hpp"
#include "lade/rng.hpp"
#include "lade/toy.hpp"

namespace lade {

// Recorded affine transform into model space: norm(x) = (x - offset) / divisor.
struct Normalization {
  double divisor = 1.0;
  double offset = 0.0;

  double apply(double x) const { return (x - offset) / divisor; }
  double invert(double y) const { return y * divisor + offset; }

  void apply_inplace(DenseArray& a) const {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = apply(a[i]);
  }
};

struct SplitDataset {
  DenseArray train, validation, test;
  std::string provenance;
  Normalization norm;
  std::size_t image_h = 0, image_w = 0; // 0 when rows are not images

  std::size_t row_dim() const { return train.rank() == 2 ? train.dim(1) : 0; }
  bool is_image() const { return image_h > 0 && image_w > 0; }
};

// Epoch-shuffled minibatch stream with a seeded permutation; the final short
// batch of an epoch is included, then the next epoch reshuffles.
class BatchIter {
 public:
  BatchIter(const DenseArray& rows, std::size_t batch_size, std::uint64_t seed)
      : rows_(&rows), batch_(batch_size), rng_(seed) {
    require_rank(rows, 2, "batch_iter: rows");
    if (batch_size < 1) throw ParameterError("batch_iter: batch_size must be >= 1");
    if (rows.dim(0) == 0) throw ParameterError("batch_iter: empty partition");
    order_.resize(rows.dim(0));
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng_.shuffle(order_);
  }

  DenseArray next() {
    const std::size_t n = rows_->dim(0), d = rows_->dim(1);
    if (pos_ >= n) {
      pos_ = 0;
      ++epoch_;
      rng_.shuffle(order_);
    }
    const std::size_t take = std::min(batch_, n - pos_);
    DenseArray out({take, d});
    for (std::size_t r = 0; r < take; ++r) {
      const double* src = rows_->ptr() + order_[pos_ + r] * d;
      std::copy(src, src + d, out.ptr() + r * d);
    }
    pos_ += take;
    return out;
  }

  std::size_t epoch() const { return epoch_; }

 private:
  const DenseArray* rows_;
  std::size_t batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::size_t epoch_ = 0;
};

inline SplitDataset toy_dataset(const ToySpec& spec, std::size_t n_train, std::size_t n_val,
                                std::size_t n_test, std::uint64_t seed) {
  SplitDataset d;
  d.train = toy_sample(spec, n_train, derive_seed(seed, "toy-train"));
  d.validation = toy_sample(spec, n_val, derive_seed(seed, "toy-val"));
  d.test = toy_sample(spec, n_test, derive_seed(seed, "toy-test"));
  d.provenance = "toy";
  return d;
}

// Deterministic synthetic image family: one anisotropic Gaussian blob per
// image with random center, radii, orientation, and brightness. The images sit
// on a low-dimensional smooth manifold, quantized to bytes like camera data.
inline DenseArray synth_blob_images(std::size_t n, std::uint64_t seed, std::size_t h = 28,
                                    std::size_t w = 28) {
  Rng rng(seed);
  DenseArray out({n, h * w});
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = rng.uniform(0.32 * w, 0.68 * w);
    const double cy = rng.uniform(0.32 * h, 0.68 * h);
    const double rx = rng.uniform(0.08 * w, 0.20 * w);
    const double ry = rng.uniform(0.08 * h, 0.20 * h);
    const double th = rng.uniform(0.0, 3.14159265358979323846);
    const double amp = rng.uniform(0.72, 1.0);
    const double ct = std::cos(th), st = std::sin(th);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double dx = (static_cast<double>(x) - cx), dy = (static_cast<double>(y) - cy);
        const double u = (ct * dx + st * dy) / rx;
        const double v = (-st * dx + ct * dy) / ry;
        const double val = amp * std::exp(-0.5 * (u * u + v * v));
        out(i, y * w + x) = std::floor(val * 255.0 + 0.5);
      }
  }
  return out;
}

inline SplitDataset synth_dataset(std::size_t n_train, std::size_t n_val, std::size_t n_test,
                                  std::uint64_t seed, std::size_t h = 28, std::size_t w = 28) {
  SplitDataset d;
  d.train = synth_blob_images(n_train, derive_seed(seed, "synth-train"), h, w);
  d.validation = synth_blob_images(n_val, derive_seed(seed, "synth-val"), h, w);
  d.test = synth_blob_images(n_test, derive_seed(seed, "synth-test"), h, w);
  d.norm = Normalization{255.0, 0.0};
  d.norm.apply_inplace(d.train);
  d.norm.apply_inplace(d.validation);
  d.norm.apply_inplace(d.test);
  d.provenance = "synth";
  d.image_h = h;
  d.image_w = w;
  return d;
}

// Classic IDX layout: train file split into train/validation (default last 10k
// rows to validation), separate test file. Intensities scaled to [0,1].
inline SplitDataset mnist_load(const std::string& dir, std::size_t val_n = 10000) {
  namespace fs = std::filesystem;
  auto pick = [&](const char* a, const char* b) {
    if (fs::exists(fs::path(dir) / a)) return (fs::path(dir) / a).string();
    if (fs::exists(fs::path(dir) / b)) return (fs::path(dir) / b).string();
    throw IoError(std::string("mnist_load: missing ") + a + " in " + dir);
  };
  std::size_t h = 0, w = 0, th = 0, tw = 0;
  DenseArray train_all =
      idx_load_images(pick("train-images-idx3-ubyte", "train-images.idx3-ubyte"), &h, &w);
  DenseArray test = idx_load_images(pick("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
                                    &th, &tw);
  if (th != h || tw != w) throw IoError("mnist_load: train/test image dimensions differ");
  const std::size_t n = train_all.dim(0), d = train_all.dim(1);
  if (val_n >= n) throw ParameterError("mnist_load: validation split larger than train file");
  SplitDataset ds;
  const std::size_t n_train = n - val_n;
  ds.train = DenseArray({n_train, d});
  std::copy(train_all.ptr(), train_all.ptr() + n_train * d, ds.train.ptr());
  ds.validation = DenseArray({val_n, d});
  std::copy(train_all.ptr() + n_train * d, train_all.ptr() + n * d, ds.validation.ptr());
  ds.test = std::move(test);
  ds.norm = Normalization{255.0, 0.0};
  ds.norm.apply_inplace(ds.train);
  ds.norm.apply_inplace(ds.validation);
  ds.norm.apply_inplace(ds.test);
  ds.provenance = "mnist:" + dir;
  ds.image_h = h;
  ds.image_w = w;
  return ds;
}

// Folder of same-sized binary PGMs, sorted by filename, split 80/10/10 in
// sorted order. Intensities scaled to [0,1].
inline SplitDataset pgm_dir_load(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("pgm_dir_load: not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.size() < 10) throw IoError("pgm_dir_load: need at least 10 .pgm files in " + dir);
  std::size_t h = 0, w = 0;
  std::vector<std::uint8_t> first = pgm_read(files[0], &h, &w);
  DenseArray all({files.size(), h * w});
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::size_t ih = 0, iw = 0;
    std::vector<std::uint8_t> px = (i == 0) ? first : pgm_read(files[i], &ih, &iw);
    if (i > 0 && (ih != h || iw != w))
      throw IoError("pgm_dir_load: image size mismatch at " + files[i]);
    for (std::size_t j = 0; j < px.size(); ++j) all(i, j) = static_cast<double>(px[j]);
  }
  const std::size_t n = files.size();
  const std::size_t n_test = std::max<std::size_t>(1, n / 10);
  const std::size_t n_val = std::max<std::size_t>(1, n / 10);
  const std::size_t n_train = n - n_val - n_test;
  auto slice = [&](std::size_t from, std::size_t count) {
    DenseArray out({count, h * w});
    std::copy(all.ptr() + from * h * w, all.ptr() + (from + count) * h * w, out.ptr());
    return out;
  };
  SplitDataset ds;
  ds.train = slice(0, n_train);
  ds.validation = slice(n_train, n_val);
  ds.test = slice(n_train + n_val, n_test);
  ds.norm = Normalization{255.0, 0.0};
  ds.norm.apply_inplace(ds.train);
  ds.norm.apply_inplace(ds.validation);
  ds.norm.apply_inplace(ds.test);
  ds.provenance = "pgm_dir:" + dir;
  ds.image_h = h;
  ds.image_w = w;
  return ds;
}

}  // namespace lade
