#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lade/errors.hpp"

namespace lade {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_product(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

// Dense row-major n-d array of doubles. The innermost axis is contiguous.
class DenseArray {
 public:
  DenseArray() = default;

  explicit DenseArray(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

  DenseArray(Shape shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_product(shape_))
      throw DimensionError("DenseArray: data size " + std::to_string(data_.size()) +
                           " does not match shape " + shape_str(shape_));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const {
    if (i >= shape_.size()) throw DimensionError("DenseArray::dim: axis out of range");
    return shape_[i];
  }

  double* ptr() { return data_.data(); }
  const double* ptr() const { return data_.data(); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  bool same_shape(const DenseArray& o) const { return shape_ == o.shape_; }

  // Total elements in all axes but the last; the last axis length. Used by the
  // ops that treat an array as [rows x K] with K innermost.
  std::size_t rows_flat() const {
    if (shape_.empty()) throw DimensionError("rows_flat: rank-0 array");
    return size() / shape_.back();
  }
  std::size_t last_dim() const {
    if (shape_.empty()) throw DimensionError("last_dim: rank-0 array");
    return shape_.back();
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

inline void require_shape(const DenseArray& a, const Shape& want, const char* what) {
  if (a.shape() != want)
    throw DimensionError(std::string(what) + ": expected shape " + shape_str(want) + ", got " +
                         shape_str(a.shape()));
}

inline void require_rank(const DenseArray& a, std::size_t r, const char* what) {
  if (a.rank() != r)
    throw DimensionError(std::string(what) + ": expected rank " + std::to_string(r) + ", got " +
                         shape_str(a.shape()));
}

inline void require_finite(const DenseArray& a, const char* what) {
  for (double v : a.data())
    if (!std::isfinite(v)) throw ValueError(std::string(what) + ": non-finite value encountered");
}

}  // namespace lade
