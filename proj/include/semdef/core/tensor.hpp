/* Copyright 2026 The semdef Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SEMDEF_CORE_TENSOR_HPP_
#define SEMDEF_CORE_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "semdef/core/error.hpp"

namespace semdef {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// Dense row-major tensor. Every extent is positive and the buffer length is
// the product of the extents.
//
// Most of the library treats a tensor as a matrix: `cols()` is the last
// extent and `rows()` is the product of the remaining ones, so a rank-1
// tensor of extent d behaves as a 1 x d row.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(numel(shape_), fill);
  }

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != numel(shape_)) {
      throw DimensionError("tensor buffer of " + std::to_string(data_.size()) +
                           " values does not fit shape " + shape_str(shape_));
    }
  }

  static Tensor scalar(T value) { return Tensor({1}, std::vector<T>{value}); }

  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<T> values) {
    return Tensor({rows, cols}, std::vector<T>(values));
  }

  static Tensor row(std::initializer_list<T> values) {
    return Tensor({1, values.size()}, std::vector<T>(values));
  }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  bool empty() const { return data_.empty(); }
  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }
  std::size_t rows() const { return cols() == 0 ? 0 : data_.size() / cols(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  T item() const {
    if (data_.size() != 1) {
      throw DimensionError("item() on tensor of shape " + shape_str(shape_));
    }
    return data_[0];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  // Same buffer, new extents.
  Tensor reshaped(Shape shape) const {
    return Tensor(std::move(shape), data_);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static void check_shape(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor needs at least one extent");
    for (std::size_t e : shape) {
      if (e == 0) {
        throw DimensionError("tensor extents must be positive, got " +
                             shape_str(shape));
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace semdef

#endif  // SEMDEF_CORE_TENSOR_HPP_
