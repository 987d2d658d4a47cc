#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latticeformer {

// Dense row-major array. Every op in this library works on matrices, so a
// tensor is viewed as rows x cols with rows = shape[0] and cols the product
// of the remaining extents; a rank-1 tensor is a single row.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape, T fill = T(0)) : shape_(std::move(shape)) {
    const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                                          std::multiplies<>());
    data_.assign(n, fill);
    if (shape_.size() >= 2) {
      rows_ = shape_[0];
      cols_ = rows_ == 0 ? 0 : n / rows_;
    } else {
      rows_ = 1;
      cols_ = n;
    }
  }

  Tensor(std::size_t rows, std::size_t cols, T fill = T(0))
      : Tensor(std::vector<std::size_t>{rows, cols}, fill) {}

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<T> values) {
    if (values.size() != rows * cols) throw std::invalid_argument("matrix: wrong value count");
    Tensor t(rows, cols);
    t.data_ = std::move(values);
    return t;
  }

  static Tensor scalar(T value) { return matrix(1, 1, {value}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

  T item() const {
    if (data_.size() != 1) throw std::logic_error("item() on a non-scalar tensor");
    return data_[0];
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

}  // namespace latticeformer
