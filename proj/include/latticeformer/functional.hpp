#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "latticeformer/tensor.hpp"

namespace latticeformer {

// Boolean rows x cols matrix; true entries take part in a softmax.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t rows, std::size_t cols, bool value = true)
      : rows_(rows), cols_(cols), allowed_(rows * cols, value ? 1 : 0) {}

  // Lower-triangular mask for autoregressive self-attention.
  static Mask causal(std::size_t n) {
    Mask m(n, n, false);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) m.set(i, j, true);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool operator()(std::size_t r, std::size_t c) const noexcept {
    return allowed_[r * cols_ + c] != 0;
  }
  void set(std::size_t r, std::size_t c, bool value) { allowed_[r * cols_ + c] = value ? 1 : 0; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> allowed_;
};

// Row-wise softmax with row-max subtraction. Masked entries are exactly 0.
// Throws std::invalid_argument on a fully masked row or a shape mismatch.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits, const Mask* mask = nullptr);

// gain * (x - mean) / sqrt(var + eps) + bias, population variance.
template <typename T>
std::vector<T> layer_norm(std::span<const T> x, std::span<const T> gain, std::span<const T> bias,
                          T eps);

template <typename T>
struct CrossEntropy {
  T loss;
  std::vector<T> grad;  // softmax(logits) - one_hot(target)
};

// Throws std::out_of_range for a target outside [0, V).
template <typename T>
CrossEntropy<T> cross_entropy(std::span<const T> logits, std::size_t target);

}  // namespace latticeformer
