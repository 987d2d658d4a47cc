#include "latticeformer/functional.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace latticeformer {

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits, const Mask* mask) {
  const std::size_t rows = logits.rows();
  const std::size_t cols = logits.cols();
  if (mask != nullptr && (mask->rows() != rows || mask->cols() != cols)) {
    throw std::invalid_argument("softmax_rows: mask shape mismatch");
  }
  Tensor<T> out(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    T max_value = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask != nullptr && !(*mask)(r, c)) continue;
      max_value = std::max(max_value, logits(r, c));
      any = true;
    }
    if (!any) throw std::invalid_argument("softmax_rows: row " + std::to_string(r) + " is fully masked");
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask != nullptr && !(*mask)(r, c)) continue;
      const T e = std::exp(logits(r, c) - max_value);
      out(r, c) = e;
      total += e;
    }
    const T inv = T(1) / total;
    for (std::size_t c = 0; c < cols; ++c) out(r, c) *= inv;
  }
  return out;
}

template <typename T>
std::vector<T> layer_norm(std::span<const T> x, std::span<const T> gain, std::span<const T> bias,
                          T eps) {
  if (gain.size() != x.size() || bias.size() != x.size()) {
    throw std::invalid_argument("layer_norm: length mismatch");
  }
  const T n = static_cast<T>(x.size());
  T mean = 0;
  for (T v : x) mean += v;
  mean /= n;
  T var = 0;
  for (T v : x) var += (v - mean) * (v - mean);
  var /= n;
  const T denom = std::sqrt(var + eps);
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T centered = x[i] - mean;
    // A constant row has zero deviation; keep it at zero even when eps == 0.
    out[i] = gain[i] * (centered == T(0) ? T(0) : centered / denom) + bias[i];
  }
  return out;
}

template <typename T>
CrossEntropy<T> cross_entropy(std::span<const T> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw std::out_of_range("cross_entropy: target " + std::to_string(target) +
                            " outside vocabulary of " + std::to_string(logits.size()));
  }
  T max_value = logits[0];
  for (T v : logits) max_value = std::max(max_value, v);
  T total = 0;
  for (T v : logits) total += std::exp(v - max_value);
  const T log_total = std::log(total);
  const T log_z = max_value + log_total;
  CrossEntropy<T> out{(max_value - logits[target]) + log_total, std::vector<T>(logits.size())};
  for (std::size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(logits[i] - log_z);
  out.grad[target] -= T(1);
  return out;
}

#define LATTICEFORMER_INSTANTIATE(T)                                                         \
  template Tensor<T> softmax_rows<T>(const Tensor<T>&, const Mask*);                          \
  template std::vector<T> layer_norm<T>(std::span<const T>, std::span<const T>,               \
                                        std::span<const T>, T);                               \
  template CrossEntropy<T> cross_entropy<T>(std::span<const T>, std::size_t);

LATTICEFORMER_INSTANTIATE(float)
LATTICEFORMER_INSTANTIATE(double)

}  // namespace latticeformer
