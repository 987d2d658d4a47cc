#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "latticeformer/graph.hpp"

namespace latticeformer {

// Draws each parameter from a generator seeded by (seed, parameter name), so
// a parameter's initial value does not depend on which other parameters a
// configuration creates or in what order.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : seed_(seed) {}

  template <typename T>
  void uniform(Parameter<T>& p, double limit) const {
    auto rng = generator(p.name);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : p.value.values()) v = static_cast<T>(dist(rng));
  }

  // Glorot uniform for a fan_in x fan_out matrix.
  template <typename T>
  void xavier(Parameter<T>& p) const {
    const double fan_in = static_cast<double>(p.value.rows());
    const double fan_out = static_cast<double>(p.value.cols());
    uniform(p, std::sqrt(6.0 / (fan_in + fan_out)));
  }

  template <typename T>
  void normal(Parameter<T>& p, double stddev) const {
    auto rng = generator(p.name);
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : p.value.values()) v = static_cast<T>(dist(rng));
  }

  template <typename T>
  void constant(Parameter<T>& p, double value) const {
    p.value.fill(static_cast<T>(value));
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::mt19937_64 generator(std::string_view name) const {
    // FNV-1a over the name, mixed with the seed.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
  }

  std::uint64_t seed_;
};

}  // namespace latticeformer
