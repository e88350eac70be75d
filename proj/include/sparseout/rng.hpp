#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "sparseout/tensor.hpp"

namespace sparseout {

// Seeded generator built on std::mt19937_64, whose output sequence is fixed
// by the C++ standard. All conversions to doubles, Bernoulli outcomes, bounded
// integers and normals are done here rather than through <random>
// distributions, whose algorithms are implementation-defined. Same seed gives
// the same draws on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() {
    ++draws_;
    return engine_();
  }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // True with probability p.
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n), unbiased (Lemire's multiply-and-reject).
  std::size_t below(std::size_t n);
  // Standard normal via Box-Muller; consumes two raw draws per call.
  double normal();

  // Number of raw 64-bit draws consumed so far.
  std::uint64_t draws() const noexcept { return draws_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

// Fisher-Yates shuffle driven by Rng::below.
void shuffle(std::span<std::size_t> items, Rng& rng);

// Elements are independently 1/p with probability p, else 0. Requires
// 0 < p <= 1 (HyperparameterError otherwise). Always draws rows*cols values.
Tensor bernoulli_mask(std::size_t rows, std::size_t cols, double p, Rng& rng);

}  // namespace sparseout
