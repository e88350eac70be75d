#include "sparseout/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sparseout/errors.hpp"

namespace sparseout {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidInputError("Rng::below: empty range");
  const auto bound = static_cast<std::uint64_t>(n);
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

double Rng::normal() {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void shuffle(std::span<std::size_t> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(items[i - 1], items[j]);
  }
}

Tensor bernoulli_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw HyperparameterError("bernoulli_mask: keep probability must lie in (0, 1], got " +
                              std::to_string(p));
  }
  const double kept = 1.0 / p;
  Tensor mask(rows, cols);
  for (auto& m : mask.values()) m = rng.bernoulli(p) ? kept : 0.0;
  return mask;
}

}  // namespace sparseout
