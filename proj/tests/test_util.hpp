#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "sparseout/rng.hpp"
#include "sparseout/tensor.hpp"

namespace sparseout::testing {

// Triple-loop product, independent of the library's kernels.
inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// |x - y| / max(|x|, |y|), 0 when both vanish.
inline double relative_error(double x, double y) {
  const double scale = std::max(std::fabs(x), std::fabs(y));
  return scale == 0.0 ? 0.0 : std::fabs(x - y) / scale;
}

// Central difference of a scalar function of one tensor element.
inline double central_difference(Tensor& t, std::size_t index, const std::function<double()>& f,
                                 double h = 1e-5) {
  const double saved = t[index];
  t[index] = saved + h;
  const double up = f();
  t[index] = saved - h;
  const double down = f();
  t[index] = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace sparseout::testing
