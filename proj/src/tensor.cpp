#include "sparseout/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "sparseout/errors.hpp"

namespace sparseout {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

template <typename F>
Tensor unary(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  auto src = a.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <typename F>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, F f) {
  require_same_shape(a, b, op);
  Tensor out(a.rows(), a.cols());
  auto x = a.values();
  auto y = b.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
  return out;
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Tensor: " + std::to_string(data_.size()) +
                         " values cannot fill shape " + shape_string());
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Tensor::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(rows_) + " x " + std::to_string(cols_) + ")";
}

void Tensor::fill(double v) {
  for (auto& x : data_) x = v;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * y[i];
  return ((s0 + s1) + (s2 + s3)) + tail;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ for " + a.shape_string() + " * " +
                         b.shape_string());
  }
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ for " + a.shape_string() +
                         " * " + b.shape_string() + "^T");
  }
  Tensor out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto x = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(x, b.row(j));
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: inner dimensions differ for " + a.shape_string() +
                         "^T * " + b.shape_string());
  }
  Tensor out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto src = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      auto dst = out.row(i);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aki * src[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return binary(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double c) {
  return unary(a, [c](double x) { return c * x; });
}

Tensor abs(const Tensor& a) {
  return unary(a, [](double x) { return std::fabs(x); });
}

Tensor pow(const Tensor& a, double exponent) {
  const bool integral = std::trunc(exponent) == exponent;
  return unary(a, [exponent, integral](double x) {
    if (x < 0.0 && !integral) {
      throw InvalidInputError("pow: negative base " + std::to_string(x) +
                              " with non-integral exponent " + std::to_string(exponent));
    }
    return std::pow(x, exponent);
  });
}

Tensor sign(const Tensor& a) {
  return unary(a, [](double x) { return sign(x); });
}

Tensor map(const Tensor& a, const std::function<double(double)>& f) { return unary(a, f); }

Tensor add_row_vector(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row_vector: cannot broadcast " + row.shape_string() + " over " +
                         a.shape_string());
  }
  Tensor out = a;
  auto bias = row.values();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += bias[j];
  }
  return out;
}

Tensor sum_rows(const Tensor& a) {
  Tensor out(1, a.cols());
  auto dst = out.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto src = a.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  return out;
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> indices) {
  Tensor out(indices.size(), a.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= a.rows()) {
      throw InvalidInputError("gather_rows: row " + std::to_string(indices[i]) +
                              " out of range for " + a.shape_string());
    }
    auto src = a.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.rows()) {
    throw InvalidInputError("slice_rows: [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") out of range for " + a.shape_string());
  }
  std::vector<double> data(a.values().begin() + begin * a.cols(),
                           a.values().begin() + end * a.cols());
  return Tensor(end - begin, a.cols(), std::move(data));
}

bool all_finite(const Tensor& a) {
  for (double x : a.values())
    if (!std::isfinite(x)) return false;
  return true;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  return a.empty() || std::memcmp(a.values().data(), b.values().data(),
                                  a.size() * sizeof(double)) == 0;
}

}  // namespace sparseout
