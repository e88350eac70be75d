#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sparseout {

// Dense row-major 2-D array of doubles. Rows are batch examples.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Throws DimensionError unless data.size() == rows * cols.
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Tensor::from_rows({{1, 2}, {3, 4}})
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  bool same_shape(const Tensor& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  // "(rows x cols)"
  std::string shape_string() const;

  void fill(double v);

  // Bitwise equality of shape and contents.
  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Standard matrix product a * b. Throws DimensionError naming both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T without materialising the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// a^T * b without materialising the transpose.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Dot product with a fixed 4-way accumulation order. Every affine map in the
// library goes through this, so two code paths that feed it identical
// operands produce bitwise-identical results.
double dot(std::span<const double> x, std::span<const double> y);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor abs(const Tensor& a);
// Elementwise power. Negative bases require an integral exponent.
Tensor pow(const Tensor& a, double exponent);
// -1, 0 or +1 per element; sign(0) == 0.
Tensor sign(const Tensor& a);
Tensor map(const Tensor& a, const std::function<double(double)>& f);

// Adds a (1 x cols) row vector to every row of a.
Tensor add_row_vector(const Tensor& a, const Tensor& row);
// Column sums as a (1 x cols) tensor.
Tensor sum_rows(const Tensor& a);
// Copies the listed rows of a, in order, into a new tensor.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> indices);
// Rows [begin, end).
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);

bool all_finite(const Tensor& a);
// Same shape and identical bit patterns (distinguishes -0.0 from 0.0).
bool bitwise_equal(const Tensor& a, const Tensor& b);

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace sparseout
