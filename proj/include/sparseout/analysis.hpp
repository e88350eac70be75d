#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sparseout/net.hpp"
#include "sparseout/regularizer.hpp"
#include "sparseout/rng.hpp"
#include "sparseout/tensor.hpp"

namespace sparseout {

// Hoyer's sparsity measure (sqrt(d) - |x|_1 / |x|_2) / (sqrt(d) - 1).
// 0 for a vector of equal non-zero magnitudes, 1 for a one-hot vector.
// Throws InvalidInputError for d < 2 or an all-zero vector.
double hoyer(std::span<const double> x);

// Generalised linear model: design X (n x d), coefficients beta (d x 1) and
// the curvature A'' of its log-partition function, evaluated at X_i . beta.
struct GlmSpec {
  Tensor design;
  Tensor beta;
  std::function<double(double)> curvature;

  // Throws DimensionError / InvalidInputError.
  void validate() const;
};

// A'' for least squares (identically 1).
double linear_curvature(double eta);
// A'' for logistic regression, s(eta) (1 - s(eta)).
double logistic_curvature(double eta);

// Closed-form Var[X~_i . beta] = sum_j ((1 - p) / p) |X_ij|^q beta_j^2.
double analytic_variance(const GlmSpec& glm, std::size_t row, const RegConfig& cfg);

// Sample variance of X~_i . beta over n_draws independent masks (one mask
// element per feature), with X~_ij = X_ij + |X_ij|^(q/2) (r_j - 1).
// Requires n_draws >= 1000.
double empirical_variance(const GlmSpec& glm, std::size_t row, const RegConfig& cfg,
                          std::size_t n_draws, Rng& rng);

// Quadratic approximation of the perturbation's implicit penalty,
// sum_i A''(X_i . beta) / 2 * analytic_variance(i).
double quadratic_penalty(const GlmSpec& glm, const RegConfig& cfg);

// Mean Hoyer measure over the rows of layer `layer_index`'s eval-mode
// output. All-zero rows are skipped; more than half of them is an error.
struct HoyerSummary {
  double mean = 0.0;
  std::size_t rows_used = 0;
  std::size_t zero_rows = 0;
};
HoyerSummary network_hoyer_summary(Network& net, const Tensor& data, std::size_t layer_index);
double network_hoyer(Network& net, const Tensor& data, std::size_t layer_index);

struct SparsityPoint {
  std::size_t epoch;
  double hoyer;
  double loss;
};

// Per-epoch Hoyer trajectory of one training run.
class SparsityReport {
 public:
  // Throws InvalidInputError if hoyer lies outside [0, 1] by more than 1e-12.
  void add(SparsityPoint point);
  const std::vector<SparsityPoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  const SparsityPoint& back() const { return points_.back(); }

 private:
  std::vector<SparsityPoint> points_;
};

}  // namespace sparseout
