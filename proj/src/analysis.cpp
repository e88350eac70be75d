#include "sparseout/analysis.hpp"

#include <cmath>
#include <string>

#include "sparseout/errors.hpp"

namespace sparseout {

namespace {

void check_row(const GlmSpec& glm, std::size_t row) {
  glm.validate();
  if (row >= glm.design.rows()) {
    throw InvalidInputError("row index " + std::to_string(row) + " out of range for design " +
                            glm.design.shape_string());
  }
}

double linear_predictor(const GlmSpec& glm, std::size_t row) {
  return dot(glm.design.row(row), glm.beta.values());
}

}  // namespace

double hoyer(std::span<const double> x) {
  if (x.size() < 2) {
    throw InvalidInputError("hoyer: need at least 2 elements, got " + std::to_string(x.size()));
  }
  double l1 = 0.0;
  double sq = 0.0;
  for (double v : x) {
    l1 += std::fabs(v);
    sq += v * v;
  }
  if (sq == 0.0) throw InvalidInputError("hoyer: undefined for the all-zero vector");
  const double root_d = std::sqrt(static_cast<double>(x.size()));
  return (root_d - l1 / std::sqrt(sq)) / (root_d - 1.0);
}

void GlmSpec::validate() const {
  if (design.rows() < 1) throw InvalidInputError("GlmSpec: design matrix has no rows");
  if (beta.cols() != 1 || beta.rows() != design.cols()) {
    throw DimensionError("GlmSpec: beta " + beta.shape_string() +
                         " must be a column matching design " + design.shape_string());
  }
  if (!curvature) throw InvalidInputError("GlmSpec: missing curvature function");
}

double linear_curvature(double) { return 1.0; }

double logistic_curvature(double eta) {
  const double s = eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta))
                              : std::exp(eta) / (1.0 + std::exp(eta));
  return s * (1.0 - s);
}

double analytic_variance(const GlmSpec& glm, std::size_t row, const RegConfig& cfg) {
  check_row(glm, row);
  cfg.validate();
  double sum = 0.0;
  for (std::size_t j = 0; j < glm.design.cols(); ++j) {
    const double b = glm.beta[j];
    sum += std::pow(std::fabs(glm.design(row, j)), cfg.q) * b * b;
  }
  return (1.0 - cfg.p) / cfg.p * sum;
}

double empirical_variance(const GlmSpec& glm, std::size_t row, const RegConfig& cfg,
                          std::size_t n_draws, Rng& rng) {
  check_row(glm, row);
  cfg.validate();
  if (n_draws < 1000) {
    throw InvalidInputError("empirical_variance: need at least 1000 draws, got " +
                            std::to_string(n_draws));
  }
  const std::size_t d = glm.design.cols();
  const double kept = 1.0 / cfg.p;
  std::vector<double> x(d), s(d);
  for (std::size_t j = 0; j < d; ++j) {
    x[j] = glm.design(row, j);
    s[j] = perturbation_scale(x[j], cfg.q);
  }
  // Welford's running mean and sum of squared deviations.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 1; k <= n_draws; ++k) {
    double value = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double r = rng.bernoulli(cfg.p) ? kept : 0.0;
      value += perturb(x[j], s[j], r) * glm.beta[j];
    }
    const double delta = value - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (value - mean);
  }
  return m2 / static_cast<double>(n_draws - 1);
}

double quadratic_penalty(const GlmSpec& glm, const RegConfig& cfg) {
  glm.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < glm.design.rows(); ++i) {
    total += 0.5 * glm.curvature(linear_predictor(glm, i)) * analytic_variance(glm, i, cfg);
  }
  return total;
}

HoyerSummary network_hoyer_summary(Network& net, const Tensor& data, std::size_t layer_index) {
  if (layer_index >= net.size()) {
    throw InvalidInputError("network_hoyer: layer index " + std::to_string(layer_index) +
                            " out of range for " + std::to_string(net.size()) + " layers");
  }
  if (data.rows() == 0) throw InvalidInputError("network_hoyer: empty data");
  const Tensor act = net.forward_eval(data, layer_index);
  HoyerSummary summary;
  double sum = 0.0;
  for (std::size_t r = 0; r < act.rows(); ++r) {
    auto row = act.row(r);
    bool zero = true;
    for (double v : row) {
      if (v != 0.0) {
        zero = false;
        break;
      }
    }
    if (zero) {
      ++summary.zero_rows;
      continue;
    }
    sum += hoyer(row);
    ++summary.rows_used;
  }
  if (2 * summary.zero_rows > act.rows()) {
    throw InvalidInputError("network_hoyer: " + std::to_string(summary.zero_rows) + " of " +
                            std::to_string(act.rows()) + " activation rows are all zero");
  }
  summary.mean = sum / static_cast<double>(summary.rows_used);
  return summary;
}

double network_hoyer(Network& net, const Tensor& data, std::size_t layer_index) {
  return network_hoyer_summary(net, data, layer_index).mean;
}

void SparsityReport::add(SparsityPoint point) {
  if (!(point.hoyer >= -1e-12 && point.hoyer <= 1.0 + 1e-12)) {
    throw InvalidInputError("SparsityReport: Hoyer value " + std::to_string(point.hoyer) +
                            " outside [0, 1]");
  }
  points_.push_back(point);
}

}  // namespace sparseout
