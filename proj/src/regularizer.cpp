#include "sparseout/regularizer.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sparseout/errors.hpp"

namespace sparseout {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

Rng& require_rng(Rng* rng, const char* who) {
  if (rng == nullptr) throw StateError(std::string(who) + ": train-mode forward needs an Rng");
  return *rng;
}

// The two possible perturbed weights per element, indexed by mask outcome.
struct WeightTables {
  Tensor dropped;  // r = 0
  Tensor kept;     // r = 1/p
};

WeightTables perturbed_weights(const Tensor& weight, const RegConfig& cfg) {
  const double kept = 1.0 / cfg.p;
  WeightTables t{Tensor(weight.rows(), weight.cols()), Tensor(weight.rows(), weight.cols())};
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double s = perturbation_scale(weight[i], cfg.q);
    t.dropped[i] = perturb(weight[i], s, 0.0);
    t.kept[i] = perturb(weight[i], s, kept);
  }
  return t;
}

WeightTables weight_slopes(const Tensor& weight, const RegConfig& cfg) {
  const double kept = 1.0 / cfg.p;
  WeightTables t{Tensor(weight.rows(), weight.cols()), Tensor(weight.rows(), weight.cols())};
  for (std::size_t i = 0; i < weight.size(); ++i) {
    t.dropped[i] = perturbation_slope(weight[i], 0.0, cfg);
    t.kept[i] = perturbation_slope(weight[i], kept, cfg);
  }
  return t;
}

Tensor bridgeout_affine(const Tensor& weight, const Tensor& bias, const Tensor& a_prev,
                        const RegConfig& cfg, Rng& rng) {
  cfg.validate();
  if (a_prev.cols() != weight.cols()) {
    throw DimensionError("bridgeout_forward: input " + a_prev.shape_string() +
                         " does not match weight " + weight.shape_string());
  }
  if (bias.rows() != 1 || bias.cols() != weight.rows()) {
    throw DimensionError("bridgeout_forward: bias " + bias.shape_string() +
                         " does not match weight " + weight.shape_string());
  }
  const WeightTables table = perturbed_weights(weight, cfg);
  std::vector<double> row(weight.cols());
  Tensor out(a_prev.rows(), weight.rows());
  for (std::size_t n = 0; n < a_prev.rows(); ++n) {
    auto x = a_prev.row(n);
    for (std::size_t o = 0; o < weight.rows(); ++o) {
      auto dropped = table.dropped.row(o);
      auto kept = table.kept.row(o);
      for (std::size_t i = 0; i < row.size(); ++i) {
        row[i] = rng.bernoulli(cfg.p) ? kept[i] : dropped[i];
      }
      out(n, o) = dot(x, row) + bias[o];
    }
  }
  return out;
}

}  // namespace

void RegConfig::validate() const {
  if (!(p > 0.0 && p <= 1.0)) {
    throw HyperparameterError("RegConfig: keep probability p must lie in (0, 1], got " +
                              std::to_string(p));
  }
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw HyperparameterError("RegConfig: exponent q must be positive and finite, got " +
                              std::to_string(q));
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw HyperparameterError("RegConfig: eps must be positive, got " + std::to_string(eps));
  }
}

double perturbation_scale(double a, double q) {
  const double m = std::fabs(a);
  return q == 2.0 ? m : std::pow(m, 0.5 * q);
}

double perturb(double a, double s, double r) {
  if (r == 1.0) return a;
  return r * s + (a - s);
}

double perturbation_slope(double a, double r, const RegConfig& cfg) {
  if (a == 0.0) return cfg.q == 2.0 ? r : 1.0;
  const double half = 0.5 * cfg.q;
  double magnitude = std::fabs(a);
  if (cfg.q < 2.0 && magnitude < cfg.eps) magnitude = cfg.eps;
  const double power = cfg.q == 2.0 ? 1.0 : std::pow(magnitude, half - 1.0);
  return 1.0 + half * power * (r - 1.0) * sign(a);
}

Tensor sparseout_forward(const Tensor& a, const RegConfig& cfg, Mode mode, Rng& rng,
                         Tensor* mask_out) {
  cfg.validate();
  if (mode == Mode::eval) return a;
  Tensor mask = bernoulli_mask(a.rows(), a.cols(), cfg.p, rng);
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = perturb(a[i], perturbation_scale(a[i], cfg.q), mask[i]);
  }
  if (mask_out != nullptr) *mask_out = std::move(mask);
  return out;
}

Tensor sparseout_backward(const Tensor& upstream, const Tensor& input, const Tensor& mask,
                          const RegConfig& cfg) {
  cfg.validate();
  require_same_shape(upstream, input, "sparseout_backward");
  require_same_shape(mask, input, "sparseout_backward");
  Tensor out(upstream.rows(), upstream.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = upstream[i] * perturbation_slope(input[i], mask[i], cfg);
  }
  return out;
}

Tensor dropout_forward(const Tensor& a, double p, Mode mode, Rng& rng, Tensor* mask_out) {
  RegConfig{p, 2.0}.validate();
  if (mode == Mode::eval) return a;
  Tensor mask = bernoulli_mask(a.rows(), a.cols(), p, rng);
  Tensor out = hadamard(mask, a);
  if (mask_out != nullptr) *mask_out = std::move(mask);
  return out;
}

Tensor dropout_backward(const Tensor& upstream, const Tensor& mask) {
  require_same_shape(upstream, mask, "dropout_backward");
  return hadamard(upstream, mask);
}

Tensor bridgeout_forward(const Tensor& weight, const Tensor& bias, const Tensor& a_prev,
                         const RegConfig& cfg, Rng& rng) {
  return bridgeout_affine(weight, bias, a_prev, cfg, rng);
}

SparseoutLayer::SparseoutLayer(RegConfig cfg) : cfg_(cfg) { cfg_.validate(); }

Tensor SparseoutLayer::forward(const Tensor& input, Mode mode, Rng* rng) {
  if (mode == Mode::eval) {
    input_.reset();
    mask_.reset();
    return input;
  }
  Tensor mask;
  Tensor out = sparseout_forward(input, cfg_, mode, require_rng(rng, "sparseout"), &mask);
  input_ = input;
  mask_ = std::move(mask);
  return out;
}

Tensor SparseoutLayer::backward(const Tensor& upstream) {
  return sparseout_backward(upstream, *this);
}

Tensor sparseout_backward(const Tensor& upstream, const SparseoutLayer& layer) {
  if (!layer.cached_input() || !layer.cached_mask()) {
    throw StateError("sparseout backward: no cached train-mode input and mask");
  }
  return sparseout_backward(upstream, *layer.cached_input(), *layer.cached_mask(),
                            layer.config());
}

DropoutLayer::DropoutLayer(double p) : p_(p) { RegConfig{p, 2.0}.validate(); }

Tensor DropoutLayer::forward(const Tensor& input, Mode mode, Rng* rng) {
  if (mode == Mode::eval) {
    mask_.reset();
    return input;
  }
  Tensor mask;
  Tensor out = dropout_forward(input, p_, mode, require_rng(rng, "dropout"), &mask);
  mask_ = std::move(mask);
  return out;
}

Tensor DropoutLayer::backward(const Tensor& upstream) {
  if (!mask_) throw StateError("dropout backward: no cached train-mode mask");
  return dropout_backward(upstream, *mask_);
}

BridgeoutLinearLayer::BridgeoutLinearLayer(LinearLayer base, RegConfig cfg)
    : cfg_(cfg),
      weight_(base.weight()),
      bias_(base.bias()),
      weight_grad_(weight_.rows(), weight_.cols()),
      bias_grad_(1, weight_.rows()) {
  cfg_.validate();
}

Tensor BridgeoutLinearLayer::forward(const Tensor& input, Mode mode, Rng* rng) {
  if (mode == Mode::eval) {
    input_.reset();
    replay_.reset();
    return add_row_vector(matmul_nt(input, weight_), bias_);
  }
  Rng& gen = require_rng(rng, "bridgeout");
  Rng saved = gen;
  Tensor out = bridgeout_affine(weight_, bias_, input, cfg_, gen);
  input_ = input;
  replay_ = saved;
  return out;
}

Tensor BridgeoutLinearLayer::backward(const Tensor& upstream) {
  if (!input_ || !replay_) throw StateError("bridgeout backward: no cached train-mode input");
  const Tensor& x = *input_;
  if (upstream.rows() != x.rows() || upstream.cols() != weight_.rows()) {
    throw DimensionError("bridgeout backward: upstream " + upstream.shape_string() +
                         " does not match output shape");
  }
  const WeightTables value = perturbed_weights(weight_, cfg_);
  const WeightTables slope = weight_slopes(weight_, cfg_);
  Rng rng = *replay_;
  Tensor grad_input(x.rows(), x.cols());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    auto xn = x.row(n);
    auto gx = grad_input.row(n);
    for (std::size_t o = 0; o < weight_.rows(); ++o) {
      const double g = upstream(n, o);
      auto gw = weight_grad_.row(o);
      auto v0 = value.dropped.row(o);
      auto v1 = value.kept.row(o);
      auto s0 = slope.dropped.row(o);
      auto s1 = slope.kept.row(o);
      for (std::size_t i = 0; i < xn.size(); ++i) {
        const bool keep = rng.bernoulli(cfg_.p);
        gx[i] += g * (keep ? v1[i] : v0[i]);
        gw[i] += g * xn[i] * (keep ? s1[i] : s0[i]);
      }
      bias_grad_[o] += g;
    }
  }
  return grad_input;
}

std::vector<Parameter> BridgeoutLinearLayer::parameters() {
  return {{&weight_, &weight_grad_}, {&bias_, &bias_grad_}};
}

}  // namespace sparseout
