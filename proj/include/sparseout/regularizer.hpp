#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "sparseout/net.hpp"
#include "sparseout/rng.hpp"
#include "sparseout/tensor.hpp"

namespace sparseout {

// Hyperparameters of a Sparseout-family perturbation.
//   p    keep probability of the Bernoulli mask, in (0, 1]
//   q    exponent of the induced L_q penalty; q = 2 recovers Dropout on
//        non-negative inputs, q < 2 favours sparse activations, q > 2 dense
//   eps  lower clamp on |a| inside the backward pass when q < 2
struct RegConfig {
  double p = 0.5;
  double q = 2.0;
  double eps = 1e-6;

  // Throws HyperparameterError.
  void validate() const;
};

// Magnitude term |a|^(q/2). Exactly |a| when q == 2.
double perturbation_scale(double a, double q);

// Perturbed value for one element given its scale s = |a|^(q/2) and mask
// value r in {0, 1/p}: a + s (r - 1), evaluated as r s + (a - s) so that
// q == 2 on a >= 0 collapses to exactly r a. r == 1 returns a unchanged.
double perturb(double a, double s, double r);

// d(perturb)/da for one element:
//   1 + (q/2) |a|^(q/2 - 1) (r - 1) sign(a)
// with |a| clamped below at eps when q < 2. At a == 0 exactly the one-sided
// derivative over a >= 0 is used: r when q == 2 (the Dropout slope), 1
// otherwise.
double perturbation_slope(double a, double r, const RegConfig& cfg);

// Train mode samples a fresh mask r (one element per activation) and returns
// a + |a|^(q/2) (r - 1) elementwise. Eval mode returns `a` unchanged and
// touches neither `rng` nor `mask_out`. The sampled mask is written to
// `mask_out` when given.
Tensor sparseout_forward(const Tensor& a, const RegConfig& cfg, Mode mode, Rng& rng,
                         Tensor* mask_out = nullptr);
// upstream * J for the input and mask of a train-mode forward.
Tensor sparseout_backward(const Tensor& upstream, const Tensor& input, const Tensor& mask,
                          const RegConfig& cfg);

// r * a in train mode, a in eval mode. Draws its mask exactly like
// sparseout_forward, so the two consume identical random streams.
Tensor dropout_forward(const Tensor& a, double p, Mode mode, Rng& rng,
                       Tensor* mask_out = nullptr);
Tensor dropout_backward(const Tensor& upstream, const Tensor& mask);

// Per-example weight perturbation. For every row x of a_prev an independent
// mask R over all of W is drawn and the row's output is
// (W + |W|^(q/2) (R - 1)) x + b.
// Reference implementation for cost comparisons; deliberately unbatched.
Tensor bridgeout_forward(const Tensor& weight, const Tensor& bias, const Tensor& a_prev,
                         const RegConfig& cfg, Rng& rng);

class SparseoutLayer : public Layer {
 public:
  explicit SparseoutLayer(RegConfig cfg);

  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& upstream) override;
  std::string name() const override { return "sparseout"; }

  const RegConfig& config() const { return cfg_; }
  const std::optional<Tensor>& cached_input() const { return input_; }
  const std::optional<Tensor>& cached_mask() const { return mask_; }

 private:
  RegConfig cfg_;
  std::optional<Tensor> input_;
  std::optional<Tensor> mask_;
};

Tensor sparseout_backward(const Tensor& upstream, const SparseoutLayer& layer);

class DropoutLayer : public Layer {
 public:
  explicit DropoutLayer(double p);

  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& upstream) override;
  std::string name() const override { return "dropout"; }

  double keep_probability() const { return p_; }
  const std::optional<Tensor>& cached_mask() const { return mask_; }

 private:
  double p_;
  std::optional<Tensor> mask_;
};

// Linear layer whose weights receive a fresh Sparseout-style perturbation
// per training example. The backward pass replays the forward's masks from a
// saved generator state instead of storing batch x out x in mask values.
class BridgeoutLinearLayer : public Layer {
 public:
  BridgeoutLinearLayer(LinearLayer base, RegConfig cfg);

  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& upstream) override;
  std::vector<Parameter> parameters() override;
  std::optional<std::size_t> in_features() const override { return weight_.cols(); }
  std::optional<std::size_t> out_features() const override { return weight_.rows(); }
  std::string name() const override { return "bridgeout-linear"; }

  const Tensor& weight() const { return weight_; }
  const Tensor& weight_grad() const { return weight_grad_; }
  const Tensor& bias_grad() const { return bias_grad_; }

 private:
  RegConfig cfg_;
  Tensor weight_;
  Tensor bias_;
  Tensor weight_grad_;
  Tensor bias_grad_;
  std::optional<Tensor> input_;
  std::optional<Rng> replay_;
};

}  // namespace sparseout
