#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparseout/rng.hpp"
#include "sparseout/tensor.hpp"

namespace sparseout {

enum class Mode { train, eval };

// A trainable tensor paired with its accumulated gradient.
struct Parameter {
  Tensor* value;
  Tensor* grad;
};

// One stage of a feedforward network. Layers cache what they need during a
// train-mode forward and consume the cache in backward.
class Layer {
 public:
  virtual ~Layer() = default;

  // `rng` may be null in eval mode; stochastic layers throw StateError when
  // asked to run in train mode without one.
  virtual Tensor forward(const Tensor& input, Mode mode, Rng* rng) = 0;
  // Accumulates parameter gradients and returns d(loss)/d(input).
  virtual Tensor backward(const Tensor& upstream) = 0;

  virtual std::vector<Parameter> parameters() { return {}; }
  void zero_grad();

  // Fixed feature counts, or nullopt for shape-preserving layers.
  virtual std::optional<std::size_t> in_features() const { return std::nullopt; }
  virtual std::optional<std::size_t> out_features() const { return std::nullopt; }

  virtual std::string name() const = 0;
};

// Affine map a_prev * W^T + b with W stored (out x in) and b (1 x out).
class LinearLayer : public Layer {
 public:
  LinearLayer(std::size_t in, std::size_t out);
  LinearLayer(Tensor weight, Tensor bias);

  // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero bias.
  static LinearLayer glorot(std::size_t in, std::size_t out, Rng& rng);

  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& upstream) override;
  std::vector<Parameter> parameters() override;
  std::optional<std::size_t> in_features() const override { return weight_.cols(); }
  std::optional<std::size_t> out_features() const override { return weight_.rows(); }
  std::string name() const override { return "linear"; }

  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }
  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }
  const Tensor& weight_grad() const { return weight_grad_; }
  const Tensor& bias_grad() const { return bias_grad_; }

 private:
  Tensor weight_;
  Tensor bias_;
  Tensor weight_grad_;
  Tensor bias_grad_;
  std::optional<Tensor> input_;
};

class ReluLayer : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  // Derivative is taken as 0 at exactly 0.
  Tensor backward(const Tensor& upstream) override;
  std::string name() const override { return "relu"; }

 private:
  std::optional<Tensor> input_;
};

class SigmoidLayer : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor backward(const Tensor& upstream) override;
  std::string name() const override { return "sigmoid"; }

 private:
  std::optional<Tensor> output_;
};

Tensor linear_forward(LinearLayer& layer, const Tensor& a_prev);
Tensor relu_forward(const Tensor& a);
// Evaluated without overflow for either sign of the argument.
Tensor sigmoid_forward(const Tensor& a);

struct LossResult {
  double value;
  Tensor grad;
};

// Mean of squared differences over all elements; grad = 2 (pred - target) / N.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

struct SgdConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t epochs = 1;

  void validate() const;
};

class Network {
 public:
  Network() = default;
  // Throws DimensionError if two fixed-width layers cannot be chained.
  explicit Network(std::vector<std::unique_ptr<Layer>> layers);

  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void set_mode(Mode mode) noexcept { mode_ = mode; }
  Mode mode() const noexcept { return mode_; }

  // Full forward pass in the current mode.
  Tensor forward(const Tensor& input, Rng* rng);
  // Eval-mode forward through layers [0, last]; returns layer `last`'s output.
  // Touches no RNG.
  Tensor forward_eval(const Tensor& input, std::size_t last);
  Tensor predict(const Tensor& input);

  void backward(const Tensor& loss_grad);
  void zero_grad();
  void sgd_step(const SgdConfig& cfg);

  std::vector<Parameter> parameters();
  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  Mode mode_ = Mode::train;
  bool has_forward_ = false;
};

// Free-function forms of the network operations.
void backward(Network& net, const Tensor& loss_grad);
void sgd_step(Network& net, const SgdConfig& cfg);

// One pass over (data, targets) in a seeded shuffled order. Each minibatch
// runs a train-mode forward with fresh masks, MSE backward and an SGD step.
// Returns the example-weighted mean training loss. Leaves the net in train
// mode.
double train_epoch(Network& net, const Tensor& data, const Tensor& targets,
                   const SgdConfig& cfg, Rng& rng);

}  // namespace sparseout
