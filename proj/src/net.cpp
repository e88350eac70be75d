#include "sparseout/net.hpp"

#include <cmath>
#include <numeric>

#include "sparseout/errors.hpp"

namespace sparseout {

void Layer::zero_grad() {
  for (auto& p : parameters()) p.grad->fill(0.0);
}

LinearLayer::LinearLayer(std::size_t in, std::size_t out)
    : LinearLayer(Tensor(out, in), Tensor(1, out)) {}

LinearLayer::LinearLayer(Tensor weight, Tensor bias)
    : weight_(std::move(weight)),
      bias_(std::move(bias)),
      weight_grad_(weight_.rows(), weight_.cols()),
      bias_grad_(1, weight_.rows()) {
  if (bias_.rows() != 1 || bias_.cols() != weight_.rows()) {
    throw DimensionError("LinearLayer: bias " + bias_.shape_string() +
                         " does not match weight " + weight_.shape_string());
  }
}

LinearLayer LinearLayer::glorot(std::size_t in, std::size_t out, Rng& rng) {
  LinearLayer layer(in, out);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (auto& w : layer.weight_.values()) w = rng.uniform(-limit, limit);
  return layer;
}

Tensor LinearLayer::forward(const Tensor& input, Mode mode, Rng*) {
  if (input.cols() != weight_.cols()) {
    throw DimensionError("linear forward: input " + input.shape_string() +
                         " does not match weight " + weight_.shape_string());
  }
  if (mode == Mode::train) {
    input_ = input;
  } else {
    input_.reset();
  }
  return add_row_vector(matmul_nt(input, weight_), bias_);
}

Tensor LinearLayer::backward(const Tensor& upstream) {
  if (!input_) throw StateError("linear backward: no cached train-mode input");
  if (upstream.rows() != input_->rows() || upstream.cols() != weight_.rows()) {
    throw DimensionError("linear backward: upstream " + upstream.shape_string() +
                         " does not match output shape");
  }
  weight_grad_ = add(weight_grad_, matmul_tn(upstream, *input_));
  bias_grad_ = add(bias_grad_, sum_rows(upstream));
  return matmul(upstream, weight_);
}

std::vector<Parameter> LinearLayer::parameters() {
  return {{&weight_, &weight_grad_}, {&bias_, &bias_grad_}};
}

Tensor ReluLayer::forward(const Tensor& input, Mode mode, Rng*) {
  if (mode == Mode::train) {
    input_ = input;
  } else {
    input_.reset();
  }
  return relu_forward(input);
}

Tensor ReluLayer::backward(const Tensor& upstream) {
  if (!input_) throw StateError("relu backward: no cached train-mode input");
  if (!upstream.same_shape(*input_)) {
    throw DimensionError("relu backward: upstream " + upstream.shape_string() + " vs input " +
                         input_->shape_string());
  }
  Tensor out(upstream.rows(), upstream.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*input_)[i] > 0.0 ? upstream[i] : 0.0;
  return out;
}

Tensor SigmoidLayer::forward(const Tensor& input, Mode mode, Rng*) {
  Tensor out = sigmoid_forward(input);
  if (mode == Mode::train) {
    output_ = out;
  } else {
    output_.reset();
  }
  return out;
}

Tensor SigmoidLayer::backward(const Tensor& upstream) {
  if (!output_) throw StateError("sigmoid backward: no cached train-mode output");
  if (!upstream.same_shape(*output_)) {
    throw DimensionError("sigmoid backward: upstream " + upstream.shape_string() +
                         " vs output " + output_->shape_string());
  }
  Tensor out(upstream.rows(), upstream.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = (*output_)[i];
    out[i] = upstream[i] * s * (1.0 - s);
  }
  return out;
}

Tensor linear_forward(LinearLayer& layer, const Tensor& a_prev) {
  return layer.forward(a_prev, Mode::train, nullptr);
}

Tensor relu_forward(const Tensor& a) {
  return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

Tensor sigmoid_forward(const Tensor& a) {
  return map(a, [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) {
    throw DimensionError("mse_loss: prediction " + pred.shape_string() + " vs target " +
                         target.shape_string());
  }
  if (pred.empty()) throw InvalidInputError("mse_loss: empty tensors");
  const auto n = static_cast<double>(pred.size());
  LossResult result{0.0, Tensor(pred.rows(), pred.cols())};
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    sum += diff * diff;
    result.grad[i] = 2.0 * diff / n;
  }
  result.value = sum / n;
  return result;
}

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw HyperparameterError("SgdConfig: learning rate must be finite and non-negative");
  }
  if (batch_size < 1) throw HyperparameterError("SgdConfig: batch size must be at least 1");
}

Network::Network(std::vector<std::unique_ptr<Layer>> layers) : layers_(std::move(layers)) {
  std::optional<std::size_t> width;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!layers_[i]) throw InvalidInputError("Network: null layer at index " + std::to_string(i));
    const auto in = layers_[i]->in_features();
    if (in && width && *in != *width) {
      throw DimensionError("Network: layer " + std::to_string(i) + " (" + layers_[i]->name() +
                           ") expects " + std::to_string(*in) + " features but receives " +
                           std::to_string(*width));
    }
    if (const auto out = layers_[i]->out_features()) width = out;
  }
}

Tensor Network::forward(const Tensor& input, Rng* rng) {
  Tensor x = input;
  for (auto& layer : layers_) x = layer->forward(x, mode_, rng);
  has_forward_ = mode_ == Mode::train;
  return x;
}

Tensor Network::forward_eval(const Tensor& input, std::size_t last) {
  if (last >= layers_.size()) {
    throw InvalidInputError("Network::forward_eval: layer index " + std::to_string(last) +
                            " out of range for " + std::to_string(layers_.size()) + " layers");
  }
  Tensor x = input;
  for (std::size_t i = 0; i <= last; ++i) x = layers_[i]->forward(x, Mode::eval, nullptr);
  has_forward_ = false;
  return x;
}

Tensor Network::predict(const Tensor& input) {
  if (layers_.empty()) return input;
  return forward_eval(input, layers_.size() - 1);
}

void Network::backward(const Tensor& loss_grad) {
  if (!has_forward_) throw StateError("Network::backward: no train-mode forward pass to consume");
  Tensor g = loss_grad;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

void Network::zero_grad() {
  for (auto& layer : layers_) layer->zero_grad();
}

void Network::sgd_step(const SgdConfig& cfg) {
  cfg.validate();
  const double lr = cfg.learning_rate;
  for (auto& p : parameters()) {
    auto w = p.value->values();
    auto g = p.grad->values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  }
}

std::vector<Parameter> Network::parameters() {
  std::vector<Parameter> out;
  for (auto& layer : layers_) {
    auto ps = layer->parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

void backward(Network& net, const Tensor& loss_grad) { net.backward(loss_grad); }

void sgd_step(Network& net, const SgdConfig& cfg) { net.sgd_step(cfg); }

double train_epoch(Network& net, const Tensor& data, const Tensor& targets,
                   const SgdConfig& cfg, Rng& rng) {
  cfg.validate();
  if (data.rows() == 0) throw InvalidInputError("train_epoch: empty dataset");
  if (data.rows() != targets.rows()) {
    throw DimensionError("train_epoch: data " + data.shape_string() + " vs targets " +
                         targets.shape_string());
  }
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);

  net.set_mode(Mode::train);
  double total = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
    const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
    std::span<const std::size_t> idx(order.data() + begin, end - begin);
    const Tensor x = gather_rows(data, idx);
    const Tensor t = gather_rows(targets, idx);

    net.zero_grad();
    const Tensor y = net.forward(x, &rng);
    const LossResult loss = mse_loss(y, t);
    net.backward(loss.grad);
    net.sgd_step(cfg);
    total += loss.value * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(data.rows());
}

}  // namespace sparseout
