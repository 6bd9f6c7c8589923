#include "actgen/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace actgen {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  throw std::logic_error("to_string: unknown activation");
}

Activation activation_from_string(std::string_view s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw std::invalid_argument("unknown activation: " + std::string(s));
}

Tensor apply_activation(Activation a, const Tensor& x) {
  switch (a) {
    case Activation::kLinear: return x;
    case Activation::kRelu: return relu(x);
    case Activation::kTanh: return tanh(x);
    case Activation::kSigmoid: return sigmoid(x);
  }
  throw std::logic_error("apply_activation: unknown activation");
}

// ---- Mlp -----------------------------------------------------------------

Mlp Mlp::init(const std::vector<std::size_t>& dims,
              const std::vector<Activation>& activations, std::uint64_t seed) {
  Rng rng(seed);
  return init(dims, activations, rng);
}

Mlp Mlp::init(const std::vector<std::size_t>& dims,
              const std::vector<Activation>& activations, Rng& rng) {
  if (dims.size() < 2) {
    throw std::invalid_argument("Mlp::init: need at least input and output dims");
  }
  if (activations.size() != dims.size() - 1) {
    throw std::invalid_argument("Mlp::init: expected " + std::to_string(dims.size() - 1) +
                                " activations, got " + std::to_string(activations.size()));
  }
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i], fan_out = dims[i + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(fan_in * fan_out);
    for (double& v : w) v = rng.uniform(-limit, limit);
    DenseLayer layer;
    layer.weight = Tensor::from_data({fan_in, fan_out}, std::move(w)).set_requires_grad(true);
    layer.bias = Tensor::zeros({fan_out}).set_requires_grad(true);
    layer.activation = activations[i];
    mlp.layers_.push_back(std::move(layer));
  }
  return mlp;
}

namespace {

Tensor run_layers(const std::vector<DenseLayer>& layers, const Tensor& input,
                  bool last_activation) {
  if (layers.empty()) throw std::logic_error("Mlp::forward: empty network");
  const bool vector_input = input.rank() == 1;
  Tensor x = vector_input ? reshape(input, {1, input.extent(0)}) : input;
  if (x.rank() != 2 || x.extent(1) != layers.front().in_dim()) {
    throw std::invalid_argument("Mlp::forward: input dim " +
                                std::to_string(x.rank() == 2 ? x.extent(1) : x.numel()) +
                                " does not match layer dim " +
                                std::to_string(layers.front().in_dim()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& layer = layers[i];
    x = add_rowvec(matmul(x, layer.weight), layer.bias);
    if (last_activation || i + 1 < layers.size()) {
      x = apply_activation(layer.activation, x);
    }
  }
  return vector_input ? reshape(x, {x.extent(1)}) : x;
}

}  // namespace

Tensor Mlp::forward(const Tensor& x) const { return run_layers(layers_, x, true); }

Tensor Mlp::forward_preact(const Tensor& x) const { return run_layers(layers_, x, false); }

std::vector<Tensor> Mlp::parameters() const {
  std::vector<Tensor> out;
  out.reserve(2 * layers_.size());
  for (const auto& layer : layers_) {
    out.push_back(layer.weight);
    out.push_back(layer.bias);
  }
  return out;
}

// ---- Adam -----------------------------------------------------------------

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    auto theta = params_[pi].mutable_data();
    auto g = params_[pi].grad();
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::restore(std::size_t t, std::vector<std::vector<double>> m,
                   std::vector<std::vector<double>> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) {
    throw std::invalid_argument("Adam::restore: moment count mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (m[i].size() != params_[i].numel() || v[i].size() != params_[i].numel()) {
      throw std::invalid_argument("Adam::restore: moment shape mismatch at parameter " +
                                  std::to_string(i));
    }
  }
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace actgen
