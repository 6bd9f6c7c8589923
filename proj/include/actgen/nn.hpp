#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "actgen/random.hpp"
#include "actgen/tensor.hpp"

namespace actgen {

enum class Activation { kLinear, kRelu, kTanh, kSigmoid };

const char* to_string(Activation a);
Activation activation_from_string(std::string_view s);
Tensor apply_activation(Activation a, const Tensor& x);

struct DenseLayer {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]
  Activation activation = Activation::kLinear;

  std::size_t in_dim() const { return weight.extent(0); }
  std::size_t out_dim() const { return weight.extent(1); }
};

// Plain fully connected stack. Weights are Xavier-uniform
// (limit sqrt(6/(fan_in+fan_out))), biases zero, deterministic per seed.
class Mlp {
 public:
  Mlp() = default;

  static Mlp init(const std::vector<std::size_t>& dims,
                  const std::vector<Activation>& activations, std::uint64_t seed);
  static Mlp init(const std::vector<std::size_t>& dims,
                  const std::vector<Activation>& activations, Rng& rng);

  // x may be [B x in] or a rank-1 [in] vector (returned rank matches input).
  Tensor forward(const Tensor& x) const;
  // Runs the stack but leaves the last layer's activation off; adversarial
  // losses consume the raw logits through the fused log_sigmoid primitive.
  Tensor forward_preact(const Tensor& x) const;

  std::vector<Tensor> parameters() const;  // shared handles: w0, b0, w1, b1, ...
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t in_dim() const { return layers_.front().in_dim(); }
  std::size_t out_dim() const { return layers_.back().out_dim(); }
  bool empty() const { return layers_.empty(); }

 private:
  std::vector<DenseLayer> layers_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed parameter set. step() consumes whatever
// gradients the parameters currently hold; zeroing between steps is the
// caller's job.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor> params, AdamConfig cfg);

  void step();
  void zero_grad();

  std::size_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

  // Checkpoint restore; moment shapes must mirror the parameter set.
  void restore(std::size_t t, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  std::vector<Tensor> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace actgen
