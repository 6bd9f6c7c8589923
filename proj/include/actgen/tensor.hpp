#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace actgen {

struct TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

// One value in a dynamically recorded computation graph. A node owns its
// forward result, an optional gradient buffer, links to the nodes it was
// computed from, and a closure that scatters its gradient into those parents.
struct TensorNode {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first touched, then data-sized
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void()> backprop;

  bool is_leaf() const { return parents.empty(); }
  std::size_t numel() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// Dense double tensor handle with reverse-mode autodiff.
//
// Copying a Tensor aliases the underlying node (cheap, shared ownership).
// Every op records the subgraph needed for backward(); graphs are rebuilt on
// each forward pass, which is what the training loop wants since it descends
// three different losses per step. backward() visits the recorded subgraph
// exactly once in reverse topological order and accumulates into
// requires_grad leaves; accumulation is additive across backward() calls
// until zero_grad().
//
// Thread notes: tensor values are shareable read-only across threads. A graph
// being built or swept must stay on a single thread.
class Tensor {
 public:
  Tensor();  // empty tensor, 0 elements
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor from_data(std::vector<std::size_t> shape, std::vector<double> values);
  static Tensor from_vector(std::vector<double> values);  // rank-1
  static Tensor from_rows(const std::vector<std::vector<double>>& rows);  // rank-2
  static Tensor scalar(double value);

  const std::vector<std::size_t>& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->numel(); }
  std::size_t extent(std::size_t axis) const;

  double value() const;  // scalar tensors only
  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;  // rank-2
  std::span<const double> data() const { return node_->data; }
  std::vector<double> to_vector() const { return node_->data; }

  // In-place access to leaf values; used by the optimizer and by finite
  // difference probes. Mutating a non-leaf invalidates its recorded graph.
  std::span<double> mutable_data() { return node_->data; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool value);

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const;  // zero-filled on first access
  void zero_grad();

  // Same values as a fresh constant leaf; cuts the graph (gradient stop).
  Tensor detach() const;

  // Reverse-mode sweep from a scalar loss. Leaf gradients accumulate;
  // calling twice on the same loss doubles them.
  void backward();

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

// ---- elementwise and matrix ops -------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k]x[k,p] -> [m,p]

// Shapes must match, or one operand may be a 1-element tensor (scalar
// broadcast). Anything wider than scalar broadcast is out of scope.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& x);
Tensor square(const Tensor& x);
Tensor log(const Tensor& x);  // domain error on x <= 0
Tensor scale(const Tensor& x, double s);
Tensor add_scalar(const Tensor& x, double s);
Tensor rsub_scalar(double s, const Tensor& x);  // s - x

// Floor used by safe_log; last-resort guard for GAN losses.
inline constexpr double kLogFloor = 1e-12;
Tensor safe_log(const Tensor& x);  // log(max(x, kLogFloor))

// Activations. relu's subgradient at exactly 0 is defined as 0; gradient
// checks must probe away from that kink.
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// Numerically stable log(sigmoid(x)); the fused primitive the adversarial
// losses are built on. log(1 - sigmoid(x)) == log_sigmoid(-x).
Tensor log_sigmoid(const Tensor& x);

// ---- shape ops -------------------------------------------------------------

// Concatenate along `axis`. Rank-1 tensors concat along axis 0; rank-2 along
// axis 0 (stack rows) or 1 (side by side). Non-concat extents must agree.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis = 0);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len);
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);

// ---- reductions -------------------------------------------------------------

Tensor sum(const Tensor& x);   // -> scalar
Tensor mean(const Tensor& x);  // -> scalar
Tensor sum(const Tensor& x, std::size_t axis);   // rank-2 only
Tensor mean(const Tensor& x, std::size_t axis);  // rank-2 only

// Bias broadcast for dense layers: out[i,j] = x[i,j] + row[j].
Tensor add_rowvec(const Tensor& x, const Tensor& row);

// ---- verification -----------------------------------------------------------

// Max over coordinates of |autodiff - central difference| / max(1, |cd|).
// f must be deterministic and return a scalar; probe away from kinks.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double eps = 1e-5);

// Same check against every coordinate of a parameter set. loss_fn is re-run
// for each probe, so it must be a pure function of the parameter values.
double grad_check_params(const std::function<Tensor()>& loss_fn,
                         std::span<Tensor> params, double eps = 1e-5);

}  // namespace actgen
