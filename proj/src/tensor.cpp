#include "actgen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace actgen {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

[[noreturn]] void throw_shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              shape_str(a.shape()) + " and " + shape_str(b.shape()));
}

#ifndef NDEBUG
void debug_check_finite(const char* op, const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::logic_error(std::string(op) + ": non-finite value in forward result");
    }
  }
}
#else
void debug_check_finite(const char*, const std::vector<double>&) {}
#endif

NodePtr make_node(std::vector<std::size_t> shape, std::vector<double> data) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  return n;
}

// Wires parent links and the backprop closure iff some input needs a
// gradient; otherwise the result stays a constant leaf and the graph is
// pruned at this point.
Tensor finish_op(const char* op, NodePtr out, std::vector<NodePtr> inputs,
                 std::function<void()> backprop) {
  debug_check_finite(op, out->data);
  bool needs = false;
  for (const auto& p : inputs) needs = needs || p->requires_grad;
  if (needs) {
    out->requires_grad = true;
    out->parents = std::move(inputs);
    out->backprop = std::move(backprop);
  }
  return Tensor(std::move(out));
}

}  // namespace

// ---- construction -----------------------------------------------------------

Tensor::Tensor() : node_(make_node({0}, {})) {}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_numel(shape);
  return Tensor(make_node(std::move(shape), std::vector<double>(n, 0.0)));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  std::size_t n = shape_numel(shape);
  return Tensor(make_node(std::move(shape), std::vector<double>(n, value)));
}

Tensor Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("Tensor::from_data: " + shape_str(shape) + " needs " +
                                std::to_string(shape_numel(shape)) + " values, got " +
                                std::to_string(values.size()));
  }
  return Tensor(make_node(std::move(shape), std::move(values)));
}

Tensor Tensor::from_vector(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor(make_node({n}, std::move(values)));
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("Tensor::from_rows: no rows");
  const std::size_t cols = rows[0].size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw std::invalid_argument("Tensor::from_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor(make_node({rows.size(), cols}, std::move(data)));
}

Tensor Tensor::scalar(double value) { return Tensor(make_node({1}, {value})); }

// ---- accessors --------------------------------------------------------------

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= rank()) throw std::invalid_argument("Tensor::extent: axis out of range");
  return node_->shape[axis];
}

double Tensor::value() const {
  if (numel() != 1) {
    throw std::invalid_argument("Tensor::value: tensor has " + std::to_string(numel()) +
                                " elements, expected 1");
  }
  return node_->data[0];
}

double Tensor::at(std::size_t i) const { return node_->data.at(i); }

double Tensor::at(std::size_t i, std::size_t j) const {
  if (rank() != 2) throw std::invalid_argument("Tensor::at(i,j): tensor is not rank-2");
  return node_->data.at(i * node_->shape[1] + j);
}

Tensor& Tensor::set_requires_grad(bool value) {
  node_->requires_grad = value;
  return *this;
}

std::span<const double> Tensor::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

Tensor Tensor::detach() const {
  return Tensor(make_node(node_->shape, node_->data));
}

// ---- backward ----------------------------------------------------------------

void Tensor::backward() {
  if (numel() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                shape_str(shape()));
  }
  // Iterative post-order DFS; `order` lists inputs before consumers.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> pushed;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  pushed.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, idx] = stack.back();
    if (idx < n->parents.size()) {
      TensorNode* p = n->parents[idx++].get();
      if (pushed.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  // Interior gradients are per-sweep scratch; leaf gradients accumulate
  // across sweeps until zero_grad().
  for (TensorNode* n : order) {
    if (!n->is_leaf()) n->grad.assign(n->data.size(), 0.0);
  }
  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop();
  }
}

// ---- binary elementwise -------------------------------------------------------

namespace {

enum class Broadcast { kNone, kLeftScalar, kRightScalar };

Broadcast classify_broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Broadcast::kNone;
  if (a.numel() == 1) return Broadcast::kLeftScalar;
  if (b.numel() == 1) return Broadcast::kRightScalar;
  throw_shape_error(op, a, b);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const Broadcast bc = classify_broadcast("add", a, b);
  const std::size_t n = std::max(a.numel(), b.numel());
  std::vector<double> out(n);
  const auto& av = a.node()->data;
  const auto& bv = b.node()->data;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (bc == Broadcast::kLeftScalar ? av[0] : av[i]) +
             (bc == Broadcast::kRightScalar ? bv[0] : bv[i]);
  }
  auto node = make_node(bc == Broadcast::kLeftScalar ? b.shape() : a.shape(), std::move(out));
  NodePtr pa = a.node(), pb = b.node();
  TensorNode* self = node.get();
  return finish_op("add", std::move(node), {pa, pb}, [self, pa, pb, bc] {
    const auto& g = self->grad;
    if (pa->requires_grad) {
      pa->ensure_grad();
      if (bc == Broadcast::kLeftScalar) {
        for (double gi : g) pa->grad[0] += gi;
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) pa->grad[i] += g[i];
      }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      if (bc == Broadcast::kRightScalar) {
        for (double gi : g) pb->grad[0] += gi;
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) pb->grad[i] += g[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const Broadcast bc = classify_broadcast("sub", a, b);
  const std::size_t n = std::max(a.numel(), b.numel());
  std::vector<double> out(n);
  const auto& av = a.node()->data;
  const auto& bv = b.node()->data;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (bc == Broadcast::kLeftScalar ? av[0] : av[i]) -
             (bc == Broadcast::kRightScalar ? bv[0] : bv[i]);
  }
  auto node = make_node(bc == Broadcast::kLeftScalar ? b.shape() : a.shape(), std::move(out));
  NodePtr pa = a.node(), pb = b.node();
  TensorNode* self = node.get();
  return finish_op("sub", std::move(node), {pa, pb}, [self, pa, pb, bc] {
    const auto& g = self->grad;
    if (pa->requires_grad) {
      pa->ensure_grad();
      if (bc == Broadcast::kLeftScalar) {
        for (double gi : g) pa->grad[0] += gi;
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) pa->grad[i] += g[i];
      }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      if (bc == Broadcast::kRightScalar) {
        for (double gi : g) pb->grad[0] -= gi;
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) pb->grad[i] -= g[i];
      }
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Broadcast bc = classify_broadcast("mul", a, b);
  const std::size_t n = std::max(a.numel(), b.numel());
  std::vector<double> out(n);
  const auto& av = a.node()->data;
  const auto& bv = b.node()->data;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (bc == Broadcast::kLeftScalar ? av[0] : av[i]) *
             (bc == Broadcast::kRightScalar ? bv[0] : bv[i]);
  }
  auto node = make_node(bc == Broadcast::kLeftScalar ? b.shape() : a.shape(), std::move(out));
  NodePtr pa = a.node(), pb = b.node();
  TensorNode* self = node.get();
  return finish_op("mul", std::move(node), {pa, pb}, [self, pa, pb, bc] {
    const auto& g = self->grad;
    const auto& av = pa->data;
    const auto& bv = pb->data;
    if (pa->requires_grad) {
      pa->ensure_grad();
      if (bc == Broadcast::kLeftScalar) {
        for (std::size_t i = 0; i < g.size(); ++i) pa->grad[0] += g[i] * bv[i];
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) {
          pa->grad[i] += g[i] * (bc == Broadcast::kRightScalar ? bv[0] : bv[i]);
        }
      }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      if (bc == Broadcast::kRightScalar) {
        for (std::size_t i = 0; i < g.size(); ++i) pb->grad[0] += g[i] * av[i];
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) {
          pb->grad[i] += g[i] * (bc == Broadcast::kLeftScalar ? av[0] : av[i]);
        }
      }
    }
  });
}

// ---- unary elementwise ---------------------------------------------------------

namespace {

// y = f(x); backward uses dy/dx computed from saved x and y values. The
// functors are template parameters so the per-element calls inline.
template <typename Fwd, typename Dfdx>
Tensor unary_op(const char* name, const Tensor& x, Fwd fwd, Dfdx dfdx /* (x, y) */) {
  const auto& xv = x.node()->data;
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  auto node = make_node(x.shape(), std::move(out));
  NodePtr px = x.node();
  TensorNode* self = node.get();
  return finish_op(name, std::move(node), {px}, [self, px, dfdx] {
    if (!px->requires_grad) return;
    px->ensure_grad();
    const auto& g = self->grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      px->grad[i] += g[i] * dfdx(px->data[i], self->data[i]);
    }
  });
}

}  // namespace

Tensor neg(const Tensor& x) {
  return unary_op("neg", x, [](double v) { return -v; },
                  [](double, double) { return -1.0; });
}

Tensor square(const Tensor& x) {
  return unary_op("square", x, [](double v) { return v * v; },
                  [](double v, double) { return 2.0 * v; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (v <= 0.0) {
      throw std::domain_error("log: input must be strictly positive, got " +
                              std::to_string(v));
    }
  }
  return unary_op("log", x, [](double v) { return std::log(v); },
                  [](double v, double) { return 1.0 / v; });
}

Tensor safe_log(const Tensor& x) {
  // Clamped below at kLogFloor; the clamped region gets zero gradient.
  return unary_op("safe_log", x,
                  [](double v) { return std::log(v < kLogFloor ? kLogFloor : v); },
                  [](double v, double) { return v < kLogFloor ? 0.0 : 1.0 / v; });
}

Tensor scale(const Tensor& x, double s) {
  return unary_op("scale", x, [s](double v) { return s * v; },
                  [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& x, double s) {
  return unary_op("add_scalar", x, [s](double v) { return v + s; },
                  [](double, double) { return 1.0; });
}

Tensor rsub_scalar(double s, const Tensor& x) {
  return unary_op("rsub_scalar", x, [s](double v) { return s - v; },
                  [](double, double) { return -1.0; });
}

Tensor relu(const Tensor& x) {
  return unary_op("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
                  [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary_op("tanh", x, [](double v) { return std::tanh(v); },
                  [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op("sigmoid", x,
                  [](double v) {
                    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                    : std::exp(v) / (1.0 + std::exp(v));
                  },
                  [](double, double y) { return y * (1.0 - y); });
}

Tensor log_sigmoid(const Tensor& x) {
  return unary_op("log_sigmoid", x,
                  [](double v) {
                    return v >= 0.0 ? -std::log1p(std::exp(-v))
                                    : v - std::log1p(std::exp(v));
                  },
                  [](double v, double) {
                    // d/dx log(sigmoid(x)) = sigmoid(-x)
                    return v >= 0.0 ? std::exp(-v) / (1.0 + std::exp(-v))
                                    : 1.0 / (1.0 + std::exp(v));
                  });
}

// ---- matmul ---------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
    throw_shape_error("matmul", a, b);
  }
  const std::size_t m = a.extent(0), k = a.extent(1), p = b.extent(1);
  std::vector<double> out(m * p, 0.0);
  const double* av = a.node()->data.data();
  const double* bv = b.node()->data.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * p;
    const double* arow = av + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double aval = arow[l];
      const double* brow = bv + l * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aval * brow[j];
    }
  }
  auto node = make_node({m, p}, std::move(out));
  NodePtr pa = a.node(), pb = b.node();
  TensorNode* self = node.get();
  return finish_op("matmul", std::move(node), {pa, pb}, [self, pa, pb, m, k, p] {
    const double* g = self->grad.data();
    if (pa->requires_grad) {
      pa->ensure_grad();
      // dA = G . B^T : dA[i,l] += sum_j G[i,j] * B[l,j]
      // four accumulators so the dot product vectorizes under strict FP
      const double* bv = pb->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * p;
        double* darow = pa->grad.data() + i * k;
        for (std::size_t l = 0; l < k; ++l) {
          const double* brow = bv + l * p;
          double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
          std::size_t j = 0;
          for (; j + 4 <= p; j += 4) {
            a0 += grow[j] * brow[j];
            a1 += grow[j + 1] * brow[j + 1];
            a2 += grow[j + 2] * brow[j + 2];
            a3 += grow[j + 3] * brow[j + 3];
          }
          double acc = (a0 + a1) + (a2 + a3);
          for (; j < p; ++j) acc += grow[j] * brow[j];
          darow[l] += acc;
        }
      }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      // dB = A^T . G : dB[l,j] += sum_i A[i,l] * G[i,j]
      const double* av = pa->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * p;
        const double* arow = av + i * k;
        for (std::size_t l = 0; l < k; ++l) {
          const double aval = arow[l];
          double* dbrow = pb->grad.data() + l * p;
          for (std::size_t j = 0; j < p; ++j) dbrow[j] += aval * grow[j];
        }
      }
    }
  });
}

// ---- shape ops -------------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no parts");
  const std::size_t rank = parts[0].rank();
  if (rank == 0 || rank > 2 || axis >= rank) {
    throw std::invalid_argument("concat: only rank-1/rank-2 tensors, axis within rank");
  }
  for (const auto& p : parts) {
    if (p.rank() != rank) throw_shape_error("concat", parts[0], p);
    for (std::size_t d = 0; d < rank; ++d) {
      if (d != axis && p.extent(d) != parts[0].extent(d)) {
        throw_shape_error("concat", parts[0], p);
      }
    }
  }

  std::vector<std::size_t> out_shape = parts[0].shape();
  out_shape[axis] = 0;
  for (const auto& p : parts) out_shape[axis] += p.extent(axis);

  std::vector<double> out;
  out.reserve(shape_numel(out_shape));
  if (rank == 1 || axis == 0) {
    // contiguous blocks in order
    for (const auto& p : parts) {
      out.insert(out.end(), p.node()->data.begin(), p.node()->data.end());
    }
  } else {
    const std::size_t rows = out_shape[0];
    out.resize(shape_numel(out_shape));
    const std::size_t out_cols = out_shape[1];
    for (std::size_t i = 0; i < rows; ++i) {
      std::size_t off = 0;
      for (const auto& p : parts) {
        const std::size_t w = p.extent(1);
        const double* src = p.node()->data.data() + i * w;
        std::copy(src, src + w, out.data() + i * out_cols + off);
        off += w;
      }
    }
  }

  auto node = make_node(out_shape, std::move(out));
  std::vector<NodePtr> inputs;
  inputs.reserve(parts.size());
  for (const auto& p : parts) inputs.push_back(p.node());
  TensorNode* self = node.get();
  const std::size_t out_cols = out_shape.size() == 2 ? out_shape[1] : 0;
  auto parents = inputs;
  return finish_op("concat", std::move(node), std::move(inputs),
                   [self, parents, rank, axis, out_cols] {
    const auto& g = self->grad;
    if (rank == 1 || axis == 0) {
      std::size_t off = 0;
      for (const auto& p : parents) {
        const std::size_t len = p->data.size();
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < len; ++i) p->grad[i] += g[off + i];
        }
        off += len;
      }
    } else {
      const std::size_t rows = self->shape[0];
      std::size_t off = 0;
      for (const auto& p : parents) {
        const std::size_t w = p->shape[1];
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < rows; ++i) {
            const double* gr = g.data() + i * out_cols + off;
            double* dst = p->grad.data() + i * w;
            for (std::size_t j = 0; j < w; ++j) dst[j] += gr[j];
          }
        }
        off += w;
      }
    }
  });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len) {
  const std::size_t rank = x.rank();
  if (rank == 0 || rank > 2 || axis >= rank) {
    throw std::invalid_argument("slice: only rank-1/rank-2 tensors, axis within rank");
  }
  if (start + len > x.extent(axis)) {
    throw std::invalid_argument("slice: range [" + std::to_string(start) + ", " +
                                std::to_string(start + len) + ") exceeds extent " +
                                std::to_string(x.extent(axis)));
  }
  std::vector<std::size_t> out_shape = x.shape();
  out_shape[axis] = len;
  std::vector<double> out(shape_numel(out_shape));
  const auto& xv = x.node()->data;
  if (rank == 1) {
    std::copy(xv.begin() + static_cast<std::ptrdiff_t>(start),
              xv.begin() + static_cast<std::ptrdiff_t>(start + len), out.begin());
  } else if (axis == 0) {
    const std::size_t cols = x.extent(1);
    std::copy(xv.begin() + static_cast<std::ptrdiff_t>(start * cols),
              xv.begin() + static_cast<std::ptrdiff_t>((start + len) * cols), out.begin());
  } else {
    const std::size_t rows = x.extent(0), cols = x.extent(1);
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy(xv.begin() + static_cast<std::ptrdiff_t>(i * cols + start),
                xv.begin() + static_cast<std::ptrdiff_t>(i * cols + start + len),
                out.begin() + static_cast<std::ptrdiff_t>(i * len));
    }
  }
  auto node = make_node(out_shape, std::move(out));
  NodePtr px = x.node();
  TensorNode* self = node.get();
  return finish_op("slice", std::move(node), {px}, [self, px, rank, axis, start, len] {
    if (!px->requires_grad) return;
    px->ensure_grad();
    const auto& g = self->grad;
    if (rank == 1) {
      for (std::size_t i = 0; i < len; ++i) px->grad[start + i] += g[i];
    } else if (axis == 0) {
      const std::size_t cols = px->shape[1];
      for (std::size_t i = 0; i < len * cols; ++i) px->grad[start * cols + i] += g[i];
    } else {
      const std::size_t rows = px->shape[0], cols = px->shape[1];
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < len; ++j) {
          px->grad[i * cols + start + j] += g[i * len + j];
        }
      }
    }
  });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  if (shape_numel(shape) != x.numel()) {
    throw std::invalid_argument("reshape: " + shape_str(x.shape()) + " has " +
                                std::to_string(x.numel()) + " elements, target " +
                                shape_str(shape) + " needs " +
                                std::to_string(shape_numel(shape)));
  }
  auto node = make_node(std::move(shape), x.node()->data);
  NodePtr px = x.node();
  TensorNode* self = node.get();
  return finish_op("reshape", std::move(node), {px}, [self, px] {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (std::size_t i = 0; i < self->grad.size(); ++i) px->grad[i] += self->grad[i];
  });
}

// ---- reductions --------------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  auto node = make_node({1}, {acc});
  NodePtr px = x.node();
  TensorNode* self = node.get();
  return finish_op("sum", std::move(node), {px}, [self, px] {
    if (!px->requires_grad) return;
    px->ensure_grad();
    const double g = self->grad[0];
    for (double& d : px->grad) d += g;
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

namespace {

Tensor reduce_axis(const char* name, const Tensor& x, std::size_t axis, bool take_mean) {
  if (x.rank() != 2) throw std::invalid_argument(std::string(name) + ": rank-2 only");
  if (axis > 1) throw std::invalid_argument(std::string(name) + ": axis out of range");
  const std::size_t rows = x.extent(0), cols = x.extent(1);
  const auto& xv = x.node()->data;
  std::vector<double> out;
  if (axis == 0) {
    out.assign(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) out[j] += xv[i * cols + j];
    }
  } else {
    out.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) out[i] += xv[i * cols + j];
    }
  }
  const double denom = take_mean ? static_cast<double>(axis == 0 ? rows : cols) : 1.0;
  if (take_mean) {
    for (double& v : out) v /= denom;
  }
  auto node = make_node({out.size()}, std::move(out));
  NodePtr px = x.node();
  TensorNode* self = node.get();
  return finish_op(name, std::move(node), {px}, [self, px, axis, rows, cols, denom] {
    if (!px->requires_grad) return;
    px->ensure_grad();
    const auto& g = self->grad;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        px->grad[i * cols + j] += g[axis == 0 ? j : i] / denom;
      }
    }
  });
}

}  // namespace

Tensor sum(const Tensor& x, std::size_t axis) { return reduce_axis("sum", x, axis, false); }
Tensor mean(const Tensor& x, std::size_t axis) { return reduce_axis("mean", x, axis, true); }

Tensor add_rowvec(const Tensor& x, const Tensor& row) {
  if (x.rank() != 2 || row.rank() != 1 || row.extent(0) != x.extent(1)) {
    throw_shape_error("add_rowvec", x, row);
  }
  const std::size_t rows = x.extent(0), cols = x.extent(1);
  std::vector<double> out(rows * cols);
  const auto& xv = x.node()->data;
  const auto& rv = row.node()->data;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = xv[i * cols + j] + rv[j];
  }
  auto node = make_node({rows, cols}, std::move(out));
  NodePtr px = x.node(), pr = row.node();
  TensorNode* self = node.get();
  return finish_op("add_rowvec", std::move(node), {px, pr}, [self, px, pr, rows, cols] {
    const auto& g = self->grad;
    if (px->requires_grad) {
      px->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) px->grad[i] += g[i];
    }
    if (pr->requires_grad) {
      pr->ensure_grad();
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) pr->grad[j] += g[i * cols + j];
      }
    }
  });
}

// ---- verification --------------------------------------------------------------------

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double eps) {
  Tensor probe = x.detach().set_requires_grad(true);
  Tensor y = f(probe);
  if (y.numel() != 1) throw std::invalid_argument("grad_check: f must return a scalar");
  y.backward();
  const std::vector<double> analytic(probe.grad().begin(), probe.grad().end());

  double max_rel = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    Tensor plus = x.detach();
    plus.mutable_data()[i] += eps;
    Tensor minus = x.detach();
    minus.mutable_data()[i] -= eps;
    const double fd = (f(plus).value() - f(minus).value()) / (2.0 * eps);
    const double rel = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(fd));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

double grad_check_params(const std::function<Tensor()>& loss_fn,
                         std::span<Tensor> params, double eps) {
  for (auto& p : params) p.zero_grad();
  Tensor loss = loss_fn();
  if (loss.numel() != 1) {
    throw std::invalid_argument("grad_check_params: loss must be scalar");
  }
  loss.backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto data = params[pi].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + eps;
      const double lp = loss_fn().value();
      data[i] = orig - eps;
      const double lm = loss_fn().value();
      data[i] = orig;
      const double fd = (lp - lm) / (2.0 * eps);
      const double rel = std::abs(analytic[pi][i] - fd) / std::max(1.0, std::abs(fd));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace actgen
