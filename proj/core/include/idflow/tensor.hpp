#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "idflow/error.hpp"
#include "idflow/rng.hpp"

namespace idflow {

namespace detail {
// Graph recording is on by default; wrap inference in NoGradGuard to skip it.
inline thread_local bool grad_mode_enabled = true;
}  // namespace detail

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(detail::grad_mode_enabled) { detail::grad_mode_enabled = false; }
  ~NoGradGuard() { detail::grad_mode_enabled = prev; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

inline bool grad_enabled() { return detail::grad_mode_enabled; }

inline int64_t shape_numel(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

/// N-dimensional array of T with optional reverse-mode gradient tracking.
/// Value-semantic handle; copies share the underlying node.
template <typename T>
class TensorT {
 public:
  struct Node {
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;  // sized lazily; same length as value when present
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // reads this node's grad, accumulates into parents

    int64_t numel() const { return static_cast<int64_t>(value.size()); }
    void ensure_grad() {
      if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    }
  };
  using NodePtr = std::shared_ptr<Node>;

  TensorT() = default;
  explicit TensorT(NodePtr n) : n_(std::move(n)) {}

  static TensorT zeros(std::vector<int> shape, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value.assign(static_cast<size_t>(shape_numel(n->shape)), T(0));
    n->requires_grad = requires_grad;
    return TensorT(std::move(n));
  }

  static TensorT full(std::vector<int> shape, T fill, bool requires_grad = false) {
    TensorT t = zeros(std::move(shape), requires_grad);
    for (T& v : t.values()) v = fill;
    return t;
  }

  static TensorT from_vector(std::vector<int> shape, std::vector<T> data,
                             bool requires_grad = false) {
    if (static_cast<int64_t>(data.size()) != shape_numel(shape))
      throw Error(ErrorKind::Shape, "tensor data size does not match shape");
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    return TensorT(std::move(n));
  }

  static TensorT scalar(T v, bool requires_grad = false) {
    return from_vector({1}, {v}, requires_grad);
  }

  bool defined() const { return n_ != nullptr; }
  const std::vector<int>& shape() const { return n_->shape; }
  int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(n_->shape.size()); }
  int64_t numel() const { return n_->numel(); }
  bool requires_grad() const { return n_ && n_->requires_grad; }

  std::vector<T>& values() { return n_->value; }
  const std::vector<T>& values() const { return n_->value; }
  std::vector<T>& grad() {
    n_->ensure_grad();
    return n_->grad;
  }
  const std::vector<T>& grad() const { return n_->grad; }
  bool has_grad() const { return n_ && n_->grad.size() == n_->value.size(); }

  T item() const {
    if (numel() != 1) throw Error(ErrorKind::Shape, "item() on a non-scalar tensor");
    return n_->value[0];
  }

  NodePtr node() const { return n_; }

  /// Copy of the values with no graph attachment.
  TensorT detach() const { return from_vector(n_->shape, n_->value, false); }

  void set_requires_grad(bool rg) { n_->requires_grad = rg; }

  void zero_grad() {
    if (n_->grad.size() == n_->value.size())
      std::fill(n_->grad.begin(), n_->grad.end(), T(0));
    else
      n_->grad.assign(n_->value.size(), T(0));
  }

  /// Reverse-mode sweep from this scalar.
  void backward() {
    if (numel() != 1) throw Error(ErrorKind::Contract, "backward() requires a scalar tensor");
    if (!n_->requires_grad)
      throw Error(ErrorKind::Contract, "backward() on a tensor with no gradient path");

    // Post-order on the parent DAG gives a reverse topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(n_.get(), 0);
    seen.insert(n_.get());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        Node* parent = node->parents[next++].get();
        if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }

    n_->ensure_grad();
    n_->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* node = *it;
      if (node->backprop && node->grad.size() == node->value.size()) node->backprop(*node);
    }
  }

 private:
  NodePtr n_;
};

namespace detail {

/// Builds the result node of an op: tracks gradients only when grad mode is
/// on and at least one input requires them.
template <typename T>
TensorT<T> make_op_node(std::vector<int> shape, std::vector<T> value,
                        std::vector<typename TensorT<T>::NodePtr> parents,
                        std::function<void(typename TensorT<T>::Node&)> backprop) {
  auto n = std::make_shared<typename TensorT<T>::Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  bool track = grad_mode_enabled;
  if (track) {
    bool any = false;
    for (const auto& p : parents) any = any || (p && p->requires_grad);
    track = any;
  }
  if (track) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return TensorT<T>(std::move(n));
}

template <typename T>
void check_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw Error(ErrorKind::Shape, std::string(op) + ": operand shapes differ");
}

}  // namespace detail

// ---- elementwise ----

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  detail::check_same_shape(a, b, "add");
  std::vector<T> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  auto an = a.node();
  auto bn = b.node();
  return detail::make_op_node<T>(
      a.shape(), std::move(out), {an, bn}, [an, bn](typename TensorT<T>::Node& self) {
        if (an->requires_grad) {
          an->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i];
        }
      });
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  detail::check_same_shape(a, b, "sub");
  std::vector<T> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  auto an = a.node();
  auto bn = b.node();
  return detail::make_op_node<T>(
      a.shape(), std::move(out), {an, bn}, [an, bn](typename TensorT<T>::Node& self) {
        if (an->requires_grad) {
          an->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
        }
      });
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  detail::check_same_shape(a, b, "mul");
  std::vector<T> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  auto an = a.node();
  auto bn = b.node();
  return detail::make_op_node<T>(
      a.shape(), std::move(out), {an, bn}, [an, bn](typename TensorT<T>::Node& self) {
        if (an->requires_grad) {
          an->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i] * an->value[i];
        }
      });
}

/// alpha * a + beta, elementwise.
template <typename T>
TensorT<T> affine(const TensorT<T>& a, T alpha, T beta) {
  std::vector<T> out(a.values());
  for (T& v : out) v = alpha * v + beta;
  auto an = a.node();
  return detail::make_op_node<T>(
      a.shape(), std::move(out), {an}, [an, alpha](typename TensorT<T>::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += alpha * self.grad[i];
      });
}

template <typename T>
TensorT<T> relu(const TensorT<T>& a) {
  std::vector<T> out(a.values());
  for (T& v : out)
    if (v < T(0)) v = T(0);
  auto an = a.node();
  return detail::make_op_node<T>(
      a.shape(), std::move(out), {an}, [an](typename TensorT<T>::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
          if (an->value[i] > T(0)) an->grad[i] += self.grad[i];
      });
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& a) {
  std::vector<T> out(a.values());
  for (T& v : out) v = T(1) / (T(1) + std::exp(-v));
  auto an = a.node();
  return detail::make_op_node<T>(
      a.shape(), std::move(out), {an}, [an](typename TensorT<T>::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
          const T y = self.value[i];
          an->grad[i] += self.grad[i] * y * (T(1) - y);
        }
      });
}

template <typename T>
TensorT<T> tanh_op(const TensorT<T>& a) {
  std::vector<T> out(a.values());
  for (T& v : out) v = std::tanh(v);
  auto an = a.node();
  return detail::make_op_node<T>(
      a.shape(), std::move(out), {an}, [an](typename TensorT<T>::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
          const T y = self.value[i];
          an->grad[i] += self.grad[i] * (T(1) - y * y);
        }
      });
}

template <typename T>
TensorT<T> sum_all(const TensorT<T>& a) {
  T s = T(0);
  for (T v : a.values()) s += v;
  auto an = a.node();
  return detail::make_op_node<T>(
      {1}, {s}, {an}, [an](typename TensorT<T>::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        const T g = self.grad[0];
        for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
      });
}

// ---- channel-dimension structure ops (tensors are C x H x W) ----

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.rank() != 3 || b.rank() != 3 || a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
    throw Error(ErrorKind::Shape, "concat_channels: spatial shapes differ");
  std::vector<T> out;
  out.reserve(a.values().size() + b.values().size());
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  auto an = a.node();
  auto bn = b.node();
  const size_t na = a.values().size();
  return detail::make_op_node<T>(
      {a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, std::move(out), {an, bn},
      [an, bn, na](typename TensorT<T>::Node& self) {
        if (an->requires_grad) {
          an->ensure_grad();
          for (size_t i = 0; i < na; ++i) an->grad[i] += self.grad[i];
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          for (size_t i = na; i < self.grad.size(); ++i) bn->grad[i - na] += self.grad[i];
        }
      });
}

/// Channels [c0, c1) as a new tensor.
template <typename T>
TensorT<T> slice_channels(const TensorT<T>& a, int c0, int c1) {
  if (a.rank() != 3 || c0 < 0 || c1 > a.dim(0) || c0 >= c1)
    throw Error(ErrorKind::Shape, "slice_channels: bad channel range");
  const size_t plane = static_cast<size_t>(a.dim(1)) * a.dim(2);
  std::vector<T> out(a.values().begin() + c0 * plane, a.values().begin() + c1 * plane);
  auto an = a.node();
  const size_t off = c0 * plane;
  return detail::make_op_node<T>(
      {c1 - c0, a.dim(1), a.dim(2)}, std::move(out), {an},
      [an, off](typename TensorT<T>::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) an->grad[off + i] += self.grad[i];
      });
}

using Tensor = TensorT<float>;

}  // namespace idflow
