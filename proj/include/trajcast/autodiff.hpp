#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "trajcast/tensor.hpp"

namespace trajcast {

namespace detail {

struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  bool backward_done = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Accumulates into the parents' grads. The node's own grad is valid when called.
  std::function<void(Node&)> backprop;

  Tensor& grad_buf() {
    if (grad.data.empty()) grad = Tensor::zeros(value.shape);
    return grad;
  }
};

}  // namespace detail

/// Handle to a tensor participating in reverse-mode differentiation.
/// Copies are shallow; the underlying node is shared.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false)
      : node_(std::make_shared<detail::Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& value_mut() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad() {
    if (node_ && !node_->grad.data.empty())
      std::fill(node_->grad.data.begin(), node_->grad.data.end(), 0.0);
  }

  const std::vector<int64_t>& shape() const { return node_->value.shape; }
  int64_t rows() const { return node_->value.rows(); }
  int64_t cols() const { return node_->value.cols(); }

  std::shared_ptr<detail::Node> node() const { return node_; }

  static Var from_node(std::shared_ptr<detail::Node> n) {
    Var v;
    v.node_ = std::move(n);
    return v;
  }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Runs reverse accumulation from a scalar loss. Errors if the loss is not
/// scalar or if called a second time on the same graph root.
void backward(const Var& loss);

Var constant(Tensor t);
Var constant_row(std::vector<double> v);

// Elementwise / structural ops. Shape mismatches throw with both shapes named.
Var add(const Var& a, const Var& b);            // same shape, or b a [1,n] row broadcast over a's rows
Var sub(const Var& a, const Var& b);            // same shape
Var mul(const Var& a, const Var& b);            // same shape, or b scalar [1]
Var div(const Var& a, const Var& b);            // same shape, or b scalar [1]
Var scale(const Var& a, double c);
Var neg(const Var& a);
Var matmul(const Var& a, const Var& b);         // [m,k] x [k,n]
Var transpose(const Var& a);                    // 2-d
Var concat_rows(const std::vector<Var>& xs);    // along axis 0
Var concat_cols(const std::vector<Var>& xs);    // along axis 1
Var slice_rows(const Var& a, int64_t from, int64_t to);
Var slice_cols(const Var& a, int64_t from, int64_t to);
Var reshape(const Var& a, std::vector<int64_t> shape);
Var sum(const Var& a);                          // -> [1]
Var mean(const Var& a);                         // -> [1]
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh_v(const Var& a);
Var exp_v(const Var& a);
Var log_v(const Var& a);
Var abs_v(const Var& a);

/// Row-wise softmax over the last axis of a 2-d tensor with an additive mask
/// applied before normalization. A fully masked row yields all zeros.
Var softmax_rows(const Var& a, const Tensor& mask);
Var softmax_rows(const Var& a);

/// Row-wise layer normalization with learned gain and bias (shape [1,n]).
Var layer_norm(const Var& a, const Var& gain, const Var& bias);

}  // namespace trajcast
