#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgm/tensor.hpp"

namespace bgm::nn {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Pad { same, valid };

/// Reverse-mode autodiff over a linear record of tensor operations. Node ids
/// are creation-ordered, so creation order is a topological order and the
/// backward pass is a single reverse sweep.
class Tape {
 public:
  using Id = int32_t;

  /// Constant input; no gradient is tracked through it.
  Id leaf(Tensor value);
  /// Differentiable leaf owned by the tape (finite-difference checks, tests).
  Id var(Tensor value);
  /// Differentiable leaf bound to external parameter storage (not copied;
  /// must outlive the tape).
  Id param(const Tensor* bound);

  Id add(Id a, Id b);
  Id mul(Id a, Id b);  // elementwise; either side may be a scalar
  Id scalar_mul(Id a, double c);
  Id matmul(Id a, Id b);  // [m,k]x[k,n] -> [m,n] or [m,k]x[k] -> [m]
  Id tanh(Id a);
  Id sigmoid(Id a);
  Id relu(Id a);
  Id concat(Id a, Id b);            // rank-1 only
  Id slice(Id a, int start, int len);  // rank-1 only
  Id flatten(Id a);
  Id conv2d(Id x, Id w, Id b, Pad pad = Pad::same);  // x[Ci,H,W] w[Co,Ci,kh,kw] b[Co]
  Id avg_pool2(Id x);                                // 2x2, stride 2
  Id sum(Id a);
  Id sum_of_squares(Id a);
  Id sqrt(Id a);

  const Tensor& value(Id id) const;
  bool requires_grad(Id id) const { return nodes_[id].requires_grad; }
  size_t node_count() const { return nodes_.size(); }

  /// Accumulates d(loss)/d{node} for every differentiable node. Loss must be
  /// scalar. Unreached differentiable leaves end with an all-zero gradient.
  void backward(Id loss);
  const Tensor& grad(Id id) const;
  Tensor take_grad(Id id);  // moves the gradient out (post-backward)

 private:
  struct Node {
    Tensor val;
    const Tensor* ext = nullptr;  // set for param leaves
    bool requires_grad = false;
    Tensor grad;
    std::function<void(Tape&)> back;
  };

  Id push(Tensor val, bool requires_grad, std::function<void(Tape&)> back);
  Tensor& grad_buf(Id id);
  [[noreturn]] static void shape_fail(const std::string& op, const Tensor& a, const Tensor& b);

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace bgm::nn
