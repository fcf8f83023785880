#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mforge/tensor.hpp"

namespace mforge {

// Handle into a Tape's node list.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode automatic differentiation over a replayable record of
// operations. Nodes are appended in execution order, so the record is
// topologically sorted by construction; backward() walks it in reverse.
// A tape is built per training sample and discarded afterwards.
class Tape {
 public:
  // Leaves. constant() never receives gradient; param() does.
  Var constant(Tensor value);
  Var param(Tensor value);

  // Elementwise
  Var relu(Var x);
  Var leaky_relu(Var x, double slope);
  Var tanh_act(Var x);
  Var sigmoid(Var x);
  Var exp_act(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double c);
  Var add_const(Var x, double c);

  // Reductions / shape
  Var sum(Var x);
  Var mean(Var x);
  Var reshape(Var x, std::vector<int> shape);
  Var concat_flat(Var a, Var b);  // rank-1 result

  // Structured image ops ((C,H,W) layout)
  Var conv2d(Var input, Var kernels, int stride, int padding);
  Var bias_channels(Var x, Var bias);
  Var maxpool2d(Var x, int window, int stride);
  Var dense(Var x, Var weights, Var bias);
  Var upsample2(Var x);
  Var squeeze2(Var x);
  Var unsqueeze2(Var x);
  std::pair<Var, Var> split_channels(Var x, int c_front);
  Var concat_channels(Var a, Var b);

  // Flow layers
  // y_c = exp(log_scale_c) * (x_c + bias_c); the log-determinant contribution
  // is H*W*sum(log_scale), built by callers from sum() + scale().
  Var actnorm(Var x, Var log_scale, Var bias);
  // Per-pixel channel mixing y[:,p] = W x[:,p] for square W (C x C).
  Var channel_mix(Var x, Var w);
  // Scalar log|det W|; rejects near-singular W (|det| < 1e-12).
  Var log_abs_det(Var w);

  // Losses (scalar outputs)
  Var softmax_cross_entropy(Var logits, const Tensor& onehot);
  Var mse_loss(Var pred, const Tensor& target);
  Var l1_loss(Var pred, const Tensor& target);
  Var bce_with_logits(Var logits, const Tensor& target);

  const Tensor& value(Var v) const;
  // Valid after backward(); zero for parameters the loss does not reach.
  const Tensor& grad(Var v) const;

  // Reverse sweep from a scalar loss node. Every param() node reachable from
  // the loss receives its gradient; unreachable ones keep zeros.
  void backward(Var loss);

  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Tape&, int)> backprop;  // empty for leaves
  };

  Var emit(Tensor value, bool needs_grad, std::function<void(Tape&, int)> backprop);
  Tensor& g(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  const Tensor& v(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool wants(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  void check(Var x) const;

  std::vector<Node> nodes_;
};

}  // namespace mforge
