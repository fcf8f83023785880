#pragma once

#include <string>
#include <vector>

#include "mforge/tensor.hpp"

namespace mforge {

struct NamedParam {
  std::string name;
  Tensor* tensor = nullptr;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Standard Adam with bias correction. One state pair (m, v) per parameter,
// step counter shared. Deterministic: no randomness, fixed update order.
class AdamOptimizer {
 public:
  AdamOptimizer(AdamConfig cfg, const std::vector<NamedParam>& params);

  // grads must align with the params passed at construction (same order and
  // shapes). Throws NumericError naming the parameter on non-finite gradients.
  void step(const std::vector<NamedParam>& params, const std::vector<Tensor>& grads);

  int step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  int t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace mforge
