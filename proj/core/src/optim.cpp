#include "mforge/optim.hpp"

#include <cmath>

#include "mforge/errors.hpp"

namespace mforge {

AdamOptimizer::AdamOptimizer(AdamConfig cfg, const std::vector<NamedParam>& params) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.tensor->shape());
    v_.emplace_back(p.tensor->shape());
  }
}

void AdamOptimizer::step(const std::vector<NamedParam>& params, const std::vector<Tensor>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw UsageError("adam step: parameter/gradient count mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    const Tensor& g = grads[i];
    if (!p.same_shape(g)) {
      throw UsageError("adam step: gradient shape mismatch for " + params[i].name);
    }
    if (!g.all_finite()) {
      throw NumericError("non-finite gradient for parameter " + params[i].name);
    }
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (int j = 0; j < p.size(); ++j) {
      const double gj = g[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

}  // namespace mforge
