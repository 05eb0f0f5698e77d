#include "alternator/numerics/adam.hpp"

#include <cmath>

#include "alternator/errors.hpp"

namespace alternator {

AdamState AdamState::for_parameters(std::span<const Tensor> params, double base_lr) {
  AdamState s;
  s.base_lr = base_lr;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.shape(), 0.0);
    s.second_moment.emplace_back(p.shape(), 0.0);
  }
  return s;
}

void adam_step(AdamState& state, std::span<Tensor> params, std::span<const Tensor> grads, double lr) {
  std::vector<Tensor*> ptrs;
  for (auto& p : params) ptrs.push_back(&p);
  adam_step(state, std::span<Tensor* const>(ptrs), grads, lr);
}

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads, double lr) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam: parameter/gradient/moment counts differ");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k]->same_shape(grads[k]) || !params[k]->same_shape(state.first_moment[k])) {
      throw DimensionError("adam: shape mismatch at parameter " + std::to_string(k));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k]->values();
    auto g = grads[k].values();
    auto m = state.first_moment[k].values();
    auto v = state.second_moment[k].values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace alternator
