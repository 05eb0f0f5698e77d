#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "alternator/numerics/tensor.hpp"

namespace alternator {

struct AdamState {
  std::size_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double base_lr = 1e-3;

  // Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<const Tensor> params, double base_lr);
};

// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<Tensor> params, std::span<const Tensor> grads, double lr);
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads, double lr);

}  // namespace alternator
