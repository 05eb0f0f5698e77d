#pragma once

// Central finite-difference check of tape gradients.

#include <functional>
#include <span>
#include <vector>

#include "alternator/numerics/tape.hpp"
#include "oracles.hpp"

namespace gradcheck {

using alternator::Tape;
using alternator::Tensor;
using alternator::Var;

// Builds a scalar loss on `tape` from parameter leaves (one per tensor).
using LossBuilder = std::function<Var(Tape&, std::span<const Var>)>;

inline double loss_value(std::vector<Tensor>& params, const LossBuilder& build) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& p : params) leaves.push_back(tape.constant(p));
  return build(tape, leaves).value().item();
}

// Worst relative error over parameter tensors, comparing the tape gradient
// against central differences with step h on every coordinate.
inline double worst_relative_error(std::vector<Tensor> params, const LossBuilder& build, double h = 1e-5) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& p : params) leaves.push_back(tape.parameter(p));
  const Var loss = build(tape, leaves);
  const auto grads = alternator::backward(tape, loss);

  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads.of(leaves[i]);
    std::vector<double> analytic(g.values().begin(), g.values().end());
    std::vector<double> numeric(analytic.size());
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      numeric[k] = oracle::central_difference([&] { return loss_value(params, build); }, &params[i].values()[k], h);
    }
    worst = std::max(worst, oracle::relative_error(analytic, numeric));
  }
  return worst;
}

}  // namespace gradcheck
