#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "alternator/model/alternator.hpp"
#include "alternator/numerics/tape.hpp"

namespace alternator {

// Monte-Carlo cross-entropy estimate for one batch.
// total == feature_term + observation_weight * observation_term.
struct LossReport {
  double total = 0.0;
  double feature_term = 0.0;
  double observation_term = 0.0;  // unweighted (1/B) sum ||x - mu_x||^2
  double observation_weight = 0.0;
  std::size_t epoch = 0;
  double lr = 0.0;
};

struct TapedLoss {
  Var total;
  Var feature_term;
  Var observation_term;
  double observation_weight = 0.0;

  LossReport report() const;
};

// Row-stacked loss core. Each row r is one (b, t) pair:
//   feature:     || z_r - (sqrt(a_r) g(x_r) + sqrt(1 - a_r - sz^2) z_prev_r) ||^2
//   observation: || x_r - sqrt(1 - sx^2) f(z_prev_r) ||^2
// summed over rows and divided by `batch`.
TapedLoss alternator_loss(const AlternatorConfig& cfg, const NetworkShape& shape, std::span<const Var> theta,
                          std::span<const Var> phi, Var x, Var z_prev, Var z, std::span<const double> alpha,
                          std::size_t batch);

// Stack rows [first, first + count) of every sequence, time-major:
// output row (t - first) * B + b holds seq[b] row t.
Tensor stack_steps(std::span<const Tensor> seqs, std::size_t first, std::size_t count);
std::vector<double> stacked_alpha(const AlternatorConfig& cfg, std::size_t T, std::size_t batch);

// Generative loss. data_x[b]: T x D_x data sequence; features[b]: (T+1) x D_z
// feature trajectory z_0..z_T sampled from the model marginal.
LossReport loss_generative(const Alternator& model, std::span<const Tensor> data_x, std::span<const Tensor> features);
TapedLoss loss_generative(Tape& tape, const AlternatorConfig& cfg, const NetworkShape& shape,
                          std::span<const Var> theta, std::span<const Var> phi, std::span<const Tensor> data_x,
                          std::span<const Tensor> features);

// Sequence-to-sequence loss with teacher forcing. y[b]: T x D_y targets,
// y0: B x D_y initial features (drawn from the prior during training).
LossReport loss_seq2seq(const Alternator& model, std::span<const Tensor> x, std::span<const Tensor> y,
                        const Tensor& y0);
TapedLoss loss_seq2seq(Tape& tape, const AlternatorConfig& cfg, const NetworkShape& shape,
                       std::span<const Var> theta, std::span<const Var> phi, std::span<const Tensor> x,
                       std::span<const Tensor> y, const Tensor& y0);

NetworkShape shape_of(const ModelParams& params);

}  // namespace alternator
