#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "alternator/model/alternator.hpp"
#include "alternator/numerics/schedule.hpp"
#include "alternator/training/losses.hpp"

namespace alternator {

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t epochs = 500;
  LrSchedule schedule;  // total_epochs must equal epochs
  std::uint64_t seed = 0;
  // Stop gradients through the ancestrally sampled features (generative only).
  bool detach_marginal = false;

  void validate() const;
};

struct TrainResult {
  ModelParams params;
  std::vector<LossReport> history;  // one per epoch, batch-size weighted mean
};

// Called after every epoch with the current parameters.
using EpochCallback = std::function<void(std::size_t epoch, const ModelParams&, const LossReport&)>;

// Shuffled epoch order; batches are consecutive slices, the last one may be partial.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, Rng& rng);

// Ancestral feature sampling on a tape (reparameterized noise).
// Returns z_0..z_T, each B x D_z.
std::vector<Var> sample_features_taped(Tape& tape, const AlternatorConfig& cfg, const NetworkShape& shape,
                                       std::span<const Var> theta, std::span<const Var> phi, std::size_t batch,
                                       std::size_t T, Rng& rng);

// Algorithm-1 style training on observation sequences (each T x D_x).
TrainResult train_generative(const AlternatorConfig& cfg, ModelParams init, std::span<const Tensor> dataset,
                             const TrainConfig& train, const EpochCallback& on_epoch = {});

// Algorithm-2 style training on (x, y) pairs; y plays the feature role.
TrainResult train_seq2seq(const AlternatorConfig& cfg, ModelParams init, std::span<const Tensor> x,
                          std::span<const Tensor> y, const TrainConfig& train, const EpochCallback& on_epoch = {});

// Deterministic rollout from y_0 = 0:
//   y_t = sqrt(alpha_t) g(x_t) + sqrt(1 - alpha_t - sigma_y^2) y_{t-1}
Tensor seq2seq_predict(const Alternator& model, const Tensor& x);

}  // namespace alternator
