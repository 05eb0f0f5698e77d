#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "alternator/model/config.hpp"
#include "alternator/model/trajectory.hpp"
#include "alternator/numerics/checkpoint.hpp"
#include "alternator/numerics/mlp.hpp"
#include "alternator/numerics/tape.hpp"
#include "alternator/rng.hpp"

namespace alternator {

// Hidden-layer layout shared by the OTN and the FTN.
struct NetworkShape {
  std::vector<std::size_t> hidden_dims{10, 10};
  Activation activation = Activation::tanh;
  OutputActivation output_activation = OutputActivation::identity;

  MlpSpec otn_spec(const AlternatorConfig& cfg) const;  // D_z -> D_x
  MlpSpec ftn_spec(const AlternatorConfig& cfg) const;  // D_x -> D_z
};

// theta: observation trajectory network f (features -> observations)
// phi:   feature trajectory network g (observations -> features)
struct ModelParams {
  Mlp otn;
  Mlp ftn;

  static ModelParams init(const AlternatorConfig& cfg, const NetworkShape& shape, Rng& rng);
  static ModelParams zeros(const AlternatorConfig& cfg, const NetworkShape& shape);

  void check(const AlternatorConfig& cfg) const;

  // Flat parameter list: otn parameters then ftn parameters.
  std::vector<Tensor*> tensors();
  std::vector<std::string> names() const;

  Checkpoint to_checkpoint(const AlternatorConfig& cfg) const;
  static ModelParams from_checkpoint(const Checkpoint& ckpt, const AlternatorConfig& cfg, const NetworkShape& shape);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

std::uint64_t model_digest(const AlternatorConfig& cfg, const NetworkShape& shape);

// Taped means. Rows of z_prev / x are independent (batch or stacked time).
Var obs_mean(const AlternatorConfig& cfg, const MlpSpec& otn, std::span<const Var> theta, Var z_prev);
// alpha holds one alpha_t per row.
Var latent_mean(const AlternatorConfig& cfg, const MlpSpec& ftn, std::span<const Var> phi, Var x, Var z_prev,
                std::span<const double> alpha);

class Alternator {
 public:
  Alternator(AlternatorConfig cfg, ModelParams params);

  const AlternatorConfig& config() const { return cfg_; }
  const ModelParams& params() const { return params_; }

  // z_0 ~ N(0, I); 1 x D_z.
  Tensor sample_prior(Rng& rng) const;
  Tensor sample_prior(Rng& rng, std::size_t batch) const;

  // sqrt(1 - sigma_x^2) f(z_prev), row-wise.
  Tensor obs_mean(const Tensor& z_prev) const;
  // sqrt(alpha_t) g(x_t) + sqrt(1 - alpha_t - sigma_z^2) z_prev, row-wise.
  Tensor latent_mean(const Tensor& x, const Tensor& z_prev, double alpha_t) const;

  // One alternation: x_t = obs_mean + sigma_x eps_x, then
  // z_t = latent_mean(x_t) + sigma_z eps_z. eps_x is drawn before eps_z, row by row.
  std::pair<Tensor, Tensor> sample_step(Rng& rng, const Tensor& z_prev, double alpha_t) const;

  Trajectory generate(Rng& rng, std::size_t T) const;

  // Deterministic recursion from z*_0 = 0; returns z*_1..z*_T (T x D_z).
  Tensor encode(const Tensor& x) const;
  Tensor encode_population(std::span<const Tensor> sequences) const;

  // Runs the generative process, substituting observed x_t where the mask
  // says so. Masked-out entries of traj.x are never read.
  Trajectory impute(Rng& rng, const Trajectory& traj) const;
  // Returns x_{k+1..k+h} given x_1..x_k.
  Tensor forecast(Rng& rng, const Tensor& prefix, std::size_t horizon) const;
  // Same rollout as forecast, returning the full completed trajectory.
  Trajectory forecast_trajectory(Rng& rng, const Tensor& prefix, std::size_t horizon) const;

  // log (1/K) sum_k exp(sum_t log N(x_t; obs_mean(z^k_{t-1}), D_x sigma_x^2 I))
  double score_loglik(const Tensor& x, std::size_t samples, Rng& rng) const;
  // The K per-sample log terms before log-sum-exp.
  std::vector<double> score_terms(const Tensor& x, std::size_t samples, Rng& rng) const;

 private:
  void check_obs(const Tensor& x) const;

  AlternatorConfig cfg_;
  ModelParams params_;
};

// Isotropic Gaussian log-density of `x` around `mean` with per-coordinate variance.
double gaussian_log_density(std::span<const double> x, std::span<const double> mean, double variance);

}  // namespace alternator
