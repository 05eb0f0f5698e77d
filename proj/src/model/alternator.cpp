#include "alternator/model/alternator.hpp"

#include <cmath>
#include <numbers>

#include "alternator/errors.hpp"
#include "alternator/numerics/logsumexp.hpp"

namespace alternator {

MlpSpec NetworkShape::otn_spec(const AlternatorConfig& cfg) const {
  return MlpSpec{cfg.feature_dim, hidden_dims, cfg.obs_dim, activation, output_activation};
}

MlpSpec NetworkShape::ftn_spec(const AlternatorConfig& cfg) const {
  return MlpSpec{cfg.obs_dim, hidden_dims, cfg.feature_dim, activation, output_activation};
}

ModelParams ModelParams::init(const AlternatorConfig& cfg, const NetworkShape& shape, Rng& rng) {
  ModelParams p;
  p.otn = Mlp::init(shape.otn_spec(cfg), rng);
  p.ftn = Mlp::init(shape.ftn_spec(cfg), rng);
  return p;
}

ModelParams ModelParams::zeros(const AlternatorConfig& cfg, const NetworkShape& shape) {
  return ModelParams{Mlp(shape.otn_spec(cfg)), Mlp(shape.ftn_spec(cfg))};
}

void ModelParams::check(const AlternatorConfig& cfg) const {
  const auto& o = otn.spec();
  const auto& f = ftn.spec();
  if (o.input_dim != cfg.feature_dim || o.output_dim != cfg.obs_dim) {
    throw DimensionError("model: OTN maps " + std::to_string(o.input_dim) + "->" + std::to_string(o.output_dim) +
                         ", expected D_z->D_x = " + std::to_string(cfg.feature_dim) + "->" +
                         std::to_string(cfg.obs_dim));
  }
  if (f.input_dim != cfg.obs_dim || f.output_dim != cfg.feature_dim) {
    throw DimensionError("model: FTN maps " + std::to_string(f.input_dim) + "->" + std::to_string(f.output_dim) +
                         ", expected D_x->D_z = " + std::to_string(cfg.obs_dim) + "->" +
                         std::to_string(cfg.feature_dim));
  }
}

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out;
  for (auto& t : otn.parameters()) out.push_back(&t);
  for (auto& t : ftn.parameters()) out.push_back(&t);
  return out;
}

std::vector<std::string> ModelParams::names() const {
  auto n = otn.parameter_names("otn");
  auto f = ftn.parameter_names("ftn");
  n.insert(n.end(), f.begin(), f.end());
  return n;
}

std::uint64_t model_digest(const AlternatorConfig& cfg, const NetworkShape& shape) {
  return spec_digest("otn=" + shape.otn_spec(cfg).describe() + ";ftn=" + shape.ftn_spec(cfg).describe());
}

Checkpoint ModelParams::to_checkpoint(const AlternatorConfig& cfg) const {
  NetworkShape shape{otn.spec().hidden_dims, otn.spec().activation, otn.spec().output_activation};
  Checkpoint ckpt;
  ckpt.digest = model_digest(cfg, shape);
  const auto n = names();
  std::size_t i = 0;
  for (const auto& t : otn.parameters()) ckpt.tensors.push_back({n[i++], t});
  for (const auto& t : ftn.parameters()) ckpt.tensors.push_back({n[i++], t});
  return ckpt;
}

ModelParams ModelParams::from_checkpoint(const Checkpoint& ckpt, const AlternatorConfig& cfg,
                                         const NetworkShape& shape) {
  if (ckpt.digest != model_digest(cfg, shape)) {
    throw FormatError("checkpoint: architecture digest does not match the configured model");
  }
  ModelParams p = zeros(cfg, shape);
  const auto n = p.names();
  auto tensors = p.tensors();
  for (std::size_t i = 0; i < n.size(); ++i) {
    const Tensor& src = ckpt.at(n[i]);
    if (!src.same_shape(*tensors[i])) throw FormatError("checkpoint: shape mismatch for " + n[i]);
    *tensors[i] = src;
  }
  return p;
}

Var obs_mean(const AlternatorConfig& cfg, const MlpSpec& otn, std::span<const Var> theta, Var z_prev) {
  return scale(mlp_forward(otn, theta, z_prev), cfg.obs_scale());
}

Var latent_mean(const AlternatorConfig& cfg, const MlpSpec& ftn, std::span<const Var> phi, Var x, Var z_prev,
                std::span<const double> alpha) {
  if (alpha.size() != x.rows() || x.rows() != z_prev.rows()) throw DimensionError("latent_mean: row counts differ");
  std::vector<double> in_coef(alpha.size());
  std::vector<double> mem_coef(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!alpha_in_range(alpha[i], cfg.sigma_z)) throw ContractError("latent_mean: alpha outside [0, 1 - sigma_z^2]");
    in_coef[i] = std::sqrt(alpha[i]);
    mem_coef[i] = memory_coefficient(alpha[i], cfg.sigma_z);
  }
  return scale_rows(mlp_forward(ftn, phi, x), std::move(in_coef)) + scale_rows(z_prev, std::move(mem_coef));
}

Alternator::Alternator(AlternatorConfig cfg, ModelParams params) : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  params_.check(cfg_);
}

void Alternator::check_obs(const Tensor& x) const {
  if (x.cols() != cfg_.obs_dim) {
    throw DimensionError("observation width " + std::to_string(x.cols()) + " != D_x = " + std::to_string(cfg_.obs_dim));
  }
}

Tensor Alternator::sample_prior(Rng& rng) const { return sample_prior(rng, 1); }

Tensor Alternator::sample_prior(Rng& rng, std::size_t batch) const {
  Tensor z = Tensor::zeros(batch, cfg_.feature_dim);
  for (double& v : z.values()) v = standard_normal(rng);
  return z;
}

Tensor Alternator::obs_mean(const Tensor& z_prev) const {
  if (z_prev.cols() != cfg_.feature_dim) throw DimensionError("obs_mean: feature width != D_z");
  Tensor mu = params_.otn.forward(z_prev);
  const double s = cfg_.obs_scale();
  for (double& v : mu.values()) v *= s;
  return mu;
}

namespace {

// sqrt(a) g + m z, elementwise in a fixed order shared by every caller.
void blend(Tensor& g, const Tensor& z_prev, double in_coef, double mem_coef) {
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = in_coef * g[i] + mem_coef * z_prev[i];
}

}  // namespace

Tensor Alternator::latent_mean(const Tensor& x, const Tensor& z_prev, double alpha_t) const {
  check_obs(x);
  if (z_prev.cols() != cfg_.feature_dim || z_prev.rows() != x.rows()) {
    throw DimensionError("latent_mean: z_prev shape " + shape_string(z_prev.shape()));
  }
  if (!alpha_in_range(alpha_t, cfg_.sigma_z)) throw ContractError("latent_mean: alpha_t outside [0, 1 - sigma_z^2]");
  Tensor mu = params_.ftn.forward(x);
  blend(mu, z_prev, std::sqrt(alpha_t), memory_coefficient(alpha_t, cfg_.sigma_z));
  return mu;
}

std::pair<Tensor, Tensor> Alternator::sample_step(Rng& rng, const Tensor& z_prev, double alpha_t) const {
  Tensor x = obs_mean(z_prev);
  for (double& v : x.values()) v += cfg_.sigma_x * standard_normal(rng);
  Tensor z = latent_mean(x, z_prev, alpha_t);
  for (double& v : z.values()) v += cfg_.sigma_z * standard_normal(rng);
  return {std::move(x), std::move(z)};
}

Trajectory Alternator::generate(Rng& rng, std::size_t T) const {
  if (T == 0) throw ContractError("generate: T must be >= 1");
  Trajectory traj;
  traj.x = Tensor::zeros(T, cfg_.obs_dim);
  traj.z = Tensor::zeros(T + 1, cfg_.feature_dim);
  Tensor z = sample_prior(rng);
  std::copy(z.values().begin(), z.values().end(), traj.z.row_span(0).begin());
  for (std::size_t t = 1; t <= T; ++t) {
    auto [x_t, z_t] = sample_step(rng, z, cfg_.alpha_at(t));
    std::copy(x_t.values().begin(), x_t.values().end(), traj.x.row_span(t - 1).begin());
    std::copy(z_t.values().begin(), z_t.values().end(), traj.z.row_span(t).begin());
    z = std::move(z_t);
  }
  return traj;
}

Tensor Alternator::encode(const Tensor& x) const {
  check_obs(x);
  const std::size_t T = x.rows();
  if (T == 0) throw ContractError("encode: empty sequence");
  if (!x.all_finite()) throw ContractError("encode: input must be fully observed");
  const Tensor g = params_.ftn.forward(x);
  Tensor out = Tensor::zeros(T, cfg_.feature_dim);
  Tensor z = Tensor::zeros(1, cfg_.feature_dim);
  for (std::size_t t = 1; t <= T; ++t) {
    Tensor mu = g.row_slice(t - 1, t);
    blend(mu, z, cfg_.input_coef(t), cfg_.memory_coef(t));
    std::copy(mu.values().begin(), mu.values().end(), out.row_span(t - 1).begin());
    z = std::move(mu);
  }
  return out;
}

Tensor Alternator::encode_population(std::span<const Tensor> sequences) const {
  if (sequences.empty()) throw ContractError("encode_population: empty batch");
  Tensor mean = encode(sequences.front());
  for (std::size_t b = 1; b < sequences.size(); ++b) {
    if (sequences[b].rows() != sequences.front().rows()) {
      throw ContractError("encode_population: sequences differ in length");
    }
    const Tensor e = encode(sequences[b]);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += e[i];
  }
  const double inv = 1.0 / static_cast<double>(sequences.size());
  for (double& v : mean.values()) v *= inv;
  return mean;
}

Trajectory Alternator::impute(Rng& rng, const Trajectory& traj) const {
  check_obs(traj.x);
  const std::size_t T = traj.x.rows();
  if (T == 0) throw ContractError("impute: empty sequence");
  if (!traj.mask.empty() && traj.mask.size() != T) throw DimensionError("impute: mask length != T");

  Trajectory out;
  out.x = Tensor::zeros(T, cfg_.obs_dim);
  out.z = Tensor::zeros(T + 1, cfg_.feature_dim);
  out.mask = traj.mask;
  Tensor z = sample_prior(rng);
  std::copy(z.values().begin(), z.values().end(), out.z.row_span(0).begin());
  for (std::size_t t = 1; t <= T; ++t) {
    Tensor x = obs_mean(z);
    for (double& v : x.values()) v += cfg_.sigma_x * standard_normal(rng);
    if (traj.observed(t)) {
      auto src = traj.x.row_span(t - 1);
      std::copy(src.begin(), src.end(), x.values().begin());
    }
    Tensor z_t = latent_mean(x, z, cfg_.alpha_at(t));
    for (double& v : z_t.values()) v += cfg_.sigma_z * standard_normal(rng);
    std::copy(x.values().begin(), x.values().end(), out.x.row_span(t - 1).begin());
    std::copy(z_t.values().begin(), z_t.values().end(), out.z.row_span(t).begin());
    z = std::move(z_t);
  }
  return out;
}

Trajectory Alternator::forecast_trajectory(Rng& rng, const Tensor& prefix, std::size_t horizon) const {
  if (prefix.empty() || prefix.rows() == 0) throw ContractError("forecast: empty prefix");
  if (horizon == 0) throw ContractError("forecast: horizon must be >= 1");
  check_obs(prefix);
  const std::size_t k = prefix.rows();
  Trajectory traj;
  traj.x = Tensor::zeros(k + horizon, cfg_.obs_dim);
  std::copy(prefix.values().begin(), prefix.values().end(), traj.x.values().begin());
  traj.mask.assign(k + horizon, false);
  std::fill(traj.mask.begin(), traj.mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  return impute(rng, traj);
}

Tensor Alternator::forecast(Rng& rng, const Tensor& prefix, std::size_t horizon) const {
  const auto traj = forecast_trajectory(rng, prefix, horizon);
  return traj.x.row_slice(prefix.rows(), prefix.rows() + horizon);
}

double gaussian_log_density(std::span<const double> x, std::span<const double> mean, double variance) {
  if (x.size() != mean.size()) throw DimensionError("gaussian_log_density: size mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sq += (x[i] - mean[i]) * (x[i] - mean[i]);
  const double d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi * variance) - sq / (2.0 * variance);
}

std::vector<double> Alternator::score_terms(const Tensor& x, std::size_t samples, Rng& rng) const {
  if (samples == 0) throw ContractError("score_loglik: K must be >= 1");
  check_obs(x);
  const std::size_t T = x.rows();
  if (T == 0) throw ContractError("score_loglik: empty sequence");
  if (!x.all_finite()) throw ContractError("score_loglik: sequence must be fully observed");
  const double var = cfg_.observation_density_variance();
  std::vector<double> terms(samples, 0.0);
  Tensor z = sample_prior(rng, samples);
  for (std::size_t t = 1; t <= T; ++t) {
    Tensor mu = obs_mean(z);
    for (std::size_t k = 0; k < samples; ++k) terms[k] += gaussian_log_density(x.row_span(t - 1), mu.row_span(k), var);
    if (t == T) break;
    // ancestral step of the feature marginal: model-drawn x, then z
    for (double& v : mu.values()) v += cfg_.sigma_x * standard_normal(rng);
    Tensor z_t = latent_mean(mu, z, cfg_.alpha_at(t));
    for (double& v : z_t.values()) v += cfg_.sigma_z * standard_normal(rng);
    z = std::move(z_t);
  }
  return terms;
}

double Alternator::score_loglik(const Tensor& x, std::size_t samples, Rng& rng) const {
  const auto terms = score_terms(x, samples, rng);
  return log_sum_exp(terms) - std::log(static_cast<double>(samples));
}

}  // namespace alternator
