#include "alternator/datagen/lorenz.hpp"

#include <algorithm>
#include <cmath>

#include "alternator/errors.hpp"

namespace alternator {

void LorenzParams::validate() const {
  require(dt > 0.0, "lorenz: dt must be > 0");
  require(steps >= 1, "lorenz: T must be >= 1");
  require(noise_scale >= 0.0, "lorenz: noise_scale must be >= 0");
}

LorenzState lorenz_drift(const LorenzParams& p, const LorenzState& z) {
  return {p.sigma * (z[1] - z[0]), z[0] * (p.rho - z[2]) - z[1], z[0] * z[1] - p.beta * z[2]};
}

Tensor simulate_lorenz_from(const LorenzParams& params, const LorenzState& initial, Rng& rng) {
  params.validate();
  Tensor out = Tensor::zeros(params.steps, 3);
  LorenzState z = initial;
  const double noise_dt = params.sqrt_dt_diffusion ? std::sqrt(params.dt) : params.dt;
  for (std::size_t t = 0; t < params.steps; ++t) {
    const LorenzState d = lorenz_drift(params, z);
    for (std::size_t c = 0; c < 3; ++c) {
      const double eps = params.noise_scale * standard_normal(rng);
      z[c] += d[c] * params.dt + eps * noise_dt;
      out(t, c) = z[c];
    }
  }
  return out;
}

Tensor simulate_lorenz(const LorenzParams& params, Rng& rng) {
  LorenzState init{};
  for (double& v : init) v = uniform(rng, -1.0, 1.0);
  return simulate_lorenz_from(params, init, rng);
}

MinMaxNormalized normalize_minmax(const Tensor& z) {
  MinMaxNormalized out{z.reshaped({z.rows(), z.cols()}), std::vector<double>(z.cols()), std::vector<double>(z.cols())};
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double lo = z(0, c), hi = z(0, c);
    for (std::size_t t = 1; t < z.rows(); ++t) {
      lo = std::min(lo, z(t, c));
      hi = std::max(hi, z(t, c));
    }
    if (!(hi > lo)) throw ContractError("normalize: coordinate " + std::to_string(c) + " is constant");
    out.min[c] = lo;
    out.max[c] = hi;
    for (std::size_t t = 0; t < z.rows(); ++t) out.values(t, c) = (z(t, c) - lo) / (hi - lo);
  }
  return out;
}

Tensor denormalize_minmax(const Tensor& z, const std::vector<double>& min, const std::vector<double>& max) {
  if (min.size() != z.cols() || max.size() != z.cols()) throw DimensionError("denormalize: bound count != columns");
  Tensor out = z;
  for (std::size_t t = 0; t < z.rows(); ++t) {
    for (std::size_t c = 0; c < z.cols(); ++c) out(t, c) = min[c] + z(t, c) * (max[c] - min[c]);
  }
  return out;
}

}  // namespace alternator
