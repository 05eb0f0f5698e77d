#pragma once

#include <array>
#include <cstddef>

#include "alternator/numerics/tensor.hpp"
#include "alternator/rng.hpp"

namespace alternator {

struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  double dt = 0.01;
  std::size_t steps = 400;  // T
  double noise_scale = 1.0;
  // false: z += (drift + noise_scale * eps) * dt, the equations read literally.
  // true:  z += drift * dt + noise_scale * sqrt(dt) * eps (Euler-Maruyama).
  bool sqrt_dt_diffusion = false;

  void validate() const;
};

using LorenzState = std::array<double, 3>;

LorenzState lorenz_drift(const LorenzParams& p, const LorenzState& z);

// Initial state uniform in [-1, 1]^3, then `steps` Euler steps. Returns
// z_1..z_T as a T x 3 tensor.
Tensor simulate_lorenz(const LorenzParams& params, Rng& rng);
Tensor simulate_lorenz_from(const LorenzParams& params, const LorenzState& initial, Rng& rng);

struct MinMaxNormalized {
  Tensor values;  // each column in [0, 1]
  std::vector<double> min;
  std::vector<double> max;
};

// Column-wise min-max scaling. A constant column is a contract error.
MinMaxNormalized normalize_minmax(const Tensor& z);
Tensor denormalize_minmax(const Tensor& z, const std::vector<double>& min, const std::vector<double>& max);

}  // namespace alternator
