#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace alternator {

// Squared coefficients of the feature transition
//   z_t = sqrt(input_sq) g(x_t) + sqrt(memory_sq) z_{t-1} + sqrt(noise_sq) eps
// Templated so the identities can be checked in exact arithmetic.
template <typename S>
struct LatentCoefficientsSq {
  S input_sq;
  S memory_sq;
  S noise_sq;
};

template <typename S>
LatentCoefficientsSq<S> latent_coefficients_sq(const S& alpha, const S& sigma_z) {
  const S noise = sigma_z * sigma_z;
  return {alpha, S(1) - alpha - noise, noise};
}

// Floating-point forms used by every kernel. A squared memory remainder
// within kAlphaSlack of zero counts as zero, so alpha_t = 1 - sigma_z^2
// written in any rounding gives an exactly memoryless step.
inline constexpr double kAlphaSlack = 1e-15;
bool alpha_in_range(double alpha, double sigma_z);
double memory_coefficient(double alpha, double sigma_z);

// x_t = sqrt(scale_sq) f(z_{t-1}) + sqrt(noise_sq) eps
template <typename S>
struct ObservationCoefficientsSq {
  S scale_sq;
  S noise_sq;
};

template <typename S>
ObservationCoefficientsSq<S> observation_coefficients_sq(const S& sigma_x) {
  const S noise = sigma_x * sigma_x;
  return {S(1) - noise, noise};
}

struct AlternatorConfig {
  std::size_t obs_dim = 1;      // D_x
  std::size_t feature_dim = 1;  // D_z
  std::size_t length = 1;       // T
  double sigma_x = 0.3;
  double sigma_z = 0.1;
  std::vector<double> alpha;    // alpha_1..alpha_T

  static AlternatorConfig with_constant_alpha(std::size_t obs_dim, std::size_t feature_dim, std::size_t length,
                                              double sigma_x, double sigma_z, double alpha);

  // Throws ContractError on a violated invariant.
  void validate() const;
  // Soft invariants (D_z < D_x).
  std::vector<std::string> warnings() const;

  // t is 1-based; steps past the schedule reuse its last value.
  double alpha_at(std::size_t t) const;

  double obs_scale() const;            // sqrt(1 - sigma_x^2)
  double input_coef(std::size_t t) const;   // sqrt(alpha_t)
  double memory_coef(std::size_t t) const;  // sqrt(1 - alpha_t - sigma_z^2)
  // D_z sigma_z^2 / (D_x sigma_x^2), the observation-residual weight of the loss.
  double observation_weight() const;
  // Per-coordinate variance of p(x_t | z_{t-1}) used for density evaluation.
  double observation_density_variance() const;

  std::string describe() const;
};

}  // namespace alternator
