#include "alternator/model/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alternator/errors.hpp"

namespace alternator {

AlternatorConfig AlternatorConfig::with_constant_alpha(std::size_t obs_dim, std::size_t feature_dim,
                                                       std::size_t length, double sigma_x, double sigma_z,
                                                       double alpha) {
  AlternatorConfig c;
  c.obs_dim = obs_dim;
  c.feature_dim = feature_dim;
  c.length = length;
  c.sigma_x = sigma_x;
  c.sigma_z = sigma_z;
  c.alpha.assign(length, alpha);
  c.validate();
  return c;
}

void AlternatorConfig::validate() const {
  require(obs_dim >= 1 && feature_dim >= 1, "alternator config: dimensions must be >= 1");
  require(length >= 1, "alternator config: sequence length must be >= 1");
  require(sigma_x > 0.0 && sigma_x < 1.0, "alternator config: need 0 < sigma_x < 1");
  require(sigma_z > 0.0 && sigma_z < 1.0, "alternator config: need 0 < sigma_z < 1");
  require(sigma_z < sigma_x, "alternator config: need sigma_z < sigma_x");
  require(alpha.size() == length, "alternator config: alpha schedule length " + std::to_string(alpha.size()) +
                                      " != T = " + std::to_string(length));
  const double upper = 1.0 - sigma_z * sigma_z;
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    if (!alpha_in_range(alpha[t], sigma_z)) {
      std::ostringstream msg;
      msg << "alternator config: alpha_" << t + 1 << " = " << alpha[t] << " outside [0, 1 - sigma_z^2 = " << upper
          << "]";
      throw ContractError(msg.str());
    }
  }
}

std::vector<std::string> AlternatorConfig::warnings() const {
  std::vector<std::string> w;
  if (feature_dim >= obs_dim) {
    w.push_back("feature dimension " + std::to_string(feature_dim) + " is not smaller than observation dimension " +
                std::to_string(obs_dim));
  }
  return w;
}

double AlternatorConfig::alpha_at(std::size_t t) const {
  if (t == 0) throw ContractError("alpha_at: time index is 1-based");
  if (alpha.empty()) throw ContractError("alpha_at: empty schedule");
  return t <= alpha.size() ? alpha[t - 1] : alpha.back();
}

double AlternatorConfig::obs_scale() const {
  return std::sqrt(observation_coefficients_sq(sigma_x).scale_sq);
}

double AlternatorConfig::input_coef(std::size_t t) const { return std::sqrt(alpha_at(t)); }

double AlternatorConfig::memory_coef(std::size_t t) const { return memory_coefficient(alpha_at(t), sigma_z); }

bool alpha_in_range(double alpha, double sigma_z) {
  return alpha >= 0.0 && latent_coefficients_sq(alpha, sigma_z).memory_sq >= -kAlphaSlack;
}

double memory_coefficient(double alpha, double sigma_z) {
  const double rem = latent_coefficients_sq(alpha, sigma_z).memory_sq;
  return rem <= kAlphaSlack ? 0.0 : std::sqrt(rem);
}

double AlternatorConfig::observation_weight() const {
  return static_cast<double>(feature_dim) * sigma_z * sigma_z /
         (static_cast<double>(obs_dim) * sigma_x * sigma_x);
}

double AlternatorConfig::observation_density_variance() const {
  return static_cast<double>(obs_dim) * sigma_x * sigma_x;
}

std::string AlternatorConfig::describe() const {
  std::ostringstream s;
  s.precision(17);
  s << "Dx=" << obs_dim << ";Dz=" << feature_dim << ";T=" << length << ";sx=" << sigma_x << ";sz=" << sigma_z;
  return s.str();
}

}  // namespace alternator
