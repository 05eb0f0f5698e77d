#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "alternator/numerics/tensor.hpp"
#include "alternator/rng.hpp"

namespace alternator {

enum class HistoryMode {
  last_spike,  // 1 - exp(-(t - s_last)^2 / (2 sigma_j^2)), stays in [0, 1]
  sum,         // sum over all past spikes of the same expression
};

// Gaussian tuning of one channel over the (normalized) feature space.
struct ReceptiveField {
  std::vector<double> center;  // mu_{j,c}
  std::vector<double> width;   // sigma_{j,c}
  double history_width = 0.01;  // sigma_j
  double max_rate = 1.0;        // a_j (log-scale peak of the tuning term)
};

struct SpikeSimConfig {
  std::size_t channels = 100;  // J
  double fr_min = 0.0;
  double fr_max = 10.0;
  double sigma_min = 0.001;
  double sigma_max = 0.01;
  double bin_width = 0.01;  // Delta t; bin i (1-based) sits at time i * bin_width
  HistoryMode history = HistoryMode::last_spike;

  void validate() const;
};

// Priors: center ~ U(mean_c - 2 std_c, mean_c + 2 std_c), widths and history
// width ~ U(sigma_min, sigma_max), a_j ~ U(fr_min, fr_max). Statistics come
// from `z` (expected min-max normalized).
std::vector<ReceptiveField> draw_receptive_fields(const Tensor& z, const SpikeSimConfig& config, Rng& rng);

// exp(a_j - sum_c (z_c - mu_c)^2 / (2 sigma_c^2))
double tuning_term(const ReceptiveField& field, std::span<const double> z);
// 1 when `spike_times` is empty.
double history_term(const ReceptiveField& field, double t, std::span<const double> spike_times, HistoryMode mode);
double intensity(const ReceptiveField& field, std::span<const double> z, double t,
                 std::span<const double> spike_times, HistoryMode mode = HistoryMode::last_spike);

// P(spike in a bin) = 1 - exp(-rate * bin_width).
double spike_probability(double rate, double bin_width);

// T x J binary matrix. Channel j draws from its own stream
// Rng(derive_seed(seed, j)), so the result does not depend on thread count.
Tensor simulate_spikes(const Tensor& z, std::span<const ReceptiveField> fields, const SpikeSimConfig& config,
                       std::uint64_t seed);

namespace serial {
Tensor simulate_spikes(const Tensor& z, std::span<const ReceptiveField> fields, const SpikeSimConfig& config,
                       std::uint64_t seed);
}

}  // namespace alternator
