#include "alternator/datagen/spikes.hpp"

#include <cmath>

#include "alternator/errors.hpp"

namespace alternator {

void SpikeSimConfig::validate() const {
  require(channels >= 1, "spike config: channels must be >= 1");
  require(bin_width > 0.0, "spike config: bin width must be > 0");
  require(sigma_min > 0.0 && sigma_min <= sigma_max, "spike config: need 0 < sigma_min <= sigma_max");
  require(fr_min <= fr_max, "spike config: need fr_min <= fr_max");
}

std::vector<ReceptiveField> draw_receptive_fields(const Tensor& z, const SpikeSimConfig& config, Rng& rng) {
  config.validate();
  const std::size_t T = z.rows();
  const std::size_t D = z.cols();
  if (T == 0) throw ContractError("receptive fields: empty trajectory");
  std::vector<double> mean(D, 0.0), sd(D, 0.0);
  for (std::size_t c = 0; c < D; ++c) {
    for (std::size_t t = 0; t < T; ++t) mean[c] += z(t, c);
    mean[c] /= static_cast<double>(T);
    for (std::size_t t = 0; t < T; ++t) sd[c] += (z(t, c) - mean[c]) * (z(t, c) - mean[c]);
    sd[c] = std::sqrt(sd[c] / static_cast<double>(T));
    if (!(sd[c] > 0.0)) throw ContractError("receptive fields: coordinate " + std::to_string(c) + " has zero spread");
  }
  std::vector<ReceptiveField> fields(config.channels);
  for (auto& f : fields) {
    f.center.resize(D);
    f.width.resize(D);
    for (std::size_t c = 0; c < D; ++c) f.center[c] = uniform(rng, mean[c] - 2.0 * sd[c], mean[c] + 2.0 * sd[c]);
    for (std::size_t c = 0; c < D; ++c) f.width[c] = uniform(rng, config.sigma_min, config.sigma_max);
    f.history_width = uniform(rng, config.sigma_min, config.sigma_max);
    f.max_rate = uniform(rng, config.fr_min, config.fr_max);
  }
  return fields;
}

double tuning_term(const ReceptiveField& field, std::span<const double> z) {
  if (z.size() != field.center.size()) throw DimensionError("tuning: feature width mismatch");
  double e = field.max_rate;
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double d = z[c] - field.center[c];
    e -= d * d / (2.0 * field.width[c] * field.width[c]);
  }
  return std::exp(e);
}

double history_term(const ReceptiveField& field, double t, std::span<const double> spike_times, HistoryMode mode) {
  if (spike_times.empty()) return 1.0;
  const double two_var = 2.0 * field.history_width * field.history_width;
  auto one = [&](double s) { return 1.0 - std::exp(-(t - s) * (t - s) / two_var); };
  if (mode == HistoryMode::last_spike) return one(spike_times.back());
  double acc = 0.0;
  for (double s : spike_times) acc += one(s);
  return acc;
}

double intensity(const ReceptiveField& field, std::span<const double> z, double t,
                 std::span<const double> spike_times, HistoryMode mode) {
  return tuning_term(field, z) * history_term(field, t, spike_times, mode);
}

double spike_probability(double rate, double bin_width) { return 1.0 - std::exp(-rate * bin_width); }

namespace {

void simulate_channel(const Tensor& z, const ReceptiveField& field, const SpikeSimConfig& config,
                      std::uint64_t seed, std::size_t j, Tensor& out) {
  Rng rng(derive_seed(seed, j));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> spikes;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const double t = static_cast<double>(i + 1) * config.bin_width;
    const double rate = intensity(field, z.row_span(i), t, spikes, config.history);
    const double draw = u01(rng);
    if (draw < spike_probability(rate, config.bin_width)) {
      out(i, j) = 1.0;
      spikes.push_back(t);
    }
  }
}

void check_inputs(const Tensor& z, std::span<const ReceptiveField> fields) {
  for (const auto& f : fields) {
    if (f.center.size() != z.cols()) throw DimensionError("simulate_spikes: field/feature width mismatch");
  }
}

}  // namespace

Tensor simulate_spikes(const Tensor& z, std::span<const ReceptiveField> fields, const SpikeSimConfig& config,
                       std::uint64_t seed) {
  config.validate();
  check_inputs(z, fields);
  Tensor out = Tensor::zeros(z.rows(), fields.size());
#pragma omp parallel for schedule(dynamic)
  for (long lj = 0; lj < static_cast<long>(fields.size()); ++lj) {
    const auto j = static_cast<std::size_t>(lj);
    simulate_channel(z, fields[j], config, seed, j, out);
  }
  return out;
}

namespace serial {
Tensor simulate_spikes(const Tensor& z, std::span<const ReceptiveField> fields, const SpikeSimConfig& config,
                       std::uint64_t seed) {
  config.validate();
  check_inputs(z, fields);
  Tensor out = Tensor::zeros(z.rows(), fields.size());
  for (std::size_t j = 0; j < fields.size(); ++j) simulate_channel(z, fields[j], config, seed, j, out);
  return out;
}
}  // namespace serial

}  // namespace alternator
