#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "alternator/datagen/lorenz.hpp"
#include "alternator/datagen/spikes.hpp"
#include "alternator/numerics/tensor.hpp"

namespace alternator {

// Paired sequences (x_b, y_b), each T rows, with a deterministic split.
// For the Lorenz task x = spikes (T x J), y = min-max normalized features
// (T x 3) and y_raw the unnormalized trajectory.
struct PairedDataset {
  std::string kind;
  std::vector<Tensor> x;
  std::vector<Tensor> y;
  std::vector<Tensor> y_raw;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<ReceptiveField> fields;
  // Generator parameters, seeds and per-sequence metadata; enough to regenerate.
  nlohmann::json manifest;

  std::size_t size() const { return x.size(); }
  std::vector<Tensor> x_at(const std::vector<std::size_t>& idx) const;
  std::vector<Tensor> y_at(const std::vector<std::size_t>& idx) const;
};

struct LorenzDatasetConfig {
  LorenzParams lorenz;
  SpikeSimConfig spikes;
  std::size_t sequences = 300;
  std::size_t test_count = 100;
  std::uint64_t seed = 0;
};

// Sequence i uses seed derive_seed(seed, i). Receptive fields are drawn once,
// from sequence 0's normalized trajectory, and shared by every sequence.
PairedDataset make_lorenz_dataset(const LorenzDatasetConfig& config);

// Linear-Gaussian toy: y_t = a y_{t-1} + q eps (D_y = 1), x_t = c y_t + r eps.
struct LinearGaussianConfig {
  std::size_t sequences = 200;
  std::size_t test_count = 0;
  std::size_t steps = 10;
  std::size_t obs_dim = 2;
  double transition = 0.9;
  double process_noise = 0.3;
  double obs_noise = 0.1;
  std::uint64_t seed = 0;
};

PairedDataset make_linear_gaussian_dataset(const LinearGaussianConfig& config);

// Deterministic split: a seeded permutation, first `test_count` indices are test.
void split_dataset(PairedDataset& data, std::size_t test_count, std::uint64_t seed);

// Directory layout: manifest.json, seq_XXXX.csv (x columns, y as z columns),
// seq_XXXX_raw.csv when raw features differ from y.
void save_dataset(const std::filesystem::path& dir, const PairedDataset& data);
PairedDataset load_dataset(const std::filesystem::path& dir);

nlohmann::json to_json(const LorenzParams& p);
nlohmann::json to_json(const SpikeSimConfig& c);
nlohmann::json to_json(const ReceptiveField& f);
LorenzParams lorenz_params_from_json(const nlohmann::json& j);
SpikeSimConfig spike_config_from_json(const nlohmann::json& j);
ReceptiveField receptive_field_from_json(const nlohmann::json& j);

}  // namespace alternator
