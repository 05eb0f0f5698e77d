#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "alternator/datagen/dataset.hpp"
#include "alternator/model/alternator.hpp"
#include "alternator/training/trainer.hpp"

namespace alternator {

// Invalid configuration: bad syntax, unknown key, wrong type or a violated
// sub-config invariant. Messages carry the field path or line/column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task { generative, seq2seq };
enum class DataSource { lorenz, linear_gaussian, file };

struct ModelSection {
  double sigma_x = 0.3;
  double sigma_z = 0.1;
  // One value = constant schedule; otherwise alpha_1..alpha_T.
  std::vector<double> alpha{0.3};
  // Generative task only; seq2seq takes D_z from the targets.
  std::size_t feature_dim = 0;
  NetworkShape network;
};

struct DataSection {
  DataSource source = DataSource::lorenz;
  LorenzDatasetConfig lorenz;
  LinearGaussianConfig linear_gaussian;
  std::filesystem::path path;  // saved dataset directory (source = file)
};

struct EvalSection {
  std::vector<std::string> metrics{"mae", "mse", "cc"};
  std::size_t ensemble_size = 20;
  std::vector<double> forecast_rates;
  std::vector<double> impute_rates;
  std::size_t score_samples = 100;
  std::size_t plot_sequences = 2;

  bool wants(const std::string& metric) const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Task task = Task::seq2seq;
  std::uint64_t seed = 0;
  ModelSection model;
  TrainConfig train;
  std::size_t checkpoint_every = 0;  // 0: final checkpoint only
  DataSection data;
  EvalSection eval;
  std::filesystem::path output;  // empty: runs/<name>

  // Model config once the data dimensions are known.
  AlternatorConfig model_config(std::size_t obs_dim, std::size_t feature_dim, std::size_t length) const;

  // Applies the experiment seed to every derived stream (data, init, train, eval).
  void set_seed(std::uint64_t seed);
  std::uint64_t init_seed() const;
  std::uint64_t eval_seed() const;

  void validate() const;
  // Fully resolved form; from_json(to_json()) round-trips.
  nlohmann::json to_json() const;
};

// Parses a JSON-with-comments document. Unknown keys and wrong types raise
// ConfigError naming the offending path; relative file paths resolve against
// `base_dir`. A run manifest (object with a "config" member) is accepted too.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Shipped profiles: lorenz_seq2seq, lorenz_forecast_sweep, lorenz_impute_sweep,
// generative_toy.
std::vector<std::string> profile_names();
ExperimentConfig builtin_profile(const std::string& name);

std::string to_string(Task task);

}  // namespace alternator
