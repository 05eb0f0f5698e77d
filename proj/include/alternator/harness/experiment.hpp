#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alternator/harness/experiment_config.hpp"
#include "alternator/metrics/metrics.hpp"
#include "alternator/metrics/report.hpp"

namespace alternator {

inline constexpr const char* kVersion = "0.1.0";
// When set, relative output directories are placed under this root.
inline constexpr const char* kOutputRootEnv = "ALTERNATOR_OUTPUT_ROOT";

// Fixed layout of a run directory.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path dataset() const { return root / "dataset"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path model_json() const { return root / "model.json"; }
  std::filesystem::path loss_csv() const { return root / "loss.csv"; }
  std::filesystem::path metrics_json() const { return root / "metrics.json"; }
  std::filesystem::path metrics_csv() const { return root / "metrics.csv"; }
  std::filesystem::path plots() const { return root / "plots"; }
  std::filesystem::path report() const { return root / "report.md"; }
};

// `requested` (e.g. from --out) wins over the config's output; the default is
// runs/<name>. Relative results are prefixed by $ALTERNATOR_OUTPUT_ROOT if set.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::optional<std::filesystem::path>& requested = std::nullopt);
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

PairedDataset build_dataset(const ExperimentConfig& config);
// D_x, D_z and T of the model trained on `data`.
AlternatorConfig model_config_for(const ExperimentConfig& config, const PairedDataset& data);

// model.json describes the architecture and names the checkpoint next to it.
struct SavedModel {
  AlternatorConfig config;
  NetworkShape shape;
  ModelParams params;

  Alternator model() const { return Alternator(config, params); }
};
void save_model(const std::filesystem::path& dir, const std::string& stem, const AlternatorConfig& config,
                const NetworkShape& shape, const ModelParams& params);
// Accepts a model.json path or a run directory containing one.
SavedModel load_model(const std::filesystem::path& path);

enum class SweepMode { forecast, impute };
std::string to_string(SweepMode mode);

struct SweepRow {
  double rate = 0.0;
  std::size_t hidden_steps = 0;
  MeanStderr mae, mse, cc, crps, ssr;
};

// For each rate, hides steps of every sequence (forecast: the final ceil(rT);
// impute: ceil(rT) uniformly drawn steps), reconstructs them with an ensemble
// of `ensemble_size` rollouts and scores the hidden steps only. The target is
// the feature trajectory when `features` is given (seq2seq) and the
// observations otherwise. Per-sequence values are averaged with standard errors.
std::vector<SweepRow> eval_sweep(const Alternator& model, std::span<const Tensor> x,
                                 std::span<const Tensor> features, SweepMode mode, std::span<const double> rates,
                                 std::size_t ensemble_size, std::uint64_t seed);

// Recomputes the metric report of a trained model; pure function of its inputs.
MetricReport evaluate(const ExperimentConfig& config, const PairedDataset& data, const Alternator& model);

struct RunOptions {
  bool evaluate = true;
  std::function<void(const std::string&)> log;
};

struct RunSummary {
  RunPaths paths;
  std::vector<LossReport> history;
  MetricReport metrics;
};

// simulate -> train -> evaluate, writing the full artifact set into `out`.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out,
                          const RunOptions& options = {});

// Markdown tables for a metric report.
std::string render_report(const ExperimentConfig& config, const MetricReport& metrics);
// Re-evaluates a run directory, checks the result against its metrics.json and
// writes report.md. Throws NumericError when the recomputed metrics differ.
std::string regenerate_report(const std::filesystem::path& run_dir);

std::string loss_history_csv(std::span<const LossReport> history);

}  // namespace alternator
