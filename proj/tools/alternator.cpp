// Command-line front end: one subcommand per module operation.
//
// Exit codes: 0 ok, 1 configuration or usage error, 2 runtime error.
// Diagnostics go to stderr as `error: <subcommand>: <message>`.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alternator/csv.hpp"
#include "alternator/errors.hpp"
#include "alternator/harness/experiment.hpp"
#include "alternator/model/trajectory.hpp"
#include "alternator/numerics/checkpoint.hpp"
#include "alternator/platform.hpp"

namespace fs = std::filesystem;
using namespace alternator;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Common {
  std::string config;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool with_config = true) {
  if (with_config) {
    sub->add_option("--config", c.config, "Experiment config (JSON with comments) or run manifest");
    sub->add_option("--profile", c.profile, "Built-in profile name");
  }
  sub->add_option("--seed", c.seed, "Override the experiment seed");
  sub->add_option("--out", c.out, "Output path (relative paths honour $ALTERNATOR_OUTPUT_ROOT)");
}

ExperimentConfig resolve_config(const Common& c, const std::string& fallback_profile) {
  if (!c.config.empty() && !c.profile.empty()) throw ConfigError("--config and --profile are mutually exclusive");
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    cfg = load_experiment_config(c.config);
  } else {
    std::string name = c.profile.empty() ? fallback_profile : c.profile;
    if (name.empty()) throw ConfigError("one of --config or --profile is required");
    cfg = builtin_profile(name);
  }
  if (c.seed) {
    cfg.set_seed(*c.seed);
    cfg.validate();
  }
  return cfg;
}

// Refuses to overwrite a file the command reads.
void guard_inputs(const std::string& out, std::initializer_list<std::string> inputs) {
  if (out.empty()) return;
  for (const auto& in : inputs) {
    if (!in.empty() && fs::exists(in) && fs::exists(resolve_output_path(out)) &&
        fs::equivalent(in, resolve_output_path(out))) {
      throw ConfigError("--out would overwrite input " + in);
    }
  }
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const fs::path path = resolve_output_path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

Tensor read_observations(const std::string& path) {
  if (path.empty()) throw ConfigError("--input is required");
  if (!fs::exists(path)) throw FormatError("input not found: " + path);
  return read_trajectory_csv(path).x;
}

// Untrained model with the dimensions a profile would train.
SavedModel model_from_profile(const ExperimentConfig& cfg) {
  std::size_t dx = 0, dz = 0, T = 0;
  switch (cfg.data.source) {
    case DataSource::lorenz:
      dx = cfg.data.lorenz.spikes.channels, dz = 3, T = cfg.data.lorenz.lorenz.steps;
      break;
    case DataSource::linear_gaussian:
      dx = cfg.data.linear_gaussian.obs_dim, dz = 1, T = cfg.data.linear_gaussian.steps;
      break;
    case DataSource::file:
      throw ConfigError("--model is required for file-backed configs");
  }
  if (cfg.task == Task::generative) dz = cfg.model.feature_dim;
  SavedModel m;
  m.config = cfg.model_config(dx, dz, T);
  m.config.validate();
  m.shape = cfg.model.network;
  Rng rng(cfg.init_seed());
  m.params = ModelParams::init(m.config, m.shape, rng);
  return m;
}

SavedModel resolve_model(const std::string& model_path, const Common& c) {
  if (!model_path.empty()) return load_model(model_path);
  return model_from_profile(resolve_config(c, "generative_toy"));
}

std::uint64_t seed_or(const Common& c, std::uint64_t fallback) { return c.seed.value_or(fallback); }

void log_stderr(const std::string& line) { std::cerr << line << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Alternator sequence models: simulate, train, generate, encode, impute, forecast, score, evaluate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  std::string model_path, input_path, run_dir, mode = "forecast";
  std::size_t length = 0, horizon = 1, samples = 100, ensemble = 20, sequences = 0;
  std::vector<double> rates;
  bool quiet = false;

  auto* simulate = app.add_subcommand("simulate", "Simulate a paired dataset (lorenz or linear_gaussian profile)");
  add_common(simulate, common);
  simulate->add_option("--sequences", sequences, "Number of sequences (default: profile value)");

  auto* train = app.add_subcommand("train", "Simulate data and train; writes checkpoints and loss.csv");
  add_common(train, common);
  train->add_flag("--quiet", quiet, "No progress output");

  auto* run = app.add_subcommand("run", "Full experiment: simulate, train, evaluate, plot");
  add_common(run, common);
  run->add_flag("--quiet", quiet, "No progress output");

  auto* generate = app.add_subcommand("generate", "Sample a trajectory by ancestral sampling");
  add_common(generate, common);
  generate->add_option("--model", model_path, "model.json or run directory (default: untrained profile model)");
  generate->add_option("--T", length, "Trajectory length (default: model length)");

  auto* encode = app.add_subcommand("encode", "Deterministic feature recursion for an observation CSV");
  add_common(encode, common, false);
  encode->add_option("--model", model_path, "model.json or run directory")->required();
  encode->add_option("--input", input_path, "Trajectory CSV")->required();

  auto* impute = app.add_subcommand("impute", "Fill unobserved steps (mask column) of a trajectory CSV");
  add_common(impute, common, false);
  impute->add_option("--model", model_path, "model.json or run directory")->required();
  impute->add_option("--input", input_path, "Trajectory CSV with a mask column")->required();

  auto* forecast = app.add_subcommand("forecast", "Extend an observation prefix");
  add_common(forecast, common, false);
  forecast->add_option("--model", model_path, "model.json or run directory")->required();
  forecast->add_option("--input", input_path, "Prefix trajectory CSV")->required();
  forecast->add_option("--horizon", horizon, "Steps to forecast")->check(CLI::PositiveNumber);

  auto* score = app.add_subcommand("score", "Monte-Carlo log-likelihood of an observation sequence");
  add_common(score, common, false);
  score->add_option("--model", model_path, "model.json or run directory")->required();
  score->add_option("--input", input_path, "Trajectory CSV")->required();
  score->add_option("--samples", samples, "Number of ancestral samples K")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Forecast or imputation sweep over a run's test split");
  add_common(eval, common, false);
  eval->add_option("--run", run_dir, "Run directory")->required();
  eval->add_option("--mode", mode, "forecast or impute")->check(CLI::IsMember({"forecast", "impute"}));
  eval->add_option("--rates", rates, "Rates in (0, 1)")->delimiter(',')->required();
  eval->add_option("--ensemble", ensemble, "Ensemble size")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Recompute a run's metrics and rewrite report.md");
  add_common(report, common, false);
  report->add_option("--run", run_dir, "Run directory (defaults to --out)");

  std::string active = "alternator";
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    for (auto* sub : app.get_subcommands()) active = sub->get_name();
    std::cerr << "error: " << active << ": " << e.what() << "\n";
    return kConfigError;
  }
  active = app.get_subcommands().front()->get_name();

  try {
    if (*simulate) {
      auto name = common.profile;
      if (name == "lorenz") common.profile = "lorenz_seq2seq";
      if (name == "linear_gaussian") common.profile = "generative_toy";
      auto cfg = resolve_config(common, "lorenz_seq2seq");
      if (sequences > 0) {
        cfg.data.lorenz.sequences = cfg.data.linear_gaussian.sequences = sequences;
        const std::size_t test = std::min(cfg.data.lorenz.test_count, sequences - 1);
        cfg.data.lorenz.test_count = cfg.data.linear_gaussian.test_count = test;
      }
      if (cfg.data.source == DataSource::file) throw ConfigError("simulate needs a synthetic data source");
      const auto data = build_dataset(cfg);
      const fs::path out = common.out.empty() ? resolve_output_dir(cfg) / "dataset" : resolve_output_path(common.out);
      save_dataset(out, data);
      std::cout << "wrote " << data.size() << " " << data.kind << " sequences to " << out.string() << ": x "
                << data.x[0].rows() << "x" << data.x[0].cols() << ", features " << data.y[0].rows() << "x"
                << data.y[0].cols() << "\n";
    } else if (*train || *run) {
      const auto cfg = resolve_config(common, "");
      const fs::path out = resolve_output_dir(cfg, common.out.empty() ? std::nullopt : std::optional<fs::path>(common.out));
      RunOptions opts;
      opts.evaluate = static_cast<bool>(*run);
      if (!quiet) opts.log = log_stderr;
      const auto summary = run_experiment(cfg, out, opts);
      if (*run) std::cout << summary.metrics.to_csv();
      std::cout << "artifacts in " << out.string() << "\n";
    } else if (*generate) {
      const auto m = resolve_model(model_path, common);
      Rng rng(seed_or(common, 0));
      const auto traj = m.model().generate(rng, length > 0 ? length : m.config.length);
      emit(common.out, trajectory_to_csv(traj));
    } else if (*encode) {
      guard_inputs(common.out, {input_path});
      const auto m = load_model(model_path);
      const Tensor z = m.model().encode(read_observations(input_path));
      emit(common.out, matrix_to_csv(z, "z"));
    } else if (*impute) {
      guard_inputs(common.out, {input_path});
      const auto m = load_model(model_path);
      if (!fs::exists(input_path)) throw FormatError("input not found: " + input_path);
      const auto traj = read_trajectory_csv(input_path);
      Rng rng(seed_or(common, 0));
      emit(common.out, trajectory_to_csv(m.model().impute(rng, Trajectory{traj.x, {}, traj.mask})));
    } else if (*forecast) {
      guard_inputs(common.out, {input_path});
      const auto m = load_model(model_path);
      Rng rng(seed_or(common, 0));
      emit(common.out, trajectory_to_csv(m.model().forecast_trajectory(rng, read_observations(input_path), horizon)));
    } else if (*score) {
      const auto m = load_model(model_path);
      Rng rng(seed_or(common, 0));
      const double ll = m.model().score_loglik(read_observations(input_path), samples, rng);
      emit(common.out, "loglik," + csv::format_double(ll) + "\n");
    } else if (*eval) {
      for (double r : rates) {
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("--rates: every rate must lie in (0, 1)");
      }
      const auto m = load_model(run_dir);
      const auto data = load_dataset(RunPaths{run_dir}.dataset());
      if (data.test.empty()) throw ConfigError("run has no test split");
      const auto x = data.x_at(data.test);
      const auto y = data.y_at(data.test);
      // A seq2seq run's targets are its dataset features; a generative run reconstructs observations.
      const auto manifest = nlohmann::json::parse(read_file(RunPaths{run_dir}.manifest()));
      const bool features = manifest.at("config").at("task").get<std::string>() == "seq2seq";
      const auto sweep_mode = mode == "impute" ? SweepMode::impute : SweepMode::forecast;
      const auto rows = eval_sweep(m.model(), x, features ? std::span<const Tensor>(y) : std::span<const Tensor>(),
                                   sweep_mode, rates, ensemble, seed_or(common, 0));
      std::string text = "rate,hidden_steps,mae,mae_stderr,mse,mse_stderr,cc,cc_stderr,crps,crps_stderr,ssr,ssr_stderr\n";
      for (const auto& r : rows) {
        text += csv::format_double(r.rate) + "," + std::to_string(r.hidden_steps);
        for (const auto& s : {r.mae, r.mse, r.cc, r.crps, r.ssr}) {
          text += "," + csv::format_double(s.mean) + "," + csv::format_double(s.stderr_);
        }
        text += "\n";
      }
      emit(common.out, text);
    } else if (*report) {
      const std::string dir = run_dir.empty() ? common.out : run_dir;
      if (dir.empty()) throw ConfigError("--run is required");
      std::cout << regenerate_report(dir);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << active << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << active << ": " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
