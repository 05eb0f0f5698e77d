#include "alternator/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "alternator/csv.hpp"
#include "alternator/errors.hpp"
#include "alternator/harness/svg_plot.hpp"
#include "alternator/numerics/checkpoint.hpp"

namespace alternator {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }
const char* output_name(OutputActivation a) { return a == OutputActivation::tanh ? "tanh" : "identity"; }

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw FormatError("model.json: unknown activation '" + s + "'");
}

OutputActivation parse_output(const std::string& s) {
  if (s == "identity") return OutputActivation::identity;
  if (s == "tanh") return OutputActivation::tanh;
  throw FormatError("model.json: unknown output activation '" + s + "'");
}

std::string rate_tag(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", rate);
  return buf;
}

std::string epoch_tag(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%04zu", epoch);
  return buf;
}

std::size_t hidden_count(double rate, std::size_t T) {
  // Rates like 0.3 are not exact in binary; shave rounding noise before ceil.
  const auto h = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(T) - 1e-9));
  return std::clamp<std::size_t>(h, 1, T);
}

// Pearson CC needs variance on both sides; a flat window has no defined value.
double safe_cc(const Tensor& pred, const Tensor& truth) {
  try {
    return pearson_cc(pred, truth);
  } catch (const ContractError&) {
    return std::nan("");
  }
}

MeanStderr finite_mean_stderr(const std::vector<double>& values) {
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  if (finite.empty()) return {std::nan(""), std::nan("")};
  if (finite.size() == 1) return {finite[0], 0.0};
  return mean_stderr(finite);
}

Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& rows) {
  Tensor out = Tensor::zeros(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row_span(rows[i]);
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

}  // namespace

std::string to_string(SweepMode mode) { return mode == SweepMode::forecast ? "forecast" : "impute"; }

fs::path resolve_output_path(const fs::path& path) {
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') return fs::path(root) / path;
  return path;
}

fs::path resolve_output_dir(const ExperimentConfig& config, const std::optional<fs::path>& requested) {
  if (requested && !requested->empty()) return resolve_output_path(*requested);
  if (!config.output.empty()) return resolve_output_path(config.output);
  return resolve_output_path(fs::path("runs") / config.name);
}

PairedDataset build_dataset(const ExperimentConfig& config) {
  switch (config.data.source) {
    case DataSource::lorenz:
      return make_lorenz_dataset(config.data.lorenz);
    case DataSource::linear_gaussian:
      return make_linear_gaussian_dataset(config.data.linear_gaussian);
    case DataSource::file:
      return load_dataset(config.data.path);
  }
  throw ContractError("unknown data source");
}

AlternatorConfig model_config_for(const ExperimentConfig& config, const PairedDataset& data) {
  if (data.size() == 0) throw ConfigError("config: data: dataset is empty");
  const std::size_t T = data.x[0].rows();
  const std::size_t dz = config.task == Task::seq2seq ? data.y[0].cols() : config.model.feature_dim;
  if (config.task == Task::seq2seq && config.model.feature_dim != 0 && config.model.feature_dim != dz) {
    throw ConfigError("config: model.feature_dim: " + std::to_string(config.model.feature_dim) +
                      " does not match the target width " + std::to_string(dz));
  }
  if (config.model.alpha.size() != 1 && config.model.alpha.size() != T) {
    throw ConfigError("config: model.alpha: schedule has " + std::to_string(config.model.alpha.size()) +
                      " entries, sequences have " + std::to_string(T));
  }
  auto cfg = config.model_config(data.x[0].cols(), dz, T);
  cfg.validate();
  return cfg;
}

void save_model(const fs::path& dir, const std::string& stem, const AlternatorConfig& config, const NetworkShape& shape,
                const ModelParams& params) {
  fs::create_directories(dir);
  const auto ckpt = params.to_checkpoint(config);
  write_checkpoint(dir / (stem + ".altn"), ckpt);
  write_file_atomic(dir / (stem + ".txt"), export_text(ckpt));
  json j{{"obs_dim", config.obs_dim},
         {"feature_dim", config.feature_dim},
         {"length", config.length},
         {"sigma_x", config.sigma_x},
         {"sigma_z", config.sigma_z},
         {"alpha", config.alpha},
         {"hidden_dims", shape.hidden_dims},
         {"activation", activation_name(shape.activation)},
         {"output_activation", output_name(shape.output_activation)},
         {"checkpoint", stem + ".altn"},
         {"digest", ckpt.digest}};
  write_file_atomic(dir / (stem + ".json"), j.dump(2) + "\n");
}

SavedModel load_model(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "model.json" : path;
  if (!fs::exists(file)) throw FormatError("model description not found: " + file.string());
  SavedModel out;
  json j;
  try {
    j = json::parse(read_file(file));
    out.config.obs_dim = j.at("obs_dim").get<std::size_t>();
    out.config.feature_dim = j.at("feature_dim").get<std::size_t>();
    out.config.length = j.at("length").get<std::size_t>();
    out.config.sigma_x = j.at("sigma_x").get<double>();
    out.config.sigma_z = j.at("sigma_z").get<double>();
    out.config.alpha = j.at("alpha").get<std::vector<double>>();
    out.shape.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    out.shape.activation = parse_activation(j.at("activation").get<std::string>());
    out.shape.output_activation = parse_output(j.at("output_activation").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  out.config.validate();
  const auto ckpt = read_checkpoint(file.parent_path() / j.at("checkpoint").get<std::string>());
  out.params = ModelParams::from_checkpoint(ckpt, out.config, out.shape);
  return out;
}

std::vector<SweepRow> eval_sweep(const Alternator& model, std::span<const Tensor> x, std::span<const Tensor> features,
                                 SweepMode mode, std::span<const double> rates, std::size_t ensemble_size,
                                 std::uint64_t seed) {
  if (rates.empty()) throw ContractError("eval_sweep: empty rate list");
  if (x.empty()) throw ContractError("eval_sweep: no sequences");
  if (!features.empty() && features.size() != x.size()) throw DimensionError("eval_sweep: x/feature count mismatch");
  if (ensemble_size == 0) throw ContractError("eval_sweep: ensemble_size must be >= 1");
  for (double r : rates) {
    if (!(r > 0.0 && r < 1.0)) throw ContractError("eval_sweep: rates must lie in (0, 1)");
  }
  const bool on_features = !features.empty();

  std::vector<SweepRow> table;
  for (std::size_t ri = 0; ri < rates.size(); ++ri) {
    const std::uint64_t rate_seed = derive_seed(seed, ri);
    const std::size_t n = x.size();
    std::vector<double> mae_v(n), mse_v(n), cc_v(n), crps_v(n), ssr_v(n);
    std::size_t hidden_total = 0;

    // Each sequence owns its random streams, so the table does not depend on
    // the thread count; aggregation below runs in sequence order.
#pragma omp parallel for schedule(dynamic) reduction(+ : hidden_total)
    for (long li = 0; li < static_cast<long>(n); ++li) {
      const auto i = static_cast<std::size_t>(li);
      const Tensor& xi = x[i];
      const std::size_t T = xi.rows();
      const std::size_t h = hidden_count(rates[ri], T);
      const std::uint64_t seq_seed = derive_seed(rate_seed, i);

      std::vector<bool> mask(T, true);
      if (mode == SweepMode::forecast) {
        std::fill(mask.end() - static_cast<std::ptrdiff_t>(h), mask.end(), false);
      } else {
        std::vector<std::size_t> order(T);
        for (std::size_t t = 0; t < T; ++t) order[t] = t;
        Rng mask_rng(derive_seed(seq_seed, 0));
        for (std::size_t k = 0; k < h; ++k) {
          const std::size_t j = k + static_cast<std::size_t>(mask_rng() % (T - k));
          std::swap(order[k], order[j]);
          mask[order[k]] = false;
        }
      }
      std::vector<std::size_t> hidden;
      for (std::size_t t = 0; t < T; ++t) {
        if (!mask[t]) hidden.push_back(t);
      }

      Trajectory masked{xi, {}, mask};
      for (std::size_t t : hidden) {
        for (double& v : masked.x.row_span(t)) v = std::nan("");
      }

      Ensemble ens;
      ens.truth = gather_rows(on_features ? features[i] : xi, hidden);
      for (std::size_t m = 0; m < ensemble_size; ++m) {
        Rng rng(derive_seed(seq_seed, 1 + m));
        const auto out = model.impute(rng, masked);
        if (on_features) {
          Tensor z = out.z.row_slice(1, T + 1);
          ens.members.push_back(gather_rows(z, hidden));
        } else {
          ens.members.push_back(gather_rows(out.x, hidden));
        }
      }
      const Tensor mean = ens.mean();
      mae_v[i] = mae(mean, ens.truth);
      mse_v[i] = mse(mean, ens.truth);
      cc_v[i] = safe_cc(mean, ens.truth);
      crps_v[i] = crps_ensemble(ens);
      ssr_v[i] = ensemble_size >= 2 && mse_v[i] > 0.0 ? ssr(ens) : std::nan("");
      hidden_total += h;
    }

    SweepRow row;
    row.rate = rates[ri];
    row.hidden_steps = hidden_total / n;
    row.mae = finite_mean_stderr(mae_v);
    row.mse = finite_mean_stderr(mse_v);
    row.cc = finite_mean_stderr(cc_v);
    row.crps = finite_mean_stderr(crps_v);
    row.ssr = finite_mean_stderr(ssr_v);
    table.push_back(row);
  }
  return table;
}

namespace {

void add_sweep(MetricReport& rep, const EvalSection& eval, SweepMode mode, const std::vector<SweepRow>& rows) {
  std::vector<double> mae_all, mse_all, cc_all;
  for (const auto& r : rows) {
    const std::string prefix = to_string(mode) + "@" + rate_tag(r.rate) + "/";
    if (eval.wants("mae")) rep.add(prefix + "mae", r.mae.mean, r.mae.stderr_);
    if (eval.wants("mse")) rep.add(prefix + "mse", r.mse.mean, r.mse.stderr_);
    if (eval.wants("cc")) rep.add(prefix + "cc", r.cc.mean, r.cc.stderr_);
    if (eval.wants("crps")) rep.add(prefix + "crps", r.crps.mean, r.crps.stderr_);
    if (eval.wants("ssr")) rep.add(prefix + "ssr", r.ssr.mean, r.ssr.stderr_);
    mae_all.push_back(r.mae.mean);
    mse_all.push_back(r.mse.mean);
    cc_all.push_back(r.cc.mean);
  }
  // Equal weight per rate.
  const std::string prefix = to_string(mode) + "@all/";
  auto avg = [](const std::vector<double>& v) { return finite_mean_stderr(v); };
  if (eval.wants("mae")) rep.add(prefix + "mae", avg(mae_all).mean, avg(mae_all).stderr_);
  if (eval.wants("mse")) rep.add(prefix + "mse", avg(mse_all).mean, avg(mse_all).stderr_);
  if (eval.wants("cc")) rep.add(prefix + "cc", avg(cc_all).mean, avg(cc_all).stderr_);
}

}  // namespace

MetricReport evaluate(const ExperimentConfig& config, const PairedDataset& data, const Alternator& model) {
  MetricReport rep;
  const auto& eval = config.eval;
  if (data.test.empty()) return rep;
  const auto x_test = data.x_at(data.test);
  const auto y_test = data.y_at(data.test);

  if (config.task == Task::seq2seq) {
    const bool has_raw = data.kind == "lorenz" && data.manifest.contains("per_sequence");
    std::vector<double> mae_v, mse_v, cc_v, mae_raw, mse_raw, cc_raw;
    for (std::size_t k = 0; k < data.test.size(); ++k) {
      const Tensor pred = seq2seq_predict(model, x_test[k]);
      mae_v.push_back(mae(pred, y_test[k]));
      mse_v.push_back(mse(pred, y_test[k]));
      cc_v.push_back(safe_cc(pred, y_test[k]));
      if (has_raw) {
        const auto& meta = data.manifest.at("per_sequence").at(data.test[k]);
        const Tensor raw = denormalize_minmax(pred, meta.at("min").get<std::vector<double>>(),
                                              meta.at("max").get<std::vector<double>>());
        const Tensor& truth = data.y_raw.at(data.test[k]);
        mae_raw.push_back(mae(raw, truth));
        mse_raw.push_back(mse(raw, truth));
        cc_raw.push_back(safe_cc(raw, truth));
      }
    }
    auto put = [&](const std::string& name, const std::vector<double>& v) {
      if (v.empty()) return;
      const auto s = finite_mean_stderr(v);
      rep.add(name, s.mean, s.stderr_);
    };
    if (eval.wants("mae")) put("mae", mae_v), put("mae_raw", mae_raw);
    if (eval.wants("mse")) put("mse", mse_v), put("mse_raw", mse_raw);
    if (eval.wants("cc")) put("cc", cc_v), put("cc_raw", cc_raw);
  } else if (eval.wants("loglik")) {
    std::vector<double> ll(x_test.size()), ll_shuffled(x_test.size());
    const std::uint64_t seed = derive_seed(config.eval_seed(), 0x10C);
#pragma omp parallel for schedule(dynamic)
    for (long li = 0; li < static_cast<long>(x_test.size()); ++li) {
      const auto k = static_cast<std::size_t>(li);
      Rng rng(derive_seed(seed, k));
      ll[k] = model.score_loglik(x_test[k], config.eval.score_samples, rng);
      // Same sequence with its time order reversed: a trained model should prefer the original.
      Tensor rev = x_test[k];
      const std::size_t T = rev.rows();
      for (std::size_t t = 0; t < T; ++t) {
        auto src = x_test[k].row_span(T - 1 - t);
        std::copy(src.begin(), src.end(), rev.row_span(t).begin());
      }
      Rng rng2(derive_seed(seed, k));
      ll_shuffled[k] = model.score_loglik(rev, config.eval.score_samples, rng2);
    }
    const auto s = finite_mean_stderr(ll);
    const auto r = finite_mean_stderr(ll_shuffled);
    const double T = static_cast<double>(x_test[0].rows());
    rep.add("loglik", s.mean, s.stderr_);
    rep.add("loglik_per_step", s.mean / T, s.stderr_ / T);
    rep.add("loglik_time_reversed", r.mean, r.stderr_);
  }

  const std::span<const Tensor> targets =
      config.task == Task::seq2seq ? std::span<const Tensor>(y_test) : std::span<const Tensor>();
  if (!eval.forecast_rates.empty()) {
    add_sweep(rep, eval, SweepMode::forecast,
              eval_sweep(model, x_test, targets, SweepMode::forecast, eval.forecast_rates, eval.ensemble_size,
                         derive_seed(config.eval_seed(), 1)));
  }
  if (!eval.impute_rates.empty()) {
    add_sweep(rep, eval, SweepMode::impute,
              eval_sweep(model, x_test, targets, SweepMode::impute, eval.impute_rates, eval.ensemble_size,
                         derive_seed(config.eval_seed(), 2)));
  }
  return rep;
}

std::string loss_history_csv(std::span<const LossReport> history) {
  std::string out = "epoch,total,feature_term,observation_term,lr\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch + 1) + "," + csv::format_double(r.total) + "," + csv::format_double(r.feature_term) +
           "," + csv::format_double(r.observation_term) + "," +
           csv::format_double(r.lr) + "\n";
  }
  return out;
}

namespace {

std::vector<double> column_of(const Tensor& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

void write_plots(const ExperimentConfig& config, const PairedDataset& data, const Alternator& model,
                 const std::vector<LossReport>& history, const RunPaths& paths) {
  fs::create_directories(paths.plots());
  {
    PlotSeries total{"total", {}, kPalette[0]}, feature{"feature term", {}, kPalette[1], true},
        obs{"observation term", {}, kPalette[2], true};
    for (const auto& r : history) {
      total.values.push_back(r.total);
      feature.values.push_back(r.feature_term);
      obs.values.push_back(r.observation_term);
    }
    write_file_atomic(paths.plots() / "loss.svg",
                      svg_line_plot({{"training loss", {total, feature, obs}}}, config.name + ": loss", "epoch"));
  }

  const std::size_t count = std::min(config.eval.plot_sequences, data.test.size());
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = data.test[k];
    std::vector<PlotPanel> panels;
    if (config.task == Task::seq2seq) {
      const Tensor pred = seq2seq_predict(model, data.x[idx]);
      for (std::size_t c = 0; c < std::min<std::size_t>(pred.cols(), 4); ++c) {
        panels.push_back({"feature " + std::to_string(c),
                          {{"true", column_of(data.y[idx], c), "#333333"},
                           {"predicted", column_of(pred, c), kPalette[c % 4], true}}});
      }
    } else {
      Rng rng(derive_seed(config.eval_seed(), 0x9107 + k));
      const auto gen = model.generate(rng, data.x[idx].rows());
      for (std::size_t c = 0; c < std::min<std::size_t>(gen.x.cols(), 4); ++c) {
        panels.push_back({"observation " + std::to_string(c),
                          {{"data", column_of(data.x[idx], c), "#333333"},
                           {"generated", column_of(gen.x, c), kPalette[c % 4], true}}});
      }
    }
    char name[64];
    std::snprintf(name, sizeof(name), "test_%04zu.svg", idx);
    write_file_atomic(paths.plots() / name,
                      svg_line_plot(panels, config.name + ": test sequence " + std::to_string(idx), "t"));
  }
}

json seeds_json(const ExperimentConfig& config) {
  return {{"experiment", config.seed},
          {"data", config.seed},
          {"init", config.init_seed()},
          {"train", config.train.seed},
          {"eval", config.eval_seed()}};
}

void log_line(const RunOptions& options, const std::string& msg) {
  if (options.log) options.log(msg);
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, const fs::path& out, const RunOptions& options) {
  config.validate();
  RunSummary summary;
  summary.paths.root = out;
  const RunPaths& paths = summary.paths;
  fs::create_directories(out);

  json manifest{{"name", config.name},
                {"version", kVersion},
                {"config", config.to_json()},
                {"seeds", seeds_json(config)},
                {"status", "started"}};
  write_file_atomic(paths.manifest(), manifest.dump(2) + "\n");

  log_line(options, "building dataset");
  PairedDataset data = build_dataset(config);
  const AlternatorConfig cfg = model_config_for(config, data);
  for (const auto& w : cfg.warnings()) log_line(options, "warning: " + w);
  save_dataset(paths.dataset(), data);

  Rng init_rng(config.init_seed());
  ModelParams init = ModelParams::init(cfg, config.model.network, init_rng);
  const auto x_train = data.x_at(data.train);

  fs::create_directories(paths.checkpoints());
  std::vector<std::string> checkpoints;
  EpochCallback on_epoch = [&](std::size_t epoch, const ModelParams& params, const LossReport& report) {
    const std::size_t done = epoch + 1;
    if (config.checkpoint_every > 0 && done % config.checkpoint_every == 0 && done != config.train.epochs) {
      const auto stem = epoch_tag(done);
      write_checkpoint(paths.checkpoints() / (stem + ".altn"), params.to_checkpoint(cfg));
      checkpoints.push_back("checkpoints/" + stem + ".altn");
    }
    if (done == 1 || done % 50 == 0 || done == config.train.epochs) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "epoch %zu/%zu loss %.6g lr %.3g", done, config.train.epochs, report.total,
                    report.lr);
      log_line(options, buf);
    }
  };

  log_line(options, "training " + to_string(config.task) + " model on " + std::to_string(x_train.size()) +
                        " sequences");
  TrainResult result = config.task == Task::seq2seq
                           ? train_seq2seq(cfg, std::move(init), x_train, data.y_at(data.train), config.train, on_epoch)
                           : train_generative(cfg, std::move(init), x_train, config.train, on_epoch);
  summary.history = result.history;
  write_file_atomic(paths.loss_csv(), loss_history_csv(result.history));
  save_model(paths.root, "model", cfg, config.model.network, result.params);
  checkpoints.push_back("model.altn");

  const Alternator model(cfg, result.params);
  std::vector<std::string> artifacts{"manifest.json", "dataset/manifest.json", "model.json", "model.altn",
                                     "model.txt", "loss.csv"};
  if (options.evaluate) {
    log_line(options, "evaluating on " + std::to_string(data.test.size()) + " held-out sequences");
    summary.metrics = evaluate(config, data, model);
    write_file_atomic(paths.metrics_json(), summary.metrics.to_json().dump(2) + "\n");
    write_file_atomic(paths.metrics_csv(), summary.metrics.to_csv());
    write_plots(config, data, model, result.history, paths);
    write_file_atomic(paths.report(), render_report(config, summary.metrics));
    for (auto a : {"metrics.json", "metrics.csv", "plots/loss.svg", "report.md"}) artifacts.push_back(a);
  }

  manifest["status"] = "complete";
  manifest["checkpoints"] = checkpoints;
  manifest["artifacts"] = artifacts;
  manifest["model"] = {{"obs_dim", cfg.obs_dim}, {"feature_dim", cfg.feature_dim}, {"length", cfg.length}};
  manifest["data"] = {{"kind", data.kind}, {"sequences", data.size()}, {"train", data.train.size()},
                      {"test", data.test.size()}};
  write_file_atomic(paths.manifest(), manifest.dump(2) + "\n");
  return summary;
}

std::string render_report(const ExperimentConfig& config, const MetricReport& metrics) {
  std::string out = "# " + config.name + "\n\n";
  out += "task: " + to_string(config.task) + ", seed: " + std::to_string(config.seed) + "\n\n";

  // Headline metrics first, then one table per sweep with rates as rows.
  std::vector<const MetricRow*> headline;
  std::vector<std::string> sweeps;
  for (const auto& r : metrics.rows) {
    const auto at = r.metric.find('@');
    if (at == std::string::npos) {
      headline.push_back(&r);
    } else {
      const auto mode = r.metric.substr(0, at);
      if (std::find(sweeps.begin(), sweeps.end(), mode) == sweeps.end()) sweeps.push_back(mode);
    }
  }
  if (!headline.empty()) {
    out += "| metric | value | stderr |\n|---|---|---|\n";
    for (const auto* r : headline) {
      out += "| " + r->metric + " | " + csv::format_double(r->value) + " | " + csv::format_double(r->stderr_) + " |\n";
    }
    out += "\n";
  }
  for (const auto& mode : sweeps) {
    std::vector<std::string> rates, names;
    for (const auto& r : metrics.rows) {
      if (r.metric.rfind(mode + "@", 0) != 0) continue;
      const auto rest = r.metric.substr(mode.size() + 1);
      const auto slash = rest.find('/');
      const auto rate = rest.substr(0, slash);
      const auto name = rest.substr(slash + 1);
      if (std::find(rates.begin(), rates.end(), rate) == rates.end()) rates.push_back(rate);
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    }
    out += "## " + mode + " sweep\n\n| rate |";
    for (const auto& n : names) out += " " + n + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < names.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& rate : rates) {
      out += "| " + rate + " |";
      for (const auto& n : names) {
        const auto* r = metrics.find(mode + "@" + rate + "/" + n);
        out += r ? " " + csv::format_double(r->value) + " ± " + csv::format_double(r->stderr_) + " |" : " |";
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

std::string regenerate_report(const fs::path& run_dir) {
  const RunPaths paths{run_dir};
  if (!fs::exists(paths.manifest())) throw FormatError("not a run directory (no manifest.json): " + run_dir.string());
  json manifest;
  try {
    manifest = json::parse(read_file(paths.manifest()));
  } catch (const json::exception& e) {
    throw FormatError(paths.manifest().string() + ": " + e.what());
  }
  if (manifest.value("status", "") != "complete") throw FormatError("run did not complete: " + run_dir.string());
  const auto config = experiment_config_from_json(manifest, run_dir);
  const auto data = load_dataset(paths.dataset());
  const auto saved = load_model(paths.model_json());
  const auto metrics = evaluate(config, data, saved.model());

  if (fs::exists(paths.metrics_json())) {
    const auto stored = json::parse(read_file(paths.metrics_json()));
    if (stored != metrics.to_json()) {
      throw NumericError("recomputed metrics differ from " + paths.metrics_json().string());
    }
  }
  const auto text = render_report(config, metrics);
  write_file_atomic(paths.report(), text);
  return text;
}

}  // namespace alternator
