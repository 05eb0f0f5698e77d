#include "alternator/harness/experiment_config.hpp"

#include <algorithm>
#include <set>

#include "alternator/errors.hpp"
#include "alternator/numerics/checkpoint.hpp"

namespace alternator {

namespace {

using nlohmann::json;

const char* type_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

// Reads members of one JSON object and remembers which were consumed, so
// anything left over can be reported as an unknown key.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, std::string("expected an object, got ") + type_name(j_));
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) fail(child(key), std::string("expected a number, got ") + type_name(v));
    return v.get<double>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    return as_count(j_.at(key), child(key));
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(child(key), std::string("expected a non-negative integer, got ") + type_name(v));
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) fail(child(key), std::string("expected true or false, got ") + type_name(v));
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(child(key), std::string("expected a string, got ") + type_name(v));
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) fail(child(key), std::string("expected a number or an array, got ") + type_name(v));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(child(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(child(key), std::string("expected an array, got ") + type_name(v));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_count(v[i], child(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(child(key), std::string("expected an array, got ") + type_name(v));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(child(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  // Throws on the first member that was never asked for.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(child(item.key()), "unknown key");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + path + ": " + msg);
  }

 private:
  static std::size_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) fail(path, std::string("expected a non-negative integer, got ") + type_name(v));
    return v.get<std::size_t>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename E>
E choose(ObjectReader& r, const std::string& key, E fallback, std::initializer_list<std::pair<const char*, E>> options) {
  if (!r.has(key)) return fallback;
  const std::string s = r.string(key, "");
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  ObjectReader::fail(r.child(key), "'" + s + "' is not one of " + allowed);
}

template <typename E>
const char* name_of(E value, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, v] : options) {
    if (v == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, Task>> kTasks{{"generative", Task::generative},
                                                                 {"seq2seq", Task::seq2seq}};
const std::initializer_list<std::pair<const char*, DataSource>> kSources{
    {"lorenz", DataSource::lorenz}, {"linear_gaussian", DataSource::linear_gaussian}, {"file", DataSource::file}};
const std::initializer_list<std::pair<const char*, Activation>> kActivations{{"tanh", Activation::tanh},
                                                                             {"relu", Activation::relu}};
const std::initializer_list<std::pair<const char*, OutputActivation>> kOutputs{
    {"identity", OutputActivation::identity}, {"tanh", OutputActivation::tanh}};
const std::initializer_list<std::pair<const char*, HistoryMode>> kHistory{{"last_spike", HistoryMode::last_spike},
                                                                          {"sum", HistoryMode::sum}};

const std::vector<std::string> kMetricNames{"mae", "mse", "cc", "crps", "ssr", "loglik"};

void read_model(ObjectReader r, ModelSection& m) {
  m.sigma_x = r.number("sigma_x", m.sigma_x);
  m.sigma_z = r.number("sigma_z", m.sigma_z);
  m.alpha = r.numbers("alpha", m.alpha);
  m.feature_dim = r.count("feature_dim", m.feature_dim);
  m.network.hidden_dims = r.counts("hidden_dims", m.network.hidden_dims);
  m.network.activation = choose(r, "activation", m.network.activation, kActivations);
  m.network.output_activation = choose(r, "output_activation", m.network.output_activation, kOutputs);
  r.finish();
}

void read_train(ObjectReader r, TrainConfig& t, std::size_t& checkpoint_every) {
  t.batch_size = r.count("batch_size", t.batch_size);
  t.epochs = r.count("epochs", t.epochs);
  t.schedule.base_lr = r.number("lr", t.schedule.base_lr);
  t.schedule.min_lr = r.number("min_lr", t.schedule.min_lr);
  t.schedule.warmup_epochs = r.count("warmup_epochs", t.schedule.warmup_epochs);
  t.detach_marginal = r.boolean("detach_marginal", t.detach_marginal);
  checkpoint_every = r.count("checkpoint_every", checkpoint_every);
  t.schedule.total_epochs = t.epochs;
  r.finish();
}

void read_lorenz(ObjectReader r, LorenzParams& p) {
  p.sigma = r.number("sigma", p.sigma);
  p.rho = r.number("rho", p.rho);
  p.beta = r.number("beta", p.beta);
  p.dt = r.number("dt", p.dt);
  p.steps = r.count("steps", p.steps);
  p.noise_scale = r.number("noise_scale", p.noise_scale);
  p.sqrt_dt_diffusion = r.boolean("sqrt_dt_diffusion", p.sqrt_dt_diffusion);
  r.finish();
}

void read_spikes(ObjectReader r, SpikeSimConfig& c) {
  c.channels = r.count("channels", c.channels);
  c.fr_min = r.number("fr_min", c.fr_min);
  c.fr_max = r.number("fr_max", c.fr_max);
  c.sigma_min = r.number("sigma_min", c.sigma_min);
  c.sigma_max = r.number("sigma_max", c.sigma_max);
  c.bin_width = r.number("bin_width", c.bin_width);
  c.history = choose(r, "history", c.history, kHistory);
  r.finish();
}

void read_linear(ObjectReader r, LinearGaussianConfig& c) {
  c.steps = r.count("steps", c.steps);
  c.obs_dim = r.count("obs_dim", c.obs_dim);
  c.transition = r.number("transition", c.transition);
  c.process_noise = r.number("process_noise", c.process_noise);
  c.obs_noise = r.number("obs_noise", c.obs_noise);
  r.finish();
}

void read_data(ObjectReader r, DataSection& d, const std::filesystem::path& base_dir) {
  d.source = choose(r, "source", d.source, kSources);
  const std::size_t sequences = r.count("sequences", d.lorenz.sequences);
  const std::size_t test_count = r.count("test_count", d.lorenz.test_count);
  d.lorenz.sequences = d.linear_gaussian.sequences = sequences;
  d.lorenz.test_count = d.linear_gaussian.test_count = test_count;
  if (r.has("lorenz")) read_lorenz(ObjectReader(r.at("lorenz"), r.child("lorenz")), d.lorenz.lorenz);
  if (r.has("spikes")) read_spikes(ObjectReader(r.at("spikes"), r.child("spikes")), d.lorenz.spikes);
  if (r.has("linear_gaussian")) {
    read_linear(ObjectReader(r.at("linear_gaussian"), r.child("linear_gaussian")), d.linear_gaussian);
  }
  if (r.has("path")) {
    std::filesystem::path p = r.string("path", "");
    d.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  r.finish();
}

void read_eval(ObjectReader r, EvalSection& e) {
  e.metrics = r.strings("metrics", e.metrics);
  for (std::size_t i = 0; i < e.metrics.size(); ++i) {
    if (std::find(kMetricNames.begin(), kMetricNames.end(), e.metrics[i]) == kMetricNames.end()) {
      ObjectReader::fail(r.child("metrics") + "[" + std::to_string(i) + "]", "unknown metric '" + e.metrics[i] + "'");
    }
  }
  e.ensemble_size = r.count("ensemble_size", e.ensemble_size);
  e.forecast_rates = r.numbers("forecast_rates", e.forecast_rates);
  e.impute_rates = r.numbers("impute_rates", e.impute_rates);
  e.score_samples = r.count("score_samples", e.score_samples);
  e.plot_sequences = r.count("plot_sequences", e.plot_sequences);
  r.finish();
}

// Maps a byte offset to 1-based line and column.
std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void check(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) ObjectReader::fail(path, msg);
}

}  // namespace

bool EvalSection::wants(const std::string& metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

std::string to_string(Task task) { return name_of(task, kTasks); }

AlternatorConfig ExperimentConfig::model_config(std::size_t obs_dim, std::size_t feature_dim,
                                                std::size_t length) const {
  AlternatorConfig cfg;
  cfg.obs_dim = obs_dim;
  cfg.feature_dim = feature_dim;
  cfg.length = length;
  cfg.sigma_x = model.sigma_x;
  cfg.sigma_z = model.sigma_z;
  cfg.alpha = model.alpha.size() == 1 ? std::vector<double>(length, model.alpha[0]) : model.alpha;
  return cfg;
}

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  data.lorenz.seed = s;
  data.linear_gaussian.seed = s;
  train.seed = derive_seed(s, 2);
}

std::uint64_t ExperimentConfig::init_seed() const { return derive_seed(seed, 1); }
std::uint64_t ExperimentConfig::eval_seed() const { return derive_seed(seed, 3); }

void ExperimentConfig::validate() const {
  check(!name.empty(), "name", "must not be empty");
  check(model.sigma_x > 0.0 && model.sigma_x < 1.0, "model.sigma_x", "must lie in (0, 1)");
  check(model.sigma_z > 0.0 && model.sigma_z < 1.0, "model.sigma_z", "must lie in (0, 1)");
  check(model.sigma_z < model.sigma_x, "model.sigma_z", "must be smaller than model.sigma_x");
  check(!model.alpha.empty(), "model.alpha", "must not be empty");
  for (double a : model.alpha) {
    check(a >= 0.0 && a <= 1.0 - model.sigma_z * model.sigma_z, "model.alpha",
          "every value must lie in [0, 1 - sigma_z^2]");
  }
  check(!model.network.hidden_dims.empty(), "model.hidden_dims", "need at least one hidden layer");
  for (auto h : model.network.hidden_dims) check(h > 0, "model.hidden_dims", "widths must be positive");
  if (task == Task::generative) check(model.feature_dim > 0, "model.feature_dim", "required for the generative task");

  check(train.batch_size > 0, "train.batch_size", "must be positive");
  check(train.epochs > 0, "train.epochs", "must be positive");
  try {
    train.validate();
  } catch (const ContractError& e) {
    ObjectReader::fail("train", e.what());
  }

  std::size_t length = 0;
  switch (data.source) {
    case DataSource::lorenz:
      check(data.lorenz.sequences > data.lorenz.test_count, "data.test_count", "must leave training sequences");
      try {
        data.lorenz.lorenz.validate();
      } catch (const ContractError& e) {
        ObjectReader::fail("data.lorenz", e.what());
      }
      try {
        data.lorenz.spikes.validate();
      } catch (const ContractError& e) {
        ObjectReader::fail("data.spikes", e.what());
      }
      length = data.lorenz.lorenz.steps;
      break;
    case DataSource::linear_gaussian:
      check(data.linear_gaussian.sequences > data.linear_gaussian.test_count, "data.test_count",
            "must leave training sequences");
      check(data.linear_gaussian.steps > 0, "data.linear_gaussian.steps", "must be positive");
      check(data.linear_gaussian.obs_dim > 0, "data.linear_gaussian.obs_dim", "must be positive");
      length = data.linear_gaussian.steps;
      break;
    case DataSource::file:
      check(!data.path.empty(), "data.path", "required when data.source is file");
      check(std::filesystem::exists(data.path / "manifest.json"), "data.path",
            "no dataset manifest at " + (data.path / "manifest.json").string());
      break;
  }
  if (length > 0 && model.alpha.size() != 1) {
    check(model.alpha.size() == length, "model.alpha",
          "schedule has " + std::to_string(model.alpha.size()) + " entries, sequences have " + std::to_string(length));
  }

  check(eval.ensemble_size >= 1, "eval.ensemble_size", "must be positive");
  if (eval.wants("ssr")) check(eval.ensemble_size >= 2, "eval.ensemble_size", "ssr needs at least 2 members");
  check(eval.score_samples >= 1, "eval.score_samples", "must be positive");
  for (const auto* rates : {&eval.forecast_rates, &eval.impute_rates}) {
    for (double r : *rates) check(r > 0.0 && r < 1.0, "eval", "rates must lie in (0, 1)");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  json model_j{{"sigma_x", model.sigma_x},
               {"sigma_z", model.sigma_z},
               {"alpha", model.alpha},
               {"feature_dim", model.feature_dim},
               {"hidden_dims", model.network.hidden_dims},
               {"activation", name_of(model.network.activation, kActivations)},
               {"output_activation", name_of(model.network.output_activation, kOutputs)}};
  json train_j{{"batch_size", train.batch_size},
               {"epochs", train.epochs},
               {"lr", train.schedule.base_lr},
               {"min_lr", train.schedule.min_lr},
               {"warmup_epochs", train.schedule.warmup_epochs},
               {"detach_marginal", train.detach_marginal},
               {"checkpoint_every", checkpoint_every}};
  json data_j{{"source", name_of(data.source, kSources)}};
  switch (data.source) {
    case DataSource::lorenz:
      data_j["sequences"] = data.lorenz.sequences;
      data_j["test_count"] = data.lorenz.test_count;
      data_j["lorenz"] = alternator::to_json(data.lorenz.lorenz);
      data_j["spikes"] = alternator::to_json(data.lorenz.spikes);
      break;
    case DataSource::linear_gaussian: {
      const auto& c = data.linear_gaussian;
      data_j["sequences"] = c.sequences;
      data_j["test_count"] = c.test_count;
      data_j["linear_gaussian"] = {{"steps", c.steps},
                                   {"obs_dim", c.obs_dim},
                                   {"transition", c.transition},
                                   {"process_noise", c.process_noise},
                                   {"obs_noise", c.obs_noise}};
      break;
    }
    case DataSource::file:
      data_j["path"] = data.path.string();
      break;
  }
  json eval_j{{"metrics", eval.metrics},
              {"ensemble_size", eval.ensemble_size},
              {"forecast_rates", eval.forecast_rates},
              {"impute_rates", eval.impute_rates},
              {"score_samples", eval.score_samples},
              {"plot_sequences", eval.plot_sequences}};
  json out{{"name", name},       {"task", to_string(task)}, {"seed", seed}, {"model", model_j},
           {"train", train_j},   {"data", data_j},          {"eval", eval_j}};
  if (!output.empty()) out["output"] = output.string();
  return out;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (j.is_object() && j.contains("config") && j.contains("version")) {
    return experiment_config_from_json(j.at("config"), base_dir);
  }
  ExperimentConfig c;
  ObjectReader r(j, "");
  c.name = r.string("name", c.name);
  c.task = choose(r, "task", c.task, kTasks);
  c.set_seed(r.u64("seed", c.seed));
  if (r.has("model")) read_model(ObjectReader(r.at("model"), "model"), c.model);
  if (r.has("train")) read_train(ObjectReader(r.at("train"), "train"), c.train, c.checkpoint_every);
  c.train.schedule.total_epochs = c.train.epochs;
  if (r.has("data")) read_data(ObjectReader(r.at("data"), "data"), c.data, base_dir);
  if (r.has("eval")) read_eval(ObjectReader(r.at("eval"), "eval"), c.eval);
  if (r.has("output")) c.output = r.string("output", "");
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: syntax error at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  return experiment_config_from_json(j, base_dir);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config: file not found: " + path.string());
  return parse_experiment_config(read_file(path), path.parent_path());
}

std::vector<std::string> profile_names() {
  return {"lorenz_seq2seq", "lorenz_forecast_sweep", "lorenz_impute_sweep", "generative_toy"};
}

ExperimentConfig builtin_profile(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.set_seed(1);
  if (name == "lorenz_seq2seq" || name == "lorenz_forecast_sweep" || name == "lorenz_impute_sweep") {
    c.task = Task::seq2seq;
    c.model.sigma_x = 0.3;
    c.model.sigma_z = 0.1;
    c.model.alpha = {0.3};
    c.train.batch_size = 16;
    c.train.epochs = 500;
    c.train.schedule = LrSchedule{0.01, 1e-4, 10, 500};
    c.checkpoint_every = 100;
    c.data.source = DataSource::lorenz;
    c.data.lorenz.sequences = 300;
    c.data.lorenz.test_count = 100;
    c.eval.metrics = {"mae", "mse", "cc", "crps", "ssr"};
    if (name == "lorenz_forecast_sweep") c.eval.forecast_rates = {0.1, 0.2, 0.3, 0.4, 0.5};
    if (name == "lorenz_impute_sweep") c.eval.impute_rates = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  } else if (name == "generative_toy") {
    c.task = Task::generative;
    c.model.sigma_x = 0.3;
    c.model.sigma_z = 0.1;
    c.model.alpha = {0.3};
    c.model.feature_dim = 1;
    c.train.batch_size = 16;
    c.train.epochs = 100;
    c.train.schedule = LrSchedule{0.01, 1e-4, 5, 100};
    c.checkpoint_every = 25;
    c.data.source = DataSource::linear_gaussian;
    c.data.linear_gaussian.sequences = 200;
    c.data.linear_gaussian.test_count = 50;
    c.data.linear_gaussian.steps = 20;
    c.data.linear_gaussian.obs_dim = 2;
    c.eval.metrics = {"mae", "mse", "cc", "crps", "ssr", "loglik"};
    c.eval.forecast_rates = {0.2, 0.5};
    c.eval.impute_rates = {0.2, 0.5};
    c.eval.ensemble_size = 20;
    c.eval.score_samples = 50;
  } else {
    std::string known;
    for (const auto& p : profile_names()) known += (known.empty() ? "" : ", ") + p;
    throw ConfigError("unknown profile '" + name + "' (known: " + known + ")");
  }
  c.set_seed(1);
  c.validate();
  return c;
}

}  // namespace alternator
