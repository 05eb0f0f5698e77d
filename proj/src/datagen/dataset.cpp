#include "alternator/datagen/dataset.hpp"

#include <algorithm>
#include <cstdio>

#include "alternator/errors.hpp"
#include "alternator/model/trajectory.hpp"
#include "alternator/numerics/checkpoint.hpp"

namespace alternator {

namespace {
constexpr std::uint64_t kFieldStream = 0xF1E1D5ULL;
constexpr std::uint64_t kSplitStream = 0x5B117ULL;

std::string seq_name(std::size_t i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "seq_%04zu%s.csv", i, suffix);
  return buf;
}
}  // namespace

std::vector<Tensor> PairedDataset::x_at(const std::vector<std::size_t>& idx) const {
  std::vector<Tensor> out;
  for (auto i : idx) out.push_back(x.at(i));
  return out;
}

std::vector<Tensor> PairedDataset::y_at(const std::vector<std::size_t>& idx) const {
  std::vector<Tensor> out;
  for (auto i : idx) out.push_back(y.at(i));
  return out;
}

void split_dataset(PairedDataset& data, std::size_t test_count, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (test_count > n) throw ContractError("split: test_count exceeds dataset size");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, kSplitStream));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
  data.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_count));
  data.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_count), order.end());
  std::sort(data.test.begin(), data.test.end());
  std::sort(data.train.begin(), data.train.end());
}

PairedDataset make_lorenz_dataset(const LorenzDatasetConfig& config) {
  require(config.sequences >= 1, "lorenz dataset: need at least one sequence");
  config.lorenz.validate();
  config.spikes.validate();
  const std::size_t n = config.sequences;

  PairedDataset data;
  data.kind = "lorenz";
  data.x.resize(n);
  data.y.resize(n);
  data.y_raw.resize(n);
  std::vector<std::vector<double>> mins(n), maxs(n);

  auto simulate_features = [&](std::size_t i) {
    Rng rng(derive_seed(derive_seed(config.seed, i), 0));
    data.y_raw[i] = simulate_lorenz(config.lorenz, rng);
    auto norm = normalize_minmax(data.y_raw[i]);
    data.y[i] = std::move(norm.values);
    mins[i] = std::move(norm.min);
    maxs[i] = std::move(norm.max);
  };

  simulate_features(0);
  Rng field_rng(derive_seed(config.seed, kFieldStream));
  data.fields = draw_receptive_fields(data.y[0], config.spikes, field_rng);

#pragma omp parallel for schedule(dynamic)
  for (long li = 1; li < static_cast<long>(n); ++li) simulate_features(static_cast<std::size_t>(li));
  for (std::size_t i = 0; i < n; ++i) {
    data.x[i] = simulate_spikes(data.y[i], data.fields, config.spikes, derive_seed(derive_seed(config.seed, i), 1));
  }

  split_dataset(data, config.test_count, config.seed);

  nlohmann::json seqs = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    seqs.push_back({{"index", i}, {"seed", derive_seed(config.seed, i)}, {"min", mins[i]}, {"max", maxs[i]}});
  }
  data.manifest = {{"kind", "lorenz"},
                   {"seed", config.seed},
                   {"sequences", n},
                   {"test_count", config.test_count},
                   {"lorenz", to_json(config.lorenz)},
                   {"spikes", to_json(config.spikes)},
                   {"per_sequence", seqs}};
  return data;
}

PairedDataset make_linear_gaussian_dataset(const LinearGaussianConfig& config) {
  require(config.sequences >= 1 && config.steps >= 1 && config.obs_dim >= 1, "linear gaussian: empty dataset");
  PairedDataset data;
  data.kind = "linear_gaussian";
  std::vector<double> loading(config.obs_dim);
  for (std::size_t j = 0; j < config.obs_dim; ++j) loading[j] = j % 2 == 0 ? 1.0 : -0.5;
  for (std::size_t i = 0; i < config.sequences; ++i) {
    Rng rng(derive_seed(config.seed, i));
    Tensor x = Tensor::zeros(config.steps, config.obs_dim);
    Tensor y = Tensor::zeros(config.steps, 1);
    double state = standard_normal(rng);
    for (std::size_t t = 0; t < config.steps; ++t) {
      state = config.transition * state + config.process_noise * standard_normal(rng);
      y(t, 0) = state;
      for (std::size_t j = 0; j < config.obs_dim; ++j) x(t, j) = loading[j] * state + config.obs_noise * standard_normal(rng);
    }
    data.x.push_back(std::move(x));
    data.y.push_back(y);
    data.y_raw.push_back(std::move(y));
  }
  split_dataset(data, config.test_count, config.seed);
  data.manifest = {{"kind", "linear_gaussian"},
                   {"seed", config.seed},
                   {"sequences", config.sequences},
                   {"test_count", config.test_count},
                   {"steps", config.steps},
                   {"obs_dim", config.obs_dim},
                   {"transition", config.transition},
                   {"process_noise", config.process_noise},
                   {"obs_noise", config.obs_noise}};
  return data;
}

void save_dataset(const std::filesystem::path& dir, const PairedDataset& data) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < data.size(); ++i) {
    Trajectory traj{data.x[i], data.y[i], {}};
    write_trajectory_csv(dir / seq_name(i, ""), traj);
    if (!data.y_raw.empty() && !(data.y_raw[i] == data.y[i])) {
      write_file_atomic(dir / seq_name(i, "_raw"), matrix_to_csv(data.y_raw[i], "z"));
    }
  }
  nlohmann::json m = data.manifest;
  m["kind"] = data.kind;
  m["count"] = data.size();
  m["train"] = data.train;
  m["test"] = data.test;
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& f : data.fields) fields.push_back(to_json(f));
  m["fields"] = fields;
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

PairedDataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) throw FormatError("dataset: missing " + manifest_path.string());
  PairedDataset data;
  try {
    data.manifest = nlohmann::json::parse(read_file(manifest_path));
    data.kind = data.manifest.at("kind").get<std::string>();
    const auto count = data.manifest.at("count").get<std::size_t>();
    data.train = data.manifest.at("train").get<std::vector<std::size_t>>();
    data.test = data.manifest.at("test").get<std::vector<std::size_t>>();
    for (const auto& f : data.manifest.at("fields")) data.fields.push_back(receptive_field_from_json(f));
    for (std::size_t i = 0; i < count; ++i) {
      auto traj = read_trajectory_csv(dir / seq_name(i, ""));
      data.x.push_back(std::move(traj.x));
      const auto raw = dir / seq_name(i, "_raw");
      data.y_raw.push_back(std::filesystem::exists(raw) ? matrix_from_csv(read_file(raw)) : traj.z);
      data.y.push_back(std::move(traj.z));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset manifest: " + std::string(e.what()));
  }
  for (auto key : {"count", "train", "test", "fields"}) data.manifest.erase(key);
  return data;
}

nlohmann::json to_json(const LorenzParams& p) {
  return {{"sigma", p.sigma},         {"rho", p.rho},
          {"beta", p.beta},           {"dt", p.dt},
          {"steps", p.steps},         {"noise_scale", p.noise_scale},
          {"sqrt_dt_diffusion", p.sqrt_dt_diffusion}};
}

nlohmann::json to_json(const SpikeSimConfig& c) {
  return {{"channels", c.channels},
          {"fr_min", c.fr_min},
          {"fr_max", c.fr_max},
          {"sigma_min", c.sigma_min},
          {"sigma_max", c.sigma_max},
          {"bin_width", c.bin_width},
          {"history", c.history == HistoryMode::last_spike ? "last_spike" : "sum"}};
}

nlohmann::json to_json(const ReceptiveField& f) {
  return {{"center", f.center}, {"width", f.width}, {"history_width", f.history_width}, {"max_rate", f.max_rate}};
}

LorenzParams lorenz_params_from_json(const nlohmann::json& j) {
  LorenzParams p;
  p.sigma = j.at("sigma").get<double>();
  p.rho = j.at("rho").get<double>();
  p.beta = j.at("beta").get<double>();
  p.dt = j.at("dt").get<double>();
  p.steps = j.at("steps").get<std::size_t>();
  p.noise_scale = j.at("noise_scale").get<double>();
  p.sqrt_dt_diffusion = j.at("sqrt_dt_diffusion").get<bool>();
  return p;
}

SpikeSimConfig spike_config_from_json(const nlohmann::json& j) {
  SpikeSimConfig c;
  c.channels = j.at("channels").get<std::size_t>();
  c.fr_min = j.at("fr_min").get<double>();
  c.fr_max = j.at("fr_max").get<double>();
  c.sigma_min = j.at("sigma_min").get<double>();
  c.sigma_max = j.at("sigma_max").get<double>();
  c.bin_width = j.at("bin_width").get<double>();
  const auto h = j.at("history").get<std::string>();
  if (h != "last_spike" && h != "sum") throw FormatError("spike config: history must be last_spike or sum");
  c.history = h == "sum" ? HistoryMode::sum : HistoryMode::last_spike;
  return c;
}

ReceptiveField receptive_field_from_json(const nlohmann::json& j) {
  ReceptiveField f;
  f.center = j.at("center").get<std::vector<double>>();
  f.width = j.at("width").get<std::vector<double>>();
  f.history_width = j.at("history_width").get<double>();
  f.max_rate = j.at("max_rate").get<double>();
  return f;
}

}  // namespace alternator
