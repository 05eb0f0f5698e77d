#include "alternator/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alternator/errors.hpp"
#include "alternator/numerics/adam.hpp"

namespace alternator {

void TrainConfig::validate() const {
  require(batch_size >= 1, "train config: batch_size must be >= 1");
  require(epochs >= 1, "train config: epochs must be >= 1");
  schedule.validate();
  require(schedule.total_epochs == epochs, "train config: schedule.total_epochs must equal epochs");
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

namespace {

Tensor normal_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Tensor m = Tensor::zeros(rows, cols);
  for (double& v : m.values()) v = standard_normal(rng);
  return m;
}

std::vector<Tensor> gather(std::span<const Tensor> data, const std::vector<std::size_t>& idx) {
  std::vector<Tensor> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data[i]);
  return out;
}

void check_dataset(std::span<const Tensor> data, std::size_t T, std::size_t width, const char* what) {
  if (data.empty()) throw ContractError(std::string("train: empty ") + what + " set");
  for (const auto& s : data) {
    if (s.rows() != T || s.cols() != width) {
      throw DimensionError(std::string("train: ") + what + " sequence shape " + shape_string(s.shape()) +
                           ", expected [" + std::to_string(T) + "," + std::to_string(width) + "]");
    }
  }
}

struct Accumulator {
  double total = 0, feature = 0, obs = 0, weight = 0;
  std::size_t n = 0;

  void add(const LossReport& r, std::size_t b) {
    total += r.total * static_cast<double>(b);
    feature += r.feature_term * static_cast<double>(b);
    obs += r.observation_term * static_cast<double>(b);
    weight = r.observation_weight;
    n += b;
  }

  LossReport finish(std::size_t epoch, double lr) const {
    const double inv = 1.0 / static_cast<double>(n);
    return LossReport{total * inv, feature * inv, obs * inv, weight, epoch, lr};
  }
};

// Backward pass + Adam update for one batch.
void apply_gradients(Tape& tape, const TapedLoss& loss, const std::vector<Var>& vars, ModelParams& params,
                     AdamState& adam, double lr) {
  const Gradients grads = backward(tape, loss.total);
  std::vector<Tensor> g;
  g.reserve(vars.size());
  for (const Var& v : vars) g.push_back(grads.of(v));
  auto ptrs = params.tensors();
  adam_step(adam, std::span<Tensor* const>(ptrs), g, lr);
}

std::vector<Var> bind_all(Tape& tape, const ModelParams& params, std::vector<Var>& theta, std::vector<Var>& phi) {
  theta = bind_parameters(tape, params.otn);
  phi = bind_parameters(tape, params.ftn);
  std::vector<Var> all = theta;
  all.insert(all.end(), phi.begin(), phi.end());
  return all;
}

std::vector<Tensor> current_values(ModelParams& params) {
  std::vector<Tensor> out;
  for (Tensor* t : params.tensors()) out.push_back(*t);
  return out;
}

}  // namespace

std::vector<Var> sample_features_taped(Tape& tape, const AlternatorConfig& cfg, const NetworkShape& shape,
                                       std::span<const Var> theta, std::span<const Var> phi, std::size_t batch,
                                       std::size_t T, Rng& rng) {
  const MlpSpec otn = shape.otn_spec(cfg);
  const MlpSpec ftn = shape.ftn_spec(cfg);
  std::vector<Var> zs;
  zs.reserve(T + 1);
  zs.push_back(tape.constant(normal_matrix(rng, batch, cfg.feature_dim)));
  for (std::size_t t = 1; t <= T; ++t) {
    const Var mu_x = obs_mean(cfg, otn, theta, zs.back());
    const Var x = mu_x + scale(tape.constant(normal_matrix(rng, batch, cfg.obs_dim)), cfg.sigma_x);
    const std::vector<double> alpha(batch, cfg.alpha_at(t));
    const Var mu_z = latent_mean(cfg, ftn, phi, x, zs.back(), alpha);
    zs.push_back(mu_z + scale(tape.constant(normal_matrix(rng, batch, cfg.feature_dim)), cfg.sigma_z));
  }
  return zs;
}

TrainResult train_generative(const AlternatorConfig& cfg, ModelParams init, std::span<const Tensor> dataset,
                             const TrainConfig& train, const EpochCallback& on_epoch) {
  cfg.validate();
  train.validate();
  init.check(cfg);
  check_dataset(dataset, cfg.length, cfg.obs_dim, "observation");
  const NetworkShape shape = shape_of(init);
  const std::size_t T = cfg.length;

  TrainResult result{std::move(init), {}};
  auto values = current_values(result.params);
  AdamState adam = AdamState::for_parameters(values, train.schedule.base_lr);
  Rng rng(train.seed);

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    const double lr = lr_at_epoch(train.schedule, epoch);
    Accumulator acc;
    for (const auto& idx : epoch_batches(dataset.size(), train.batch_size, rng)) {
      const std::size_t B = idx.size();
      const auto data = gather(dataset, idx);
      Tape tape;
      std::vector<Var> theta, phi;
      const auto vars = bind_all(tape, result.params, theta, phi);

      std::vector<Var> zs;
      if (train.detach_marginal) {
        // Same draws as the taped path, evaluated without gradient tracking.
        const Alternator model(cfg, result.params);
        Tensor z = normal_matrix(rng, B, cfg.feature_dim);
        zs.push_back(tape.constant(z));
        for (std::size_t t = 1; t <= T; ++t) {
          z = model.sample_step(rng, z, cfg.alpha_at(t)).second;
          zs.push_back(tape.constant(z));
        }
      } else {
        zs = sample_features_taped(tape, cfg, shape, theta, phi, B, T, rng);
      }
      const Var z_prev = concat_rows(std::span<const Var>(zs.data(), T));
      const Var z = concat_rows(std::span<const Var>(zs.data() + 1, T));
      const Var x = tape.constant(stack_steps(data, 0, T));
      const auto alpha = stacked_alpha(cfg, T, B);
      const TapedLoss loss = alternator_loss(cfg, shape, theta, phi, x, z_prev, z, alpha, B);
      acc.add(loss.report(), B);
      apply_gradients(tape, loss, vars, result.params, adam, lr);
    }
    result.history.push_back(acc.finish(epoch, lr));
    if (on_epoch) on_epoch(epoch, result.params, result.history.back());
  }
  return result;
}

TrainResult train_seq2seq(const AlternatorConfig& cfg, ModelParams init, std::span<const Tensor> x,
                          std::span<const Tensor> y, const TrainConfig& train, const EpochCallback& on_epoch) {
  cfg.validate();
  train.validate();
  init.check(cfg);
  if (x.size() != y.size()) throw DimensionError("train_seq2seq: input and target counts differ");
  check_dataset(x, cfg.length, cfg.obs_dim, "input");
  check_dataset(y, cfg.length, cfg.feature_dim, "target");
  const NetworkShape shape = shape_of(init);

  TrainResult result{std::move(init), {}};
  auto values = current_values(result.params);
  AdamState adam = AdamState::for_parameters(values, train.schedule.base_lr);
  Rng rng(train.seed);

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    const double lr = lr_at_epoch(train.schedule, epoch);
    Accumulator acc;
    for (const auto& idx : epoch_batches(x.size(), train.batch_size, rng)) {
      const auto bx = gather(x, idx);
      const auto by = gather(y, idx);
      const Tensor y0 = normal_matrix(rng, idx.size(), cfg.feature_dim);
      Tape tape;
      std::vector<Var> theta, phi;
      const auto vars = bind_all(tape, result.params, theta, phi);
      const TapedLoss loss = loss_seq2seq(tape, cfg, shape, theta, phi, bx, by, y0);
      acc.add(loss.report(), idx.size());
      apply_gradients(tape, loss, vars, result.params, adam, lr);
    }
    result.history.push_back(acc.finish(epoch, lr));
    if (on_epoch) on_epoch(epoch, result.params, result.history.back());
  }
  return result;
}

Tensor seq2seq_predict(const Alternator& model, const Tensor& x) {
  const auto& cfg = model.config();
  if (x.cols() != cfg.obs_dim) throw DimensionError("seq2seq_predict: input width != D_x");
  const Tensor g = model.params().ftn.forward(x);
  Tensor y = Tensor::zeros(x.rows(), cfg.feature_dim);
  for (std::size_t t = 1; t <= x.rows(); ++t) {
    const double a = cfg.input_coef(t);
    const double m = cfg.memory_coef(t);
    for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
      const double prev = t == 1 ? 0.0 : y(t - 2, j);
      y(t - 1, j) = a * g(t - 1, j) + m * prev;
    }
  }
  return y;
}

}  // namespace alternator
