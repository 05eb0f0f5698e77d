#include "alternator/training/losses.hpp"

#include <cstring>

#include "alternator/errors.hpp"

namespace alternator {

LossReport TapedLoss::report() const {
  LossReport r;
  r.total = total.value().item();
  r.feature_term = feature_term.value().item();
  r.observation_term = observation_term.value().item();
  r.observation_weight = observation_weight;
  return r;
}

NetworkShape shape_of(const ModelParams& params) {
  const auto& s = params.otn.spec();
  return NetworkShape{s.hidden_dims, s.activation, s.output_activation};
}

TapedLoss alternator_loss(const AlternatorConfig& cfg, const NetworkShape& shape, std::span<const Var> theta,
                          std::span<const Var> phi, Var x, Var z_prev, Var z, std::span<const double> alpha,
                          std::size_t batch) {
  if (batch == 0) throw ContractError("loss: empty batch");
  if (x.rows() != z.rows() || z_prev.rows() != z.rows()) throw DimensionError("loss: row counts differ");
  const Var mu_x = obs_mean(cfg, shape.otn_spec(cfg), theta, z_prev);
  const Var mu_z = latent_mean(cfg, shape.ftn_spec(cfg), phi, x, z_prev, alpha);
  const double inv_b = 1.0 / static_cast<double>(batch);
  TapedLoss out;
  out.feature_term = scale(sum_squares(z - mu_z), inv_b);
  out.observation_term = scale(sum_squares(x - mu_x), inv_b);
  out.observation_weight = cfg.observation_weight();
  out.total = out.feature_term + scale(out.observation_term, out.observation_weight);
  return out;
}

Tensor stack_steps(std::span<const Tensor> seqs, std::size_t first, std::size_t count) {
  if (seqs.empty()) throw ContractError("stack_steps: empty batch");
  const std::size_t B = seqs.size();
  const std::size_t d = seqs.front().cols();
  Tensor out = Tensor::zeros(count * B, d);
  for (std::size_t b = 0; b < B; ++b) {
    if (seqs[b].cols() != d || seqs[b].rows() < first + count) {
      throw DimensionError("stack_steps: sequence " + std::to_string(b) + " has shape " +
                           shape_string(seqs[b].shape()));
    }
    for (std::size_t t = 0; t < count; ++t) {
      std::memcpy(out.row_span(t * B + b).data(), seqs[b].row_span(first + t).data(), d * sizeof(double));
    }
  }
  return out;
}

std::vector<double> stacked_alpha(const AlternatorConfig& cfg, std::size_t T, std::size_t batch) {
  std::vector<double> a;
  a.reserve(T * batch);
  for (std::size_t t = 1; t <= T; ++t) a.insert(a.end(), batch, cfg.alpha_at(t));
  return a;
}

namespace {

void check_lengths(std::span<const Tensor> seqs, std::size_t T, std::size_t rows_extra, const char* what) {
  for (const auto& s : seqs) {
    if (s.rows() != T + rows_extra) {
      throw DimensionError(std::string("loss: ") + what + " sequence has " + std::to_string(s.rows()) +
                           " rows, expected " + std::to_string(T + rows_extra));
    }
  }
}

}  // namespace

TapedLoss loss_generative(Tape& tape, const AlternatorConfig& cfg, const NetworkShape& shape,
                          std::span<const Var> theta, std::span<const Var> phi, std::span<const Tensor> data_x,
                          std::span<const Tensor> features) {
  if (data_x.empty() || data_x.size() != features.size()) throw DimensionError("loss_generative: batch sizes differ");
  const std::size_t B = data_x.size();
  const std::size_t T = data_x.front().rows();
  check_lengths(data_x, T, 0, "data");
  check_lengths(features, T, 1, "feature");
  const Var x = tape.constant(stack_steps(data_x, 0, T));
  const Var z_prev = tape.constant(stack_steps(features, 0, T));
  const Var z = tape.constant(stack_steps(features, 1, T));
  const auto alpha = stacked_alpha(cfg, T, B);
  return alternator_loss(cfg, shape, theta, phi, x, z_prev, z, alpha, B);
}

TapedLoss loss_seq2seq(Tape& tape, const AlternatorConfig& cfg, const NetworkShape& shape,
                       std::span<const Var> theta, std::span<const Var> phi, std::span<const Tensor> x,
                       std::span<const Tensor> y, const Tensor& y0) {
  if (x.empty() || x.size() != y.size()) throw DimensionError("loss_seq2seq: batch sizes differ");
  const std::size_t B = x.size();
  const std::size_t T = x.front().rows();
  check_lengths(x, T, 0, "input");
  check_lengths(y, T, 0, "target");
  if (y0.rows() != B || y0.cols() != y.front().cols()) throw DimensionError("loss_seq2seq: y0 must be B x D_y");
  // y_prev rows: y0 at t = 1, then y_1..y_{T-1}
  Tensor y_prev = Tensor::zeros(T * B, y0.cols());
  std::memcpy(y_prev.data(), y0.data(), y0.size() * sizeof(double));
  if (T > 1) {
    const Tensor rest = stack_steps(y, 0, T - 1);
    std::memcpy(y_prev.data() + y0.size(), rest.data(), rest.size() * sizeof(double));
  }
  const Var xv = tape.constant(stack_steps(x, 0, T));
  const Var yp = tape.constant(std::move(y_prev));
  const Var yv = tape.constant(stack_steps(y, 0, T));
  const auto alpha = stacked_alpha(cfg, T, B);
  return alternator_loss(cfg, shape, theta, phi, xv, yp, yv, alpha, B);
}

LossReport loss_generative(const Alternator& model, std::span<const Tensor> data_x, std::span<const Tensor> features) {
  Tape tape;
  const auto theta = bind_parameters(tape, model.params().otn);
  const auto phi = bind_parameters(tape, model.params().ftn);
  return loss_generative(tape, model.config(), shape_of(model.params()), theta, phi, data_x, features).report();
}

LossReport loss_seq2seq(const Alternator& model, std::span<const Tensor> x, std::span<const Tensor> y,
                        const Tensor& y0) {
  Tape tape;
  const auto theta = bind_parameters(tape, model.params().otn);
  const auto phi = bind_parameters(tape, model.params().ftn);
  return loss_seq2seq(tape, model.config(), shape_of(model.params()), theta, phi, x, y, y0).report();
}

}  // namespace alternator
