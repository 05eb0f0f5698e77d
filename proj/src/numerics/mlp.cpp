#include "alternator/numerics/mlp.hpp"

#include <cmath>

#include "alternator/errors.hpp"
#include "alternator/numerics/kernels.hpp"

namespace alternator {

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) throw ContractError("mlp: dimensions must be >= 1");
  for (auto h : hidden_dims) {
    if (h < 1) throw ContractError("mlp: hidden dimensions must be >= 1");
  }
}

std::string MlpSpec::describe() const {
  std::string s = std::to_string(input_dim) + "->[";
  for (std::size_t i = 0; i < hidden_dims.size(); ++i) s += (i ? "," : "") + std::to_string(hidden_dims[i]);
  s += "]->" + std::to_string(output_dim);
  s += activation == Activation::tanh ? ":tanh" : ":relu";
  s += output_activation == OutputActivation::identity ? ":identity" : ":tanh";
  return s;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t in = spec_.input_dim;
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    const std::size_t out = l < spec_.hidden_dims.size() ? spec_.hidden_dims[l] : spec_.output_dim;
    params_.push_back(Tensor::zeros(in, out));
    params_.push_back(Tensor::zeros(1, out));
    in = out;
  }
}

Mlp Mlp::init(MlpSpec spec, Rng& rng) {
  Mlp net(std::move(spec));
  for (std::size_t l = 0; l < net.spec().layer_count(); ++l) {
    Tensor& w = net.weight(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (double& v : w.values()) v = uniform(rng, -limit, limit);
  }
  return net;
}

std::vector<std::string> Mlp::parameter_names(const std::string& prefix) const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    names.push_back(prefix + ".layer" + std::to_string(l) + ".weight");
    names.push_back(prefix + ".layer" + std::to_string(l) + ".bias");
  }
  return names;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

namespace {

void apply_activation(Tensor& x, bool last, const MlpSpec& spec) {
  if (last) {
    if (spec.output_activation == OutputActivation::tanh) kernels::tanh_forward(x.values(), x.values());
    return;
  }
  if (spec.activation == Activation::tanh) {
    kernels::tanh_forward(x.values(), x.values());
  } else {
    for (double& v : x.values()) v = v > 0.0 ? v : 0.0;
  }
}

}  // namespace

Tensor Mlp::forward(const Tensor& input) const {
  if (input.cols() != spec_.input_dim) {
    throw DimensionError("mlp: input width " + std::to_string(input.cols()) + " != " +
                         std::to_string(spec_.input_dim));
  }
  Tensor x = input.reshaped({input.rows(), input.cols()});
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    const Tensor& w = weight(l);
    Tensor y = Tensor::zeros(x.rows(), w.cols());
    kernels::matmul(x.data(), w.data(), y.data(), x.rows(), w.rows(), w.cols());
    kernels::add_row_bias(y.data(), bias(l).data(), y.rows(), y.cols());
    apply_activation(y, l + 1 == spec_.layer_count(), spec_);
    x = std::move(y);
  }
  return x;
}

double Mlp::lipschitz_bound() const {
  // Frobenius norm bounds the spectral norm from above.
  double bound = 1.0;
  for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
    bound *= std::sqrt(kernels::serial::sum_squares(weight(l).values()));
  }
  return bound;
}

std::vector<Var> bind_parameters(Tape& tape, const Mlp& net) {
  std::vector<Var> vars;
  for (const auto& p : net.parameters()) vars.push_back(tape.parameter(p));
  return vars;
}

Var mlp_forward(const MlpSpec& spec, std::span<const Var> params, Var input) {
  if (params.size() != 2 * spec.layer_count()) throw DimensionError("mlp_forward: parameter count mismatch");
  if (input.cols() != spec.input_dim) {
    throw DimensionError("mlp_forward: input width " + std::to_string(input.cols()) + " != " +
                         std::to_string(spec.input_dim));
  }
  Var x = input;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    x = add_bias(matmul(x, params[2 * l]), params[2 * l + 1]);
    const bool last = l + 1 == spec.layer_count();
    if (last) {
      if (spec.output_activation == OutputActivation::tanh) x = tanh(x);
    } else {
      x = spec.activation == Activation::tanh ? tanh(x) : relu(x);
    }
  }
  return x;
}

}  // namespace alternator
