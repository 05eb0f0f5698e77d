#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "alternator/numerics/tape.hpp"
#include "alternator/numerics/tensor.hpp"
#include "alternator/rng.hpp"

namespace alternator {

enum class Activation { tanh, relu };
enum class OutputActivation { identity, tanh };

struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 1;
  Activation activation = Activation::tanh;
  OutputActivation output_activation = OutputActivation::identity;

  void validate() const;
  std::size_t layer_count() const { return hidden_dims.size() + 1; }
  std::string describe() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

// Feed-forward network parameters. Layer l maps rows of width in_l to out_l
// as y = act(x W_l + b_l) with W_l stored in_l x out_l and b_l as 1 x out_l.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec);  // zero weights

  // Glorot-uniform weights, zero biases.
  static Mlp init(MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const { return spec_; }
  Tensor& weight(std::size_t l) { return params_[2 * l]; }
  Tensor& bias(std::size_t l) { return params_[2 * l + 1]; }
  const Tensor& weight(std::size_t l) const { return params_[2 * l]; }
  const Tensor& bias(std::size_t l) const { return params_[2 * l + 1]; }

  // Flat view: weight0, bias0, weight1, bias1, ...
  std::span<Tensor> parameters() { return params_; }
  std::span<const Tensor> parameters() const { return params_; }
  std::vector<std::string> parameter_names(const std::string& prefix) const;
  std::size_t parameter_count() const;

  // Forward pass without gradient tracking. input: rows x input_dim.
  Tensor forward(const Tensor& input) const;

  // Upper bound on the Lipschitz constant (product of layer Frobenius norms;
  // tanh and relu are 1-Lipschitz).
  double lipschitz_bound() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  MlpSpec spec_;
  std::vector<Tensor> params_;
};

// Leaf nodes for every parameter of `net`, in parameters() order.
std::vector<Var> bind_parameters(Tape& tape, const Mlp& net);

// Taped forward pass; `params` as returned by bind_parameters.
Var mlp_forward(const MlpSpec& spec, std::span<const Var> params, Var input);

}  // namespace alternator
