#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "alternator/numerics/tensor.hpp"

namespace alternator {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

// Reverse-mode computation tape. Nodes are appended in evaluation order,
// so insertion order is a topological order.
class Tape {
 public:
  struct Node;
  // Accumulates d(loss)/d(input) into every non-null entry of input_grads.
  using BackwardFn = std::function<void(const Tape&, const Node&, const Tensor& grad_out,
                                        std::span<Tensor* const> input_grads)>;

  struct Node {
    std::string op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_parameter = false;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  Var record(std::string op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  const Node& node(std::size_t id) const { return nodes_.at(id); }
  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
};

// Gradients of one backward pass, keyed by parameter node.
class Gradients {
 public:
  const Tensor& of(Var v) const;
  bool has(Var v) const { return grads_.count(v.id) != 0; }
  std::size_t count() const { return grads_.size(); }
  // Node ids in the order the backward sweep processed them.
  const std::vector<std::size_t>& visit_order() const { return visited_; }

 private:
  friend Gradients backward(const Tape& tape, Var loss);
  std::unordered_map<std::size_t, Tensor> grads_;
  std::vector<std::size_t> visited_;
};

// Fresh gradient map for a scalar loss; repeated calls never accumulate.
Gradients backward(const Tape& tape, Var loss);

// Differentiable operations. Shapes follow the rank-2 view of Tensor.
Var matmul(Var a, Var b);
Var add_bias(Var x, Var bias);  // bias is 1 x cols, broadcast over rows
Var tanh(Var x);
Var relu(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double c);
Var scale_rows(Var x, std::vector<double> row_coef);
Var sum(Var x);
Var sum_squares(Var x);
Var concat_rows(std::span<const Var> parts);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double c, Var x) { return scale(x, c); }

}  // namespace alternator
