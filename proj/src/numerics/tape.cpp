#include "alternator/numerics/tape.hpp"

#include <cmath>
#include <cstring>

#include "alternator/errors.hpp"
#include "alternator/numerics/kernels.hpp"

namespace alternator {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{"constant", std::move(value), {}, {}, false, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{"parameter", std::move(value), {}, {}, true, true});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(std::string op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  if (!value.all_finite()) throw NumericError(op + ": non-finite value in forward pass");
  bool needs = false;
  for (std::size_t in : inputs) needs = needs || nodes_.at(in).requires_grad;
  nodes_.push_back(Node{std::move(op), std::move(value), std::move(inputs), std::move(backward), needs, false});
  return Var{this, nodes_.size() - 1};
}

const Tensor& Gradients::of(Var v) const {
  auto it = grads_.find(v.id);
  if (it == grads_.end()) throw ContractError("gradients: node " + std::to_string(v.id) + " is not a parameter");
  return it->second;
}

Gradients backward(const Tape& tape, Var loss) {
  if (loss.tape != &tape) throw ContractError("backward: loss belongs to another tape");
  const auto& root = tape.node(loss.id);
  if (root.value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + shape_string(root.value.shape()));
  }
  std::vector<Tensor> grads(loss.id + 1);
  grads[loss.id] = Tensor(root.value.shape(), 1.0);

  Gradients out;
  for (std::size_t k = loss.id + 1; k-- > 0;) {
    const auto& node = tape.node(k);
    if (!node.requires_grad || grads[k].empty()) continue;
    out.visited_.push_back(k);
    if (node.is_parameter) {
      out.grads_.emplace(k, std::move(grads[k]));
      continue;
    }
    std::vector<Tensor*> in_grads(node.inputs.size(), nullptr);
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      const auto& in = tape.node(node.inputs[i]);
      if (!in.requires_grad) continue;
      auto& g = grads[node.inputs[i]];
      if (g.empty()) g = Tensor(in.value.shape(), 0.0);
      in_grads[i] = &g;
    }
    node.backward(tape, node, grads[k], in_grads);
    grads[k] = Tensor();
  }
  // Parameters the loss does not depend on still get a zero gradient.
  for (std::size_t k = 0; k <= loss.id; ++k) {
    const auto& node = tape.node(k);
    if (node.is_parameter && !out.grads_.count(k)) out.grads_.emplace(k, Tensor(node.value.shape(), 0.0));
  }
  return out;
}

namespace {

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape || a.tape == nullptr) throw ContractError("tape: operands live on different tapes");
  return *a.tape;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

void accumulate(Tensor& dst, const Tensor& src, double c = 1.0) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += c * s[i];
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  if (bv.rows() != k) {
    throw DimensionError("matmul: " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  }
  Tensor out = Tensor::zeros(n, m);
  kernels::matmul(av.data(), bv.data(), out.data(), n, k, m);
  return tape.record("matmul", std::move(out), {a.id, b.id},
                     [](const Tape& t, const Tape::Node& node, const Tensor& g, std::span<Tensor* const> gin) {
                       const Tensor& A = t.node(node.inputs[0]).value;
                       const Tensor& B = t.node(node.inputs[1]).value;
                       const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
                       if (gin[0]) {
                         Tensor ga = Tensor::zeros(n, k);
                         kernels::matmul_nt(g.data(), B.data(), ga.data(), n, m, k);
                         accumulate(*gin[0], ga);
                       }
                       if (gin[1]) {
                         Tensor gb = Tensor::zeros(k, m);
                         kernels::matmul_tn(A.data(), g.data(), gb.data(), n, k, m);
                         accumulate(*gin[1], gb);
                       }
                     });
}

Var add_bias(Var x, Var bias) {
  Tape& tape = tape_of(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols()) {
    throw DimensionError("add_bias: bias " + shape_string(bv.shape()) + " vs input " + shape_string(xv.shape()));
  }
  Tensor out = xv.reshaped({xv.rows(), xv.cols()});
  kernels::add_row_bias(out.data(), bv.data(), out.rows(), out.cols());
  return tape.record("add_bias", std::move(out), {x.id, bias.id},
                     [](const Tape&, const Tape::Node&, const Tensor& g, std::span<Tensor* const> gin) {
                       if (gin[0]) accumulate(*gin[0], g);
                       if (gin[1]) {
                         Tensor gb(gin[1]->shape(), 0.0);
                         kernels::column_sums(g.data(), gb.data(), g.rows(), g.cols());
                         accumulate(*gin[1], gb);
                       }
                     });
}

Var tanh(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  kernels::tanh_forward(xv.values(), out.values());
  return x.tape->record("tanh", std::move(out), {x.id},
                        [](const Tape&, const Tape::Node& node, const Tensor& g, std::span<Tensor* const> gin) {
                          auto y = node.value.values();
                          auto d = gin[0]->values();
                          auto gv = g.values();
                          for (std::size_t i = 0; i < d.size(); ++i) d[i] += gv[i] * (1.0 - y[i] * y[i]);
                        });
}

Var relu(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return x.tape->record("relu", std::move(out), {x.id},
                        [](const Tape&, const Tape::Node& node, const Tensor& g, std::span<Tensor* const> gin) {
                          auto y = node.value.values();
                          auto d = gin[0]->values();
                          for (std::size_t i = 0; i < d.size(); ++i) d[i] += y[i] > 0.0 ? g[i] : 0.0;
                        });
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  accumulate(out, b.value());
  return tape.record("add", std::move(out), {a.id, b.id},
                     [](const Tape&, const Tape::Node&, const Tensor& g, std::span<Tensor* const> gin) {
                       if (gin[0]) accumulate(*gin[0], g);
                       if (gin[1]) accumulate(*gin[1], g);
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  accumulate(out, b.value(), -1.0);
  return tape.record("sub", std::move(out), {a.id, b.id},
                     [](const Tape&, const Tape::Node&, const Tensor& g, std::span<Tensor* const> gin) {
                       if (gin[0]) accumulate(*gin[0], g);
                       if (gin[1]) accumulate(*gin[1], g, -1.0);
                     });
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return tape.record("mul", std::move(out), {a.id, b.id},
                     [](const Tape& t, const Tape::Node& node, const Tensor& g, std::span<Tensor* const> gin) {
                       const Tensor& av = t.node(node.inputs[0]).value;
                       const Tensor& bv = t.node(node.inputs[1]).value;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         if (gin[0]) (*gin[0])[i] += g[i] * bv[i];
                         if (gin[1]) (*gin[1])[i] += g[i] * av[i];
                       }
                     });
}

Var scale(Var x, double c) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= c;
  return x.tape->record("scale", std::move(out), {x.id},
                        [c](const Tape&, const Tape::Node&, const Tensor& g, std::span<Tensor* const> gin) {
                          accumulate(*gin[0], g, c);
                        });
}

Var scale_rows(Var x, std::vector<double> row_coef) {
  const Tensor& xv = x.value();
  if (row_coef.size() != xv.rows()) throw DimensionError("scale_rows: coefficient count != rows");
  Tensor out = xv;
  const std::size_t m = xv.cols();
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] *= row_coef[i];
  }
  return x.tape->record(
      "scale_rows", std::move(out), {x.id},
      [coef = std::move(row_coef)](const Tape&, const Tape::Node&, const Tensor& g, std::span<Tensor* const> gin) {
        const std::size_t m = g.cols();
        for (std::size_t i = 0; i < coef.size(); ++i) {
          for (std::size_t j = 0; j < m; ++j) (*gin[0])[i * m + j] += coef[i] * g[i * m + j];
        }
      });
}

Var sum(Var x) {
  double acc = 0.0;
  for (double v : x.value().values()) acc += v;
  return x.tape->record("sum", Tensor::scalar(acc), {x.id},
                        [](const Tape&, const Tape::Node&, const Tensor& g, std::span<Tensor* const> gin) {
                          const double s = g[0];
                          for (double& d : gin[0]->values()) d += s;
                        });
}

Var sum_squares(Var x) {
  const double acc = kernels::sum_squares(x.value().values());
  return x.tape->record("sum_squares", Tensor::scalar(acc), {x.id},
                        [](const Tape& t, const Tape::Node& node, const Tensor& g, std::span<Tensor* const> gin) {
                          const Tensor& xv = t.node(node.inputs[0]).value;
                          const double s = 2.0 * g[0];
                          for (std::size_t i = 0; i < xv.size(); ++i) (*gin[0])[i] += s * xv[i];
                        });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  Tape& tape = *parts.front().tape;
  std::vector<Tensor> blocks;
  std::vector<std::size_t> ids;
  blocks.reserve(parts.size());
  for (const Var& p : parts) {
    if (p.tape != &tape) throw ContractError("concat_rows: operands live on different tapes");
    blocks.push_back(p.value());
    ids.push_back(p.id);
  }
  std::vector<std::size_t> sizes;
  for (const auto& b : blocks) sizes.push_back(b.size());
  Tensor out = concat_rows(std::span<const Tensor>(blocks));
  return tape.record(
      "concat_rows", std::move(out), std::move(ids),
      [sizes = std::move(sizes)](const Tape&, const Tape::Node&, const Tensor& g, std::span<Tensor* const> gin) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < gin.size(); ++k) {
          if (gin[k]) {
            for (std::size_t i = 0; i < sizes[k]; ++i) (*gin[k])[i] += g[offset + i];
          }
          offset += sizes[k];
        }
      });
}

}  // namespace alternator
