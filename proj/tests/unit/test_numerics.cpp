#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "alternator/errors.hpp"
#include "alternator/numerics/adam.hpp"
#include "alternator/numerics/checkpoint.hpp"
#include "alternator/numerics/kernels.hpp"
#include "alternator/numerics/logsumexp.hpp"
#include "alternator/numerics/mlp.hpp"
#include "alternator/numerics/schedule.hpp"
#include "alternator/numerics/tape.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace alternator;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("tensor shapes and rank-2 view") {
  Tensor m = Tensor::zeros(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  m(1, 2) = 5.0;
  CHECK(m[5] == 5.0);
  const Tensor r = Tensor::row({1.0, 2.0});
  CHECK(r.rows() == 1);
  CHECK(r.cols() == 2);
  CHECK(Tensor::scalar(4.0).item() == 4.0);
  CHECK_THROWS_AS(Tensor::zeros(2, 2).item(), ContractError);
  CHECK(m.row_slice(1, 2).values()[2] == 5.0);
  CHECK_THROWS_AS(m.row_slice(1, 3), DimensionError);

  std::vector<Tensor> blocks{Tensor::filled(1, 2, 1.0), Tensor::filled(2, 2, 2.0)};
  const Tensor c = concat_rows(blocks);
  CHECK(c.rows() == 3);
  CHECK(c(2, 1) == 2.0);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
#ifdef _OPENMP
  omp_set_num_threads(4);
#endif
  Rng rng(11);
  for (auto [n, k, m] : {std::tuple<std::size_t, std::size_t, std::size_t>{3, 4, 5}, {257, 33, 19}, {1024, 64, 40}}) {
    const auto a = random_vector(rng, n * k);
    const auto b = random_vector(rng, k * m);
    const auto g = random_vector(rng, n * m);
    std::vector<double> s(n * m), p(n * m);
    kernels::serial::matmul(a.data(), b.data(), s.data(), n, k, m);
    kernels::parallel::matmul(a.data(), b.data(), p.data(), n, k, m);
    CHECK(same_bits(s, p));

    std::vector<double> st(k * m), pt(k * m);
    kernels::serial::matmul_tn(a.data(), g.data(), st.data(), n, k, m);
    kernels::parallel::matmul_tn(a.data(), g.data(), pt.data(), n, k, m);
    CHECK(same_bits(st, pt));

    std::vector<double> sn(n * k), pn(n * k);
    kernels::serial::matmul_nt(g.data(), b.data(), sn.data(), n, m, k);
    kernels::parallel::matmul_nt(g.data(), b.data(), pn.data(), n, m, k);
    CHECK(same_bits(sn, pn));

    std::vector<double> cs(m), cp(m);
    kernels::serial::column_sums(g.data(), cs.data(), n, m);
    kernels::parallel::column_sums(g.data(), cp.data(), n, m);
    CHECK(same_bits(cs, cp));

    std::vector<double> ts(g.size()), tp(g.size());
    kernels::serial::tanh_forward(g, ts);
    kernels::parallel::tanh_forward(g, tp);
    CHECK(same_bits(ts, tp));

    CHECK(kernels::serial::sum_squares(g) == kernels::parallel::sum_squares(g));

    auto xs = g, xp = g;
    kernels::serial::add_row_bias(xs.data(), b.data(), n, m);
    kernels::parallel::add_row_bias(xp.data(), b.data(), n, m);
    CHECK(same_bits(xs, xp));
  }
}

TEST_CASE("matmul kernel matches the straight-line oracle") {
  Rng rng(3);
  const Tensor a = oracle::random_matrix(rng, 7, 5);
  const Tensor b = oracle::random_matrix(rng, 5, 4);
  Tape tape;
  const Tensor c = matmul(tape.constant(a), tape.constant(b)).value();
  const auto ref = oracle::matmul(oracle::to_mat(a), oracle::to_mat(b));
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(c(i, j) == doctest::Approx(ref[i][j]).epsilon(1e-14));
}

TEST_CASE("tape: x^2 at 3 has gradient 6") {
  Tape tape;
  const Var x = tape.parameter(Tensor::scalar(3.0));
  const Var loss = x * x;
  CHECK(loss.value().item() == 9.0);
  CHECK(backward(tape, loss).of(x).item() == 6.0);
}

TEST_CASE("tape: constant loss gives zero gradients") {
  Tape tape;
  const Var w = tape.parameter(Tensor::filled(2, 2, 1.5));
  const Var c = tape.constant(Tensor::scalar(4.0));
  const auto grads = backward(tape, sum(c));
  for (double g : grads.of(w).values()) CHECK(g == 0.0);
}

TEST_CASE("tape: backward does not accumulate across calls") {
  Tape tape;
  const Var w = tape.parameter(Tensor::row({1.0, -2.0}));
  const Var loss = sum_squares(w);
  const auto g1 = backward(tape, loss);
  const auto g2 = backward(tape, loss);
  CHECK(g1.of(w) == g2.of(w));
  CHECK(g1.of(w)[1] == -4.0);
}

TEST_CASE("tape: contract errors") {
  Tape tape;
  const Var w = tape.parameter(Tensor::filled(2, 2, 1.0));
  CHECK_THROWS_AS(backward(tape, w), ContractError);
  CHECK_THROWS_AS(matmul(w, tape.constant(Tensor::zeros(3, 1))), DimensionError);
  const Var big = tape.constant(Tensor::scalar(1e308));
  CHECK_THROWS_AS(scale(big, 10.0), NumericError);
}

TEST_CASE("tape: every op passes central finite differences") {
  Rng rng(5);
  for (int instance = 0; instance < 5; ++instance) {
    std::vector<Tensor> params{oracle::random_matrix(rng, 3, 4), oracle::random_matrix(rng, 4, 2),
                               oracle::random_matrix(rng, 1, 2), oracle::random_matrix(rng, 3, 2)};
    const auto weights = oracle::random_matrix(rng, 6, 2);
    auto build = [&](Tape& tape, std::span<const Var> p) {
      const Var h = add_bias(matmul(p[0], p[1]), p[2]);
      const Var a = tanh(h);
      const Var r = relu(scale(h, 0.5) + tape.constant(Tensor::filled(3, 2, 3.0)));  // kept away from the kink
      const Var d = sub(mul(a, p[3]), r);
      const Var rows = scale_rows(d, {0.5, -1.0, 2.0});
      const Var stacked = concat_rows(std::vector<Var>{rows, a});
      return sum(mul(stacked, tape.constant(weights))) + sum_squares(d);
    };
    CHECK(gradcheck::worst_relative_error(params, build) < 1e-6);
  }
}

TEST_CASE("mlp: identity network passes input through") {
  MlpSpec spec{3, {}, 3, Activation::tanh, OutputActivation::identity};
  Mlp net(spec);
  for (std::size_t i = 0; i < 3; ++i) net.weight(0)(i, i) = 1.0;
  const Tensor out = net.forward(Tensor::row({1.0, 2.0, 3.0}));
  CHECK(out == Tensor::row({1.0, 2.0, 3.0}));
}

TEST_CASE("mlp: zero weights output the last bias") {
  MlpSpec spec{1, {2}, 1, Activation::tanh, OutputActivation::identity};
  Mlp net(spec);
  net.bias(1)[0] = 0.75;
  for (double x : {-3.0, 0.0, 11.0}) CHECK(net.forward(Tensor::row({x})).item() == 0.75);
}

TEST_CASE("mlp: forward matches the straight-line oracle") {
  Rng rng(17);
  for (auto act : {Activation::tanh, Activation::relu}) {
    MlpSpec spec{2, {3}, 2, act, OutputActivation::tanh};
    const Mlp net = Mlp::init(spec, rng);
    const Tensor x = oracle::random_matrix(rng, 6, 2);
    const Tensor out = net.forward(x);
    const auto ref = oracle::mlp(net, oracle::to_mat(x));
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(out(i, j) - ref[i][j]) < 1e-12);
  }
}

TEST_CASE("mlp: taped and plain forward are identical") {
  Rng rng(2);
  MlpSpec spec{4, {10, 10}, 3, Activation::tanh, OutputActivation::identity};
  const Mlp net = Mlp::init(spec, rng);
  const Tensor x = oracle::random_matrix(rng, 9, 4);
  Tape tape;
  const auto params = bind_parameters(tape, net);
  CHECK(mlp_forward(spec, params, tape.constant(x)).value() == net.forward(x));
}

TEST_CASE("mlp: init is Glorot uniform with zero biases") {
  Rng rng(8);
  MlpSpec spec{20, {30}, 10, Activation::tanh, OutputActivation::identity};
  const Mlp net = Mlp::init(spec, rng);
  const double limit0 = std::sqrt(6.0 / (20 + 30));
  for (double w : net.weight(0).values()) CHECK(std::abs(w) <= limit0);
  for (double b : net.bias(0).values()) CHECK(b == 0.0);
  CHECK(net.parameter_count() == 20 * 30 + 30 + 30 * 10 + 10);
  CHECK(net.parameter_names("f")[3] == "f.layer1.bias");
}

TEST_CASE("mlp: Lipschitz bound dominates observed output ratios") {
  Rng rng(4);
  MlpSpec spec{3, {10, 10}, 2, Activation::tanh, OutputActivation::identity};
  const Mlp net = Mlp::init(spec, rng);
  const double L = net.lipschitz_bound();
  for (int i = 0; i < 200; ++i) {
    const Tensor a = oracle::random_matrix(rng, 1, 3);
    const Tensor b = oracle::random_matrix(rng, 1, 3);
    const Tensor fa = net.forward(a), fb = net.forward(b);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < 2; ++k) num += (fa[k] - fb[k]) * (fa[k] - fb[k]);
    for (std::size_t k = 0; k < 3; ++k) den += (a[k] - b[k]) * (a[k] - b[k]);
    CHECK(std::sqrt(num) <= L * std::sqrt(den) + 1e-12);
  }
}

TEST_CASE("mlp: taped forward passes finite differences") {
  Rng rng(21);
  MlpSpec spec{3, {4, 4}, 2, Activation::tanh, OutputActivation::tanh};
  const Mlp net = Mlp::init(spec, rng);
  std::vector<Tensor> params(net.parameters().begin(), net.parameters().end());
  for (auto& b : params) {
    if (b.rows() == 1) b = oracle::random_matrix(rng, 1, b.cols(), 0.3);
  }
  const Tensor x = oracle::random_matrix(rng, 5, 3);
  auto build = [&](Tape& tape, std::span<const Var> p) {
    return sum(tanh(mlp_forward(spec, p, tape.constant(x))));
  };
  CHECK(gradcheck::worst_relative_error(params, build) < 1e-4);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<Tensor> params{Tensor::row({1.0, -2.0})};
  auto state = AdamState::for_parameters(params, 0.1);
  const std::vector<Tensor> grads{Tensor::row({0.0, 0.0})};
  adam_step(state, std::span<Tensor>(params), grads, 0.1);
  CHECK(params[0] == Tensor::row({1.0, -2.0}));
}

TEST_CASE("adam: first step with unit gradient is a bias-corrected unit step") {
  std::vector<Tensor> params{Tensor::scalar(0.0)};
  auto state = AdamState::for_parameters(params, 0.1);
  adam_step(state, std::span<Tensor>(params), std::vector<Tensor>{Tensor::scalar(1.0)}, 0.1);
  // m_hat = 1, v_hat = 1: step = 0.1 * 1 / (1 + 1e-8)
  CHECK(params[0].item() == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("adam: two steps on w^2 decrease the objective") {
  std::vector<Tensor> params{Tensor::scalar(1.0)};
  auto state = AdamState::for_parameters(params, 0.1);
  double prev = 1.0;
  for (int i = 0; i < 2; ++i) {
    const double w = params[0].item();
    adam_step(state, std::span<Tensor>(params), std::vector<Tensor>{Tensor::scalar(2.0 * w)}, 0.1);
    const double f = params[0].item() * params[0].item();
    CHECK(f < prev);
    prev = f;
  }
  // Hand-computed: the first step moves by lr * 2 / (2 + eps), the second uses
  // bias-corrected moments of g1 = 2 and g2 = 2 w1.
  const double g1 = 2.0, w1 = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8), g2 = 2.0 * w1;
  const double m = 0.9 * (0.1 * g1) + 0.1 * g2, v = 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  CHECK(params[0].item() == doctest::Approx(w1 - 0.1 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-12));
}

TEST_CASE("lr schedule: warmup ramp and cosine tail") {
  const LrSchedule s{0.01, 1e-4, 10, 500};
  CHECK(lr_at_epoch(s, 0) == 0.0);
  CHECK(lr_at_epoch(s, 5) == doctest::Approx(0.005));
  CHECK(lr_at_epoch(s, 10) == 0.01);
  CHECK(std::abs(lr_at_epoch(s, 499) - 1e-4) < 1e-9);
  const double mid = 1e-4 + 0.5 * (0.01 - 1e-4) * (1 + std::cos(std::numbers::pi * 0.5));
  CHECK(lr_at_epoch(s, 10 + 489 / 2) == doctest::Approx(mid).epsilon(1e-2));
  for (std::size_t e = 11; e < 500; ++e) CHECK(lr_at_epoch(s, e) <= lr_at_epoch(s, e - 1));
  CHECK_THROWS_AS(lr_at_epoch(s, 500), ContractError);
  CHECK_THROWS_AS(lr_at_epoch(LrSchedule{0.01, 0.02, 1, 5}, 0), ContractError);
}

TEST_CASE("checkpoint: binary and text round trips are exact") {
  Rng rng(9);
  Checkpoint ck;
  ck.digest = spec_digest("otn 3-[10,10]-100");
  ck.tensors.push_back({"otn.layer0.weight", oracle::random_matrix(rng, 3, 10)});
  ck.tensors.push_back({"otn.layer0.bias", Tensor::row({0.1, std::numeric_limits<double>::denorm_min(), -0.0})});
  const auto dir = std::filesystem::temp_directory_path() / "alternator_ckpt_test";
  std::filesystem::create_directories(dir);
  write_checkpoint(dir / "a.altn", ck);
  CHECK(read_checkpoint(dir / "a.altn") == ck);
  CHECK(import_text(export_text(ck)) == ck);
  CHECK(ck.at("otn.layer0.bias").cols() == 3);
  CHECK_THROWS(ck.at("missing"));

  write_file_atomic(dir / "bad.altn", "NOPE1garbage");
  CHECK_THROWS_AS(read_checkpoint(dir / "bad.altn"), FormatError);
  auto bytes = read_file(dir / "a.altn");
  write_file_atomic(dir / "short.altn", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(dir / "short.altn"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("log-sum-exp: shift identity and naive agreement") {
  Rng rng(12);
  for (int i = 0; i < 50; ++i) {
    auto v = random_vector(rng, 7);
    double naive = 0.0;
    for (double x : v) naive += std::exp(x);
    CHECK(std::abs(log_sum_exp(v) - std::log(naive)) < 1e-12);
    auto shifted = v;
    for (double& x : shifted) x += 1000.0;
    CHECK(std::abs(log_sum_exp(shifted) - (log_sum_exp(v) + 1000.0)) < 1e-9);
  }
  CHECK(std::isinf(log_sum_exp(std::vector<double>{})));
}
