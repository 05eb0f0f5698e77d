#include <doctest.h>

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "alternator/errors.hpp"
#include "alternator/metrics/metrics.hpp"
#include "alternator/metrics/report.hpp"
#include "oracles.hpp"

using namespace alternator;

namespace {

Ensemble random_ensemble(Rng& rng, std::size_t M, std::size_t T, std::size_t D) {
  Ensemble e;
  e.truth = oracle::random_matrix(rng, T, D);
  for (std::size_t m = 0; m < M; ++m) e.members.push_back(oracle::random_matrix(rng, T, D));
  return e;
}

// Truth and members drawn exchangeably around a shared random center.
Ensemble exchangeable_ensemble(Rng& rng, std::size_t M, std::size_t T, std::size_t D, double s) {
  Ensemble e;
  const Tensor center = oracle::random_matrix(rng, T, D);
  e.truth = center;
  for (double& v : e.truth.values()) v += s * standard_normal(rng);
  for (std::size_t m = 0; m < M; ++m) {
    Tensor x = center;
    for (double& v : x.values()) v += s * standard_normal(rng);
    e.members.push_back(x);
  }
  return e;
}

}  // namespace

TEST_CASE("mae and mse: trivial cases and loop oracle") {
  Rng rng(1);
  const Tensor t = oracle::random_matrix(rng, 3, 2);
  CHECK(mae(t, t) == 0.0);
  CHECK(mse(t, t) == 0.0);
  Tensor p = t;
  for (double& v : p.values()) v += 1.0;
  CHECK(mae(p, t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mse(p, t) == doctest::Approx(1.0).epsilon(1e-15));

  const Tensor q = oracle::random_matrix(rng, 3, 2);
  double a = 0.0, s = 0.0;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      a += std::abs(q(r, c) - t(r, c));
      s += (q(r, c) - t(r, c)) * (q(r, c) - t(r, c));
    }
  CHECK(mae(q, t) == doctest::Approx(a / 6.0).epsilon(1e-15));
  CHECK(mse(q, t) == doctest::Approx(s / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(mae(q, Tensor::zeros(2, 3)), DimensionError);
}

TEST_CASE("pearson cc: sign, affine invariance, per-column average") {
  Rng rng(2);
  const Tensor t = oracle::random_matrix(rng, 40, 3);
  CHECK(pearson_cc(t, t) == doctest::Approx(1.0).epsilon(1e-15));
  Tensor neg = t;
  for (double& v : neg.values()) v = -v;
  CHECK(pearson_cc(neg, t) == doctest::Approx(-1.0).epsilon(1e-15));

  const Tensor p = oracle::random_matrix(rng, 40, 3);
  Tensor aff = p;
  for (double& v : aff.values()) v = 3.7 * v - 12.0;
  CHECK(std::abs(pearson_cc(aff, t) - pearson_cc(p, t)) < 1e-12);

  double want = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> a, b;
    for (std::size_t r = 0; r < 40; ++r) {
      a.push_back(p(r, c));
      b.push_back(t(r, c));
    }
    want += oracle::pearson(a, b) / 3.0;
  }
  CHECK(pearson_cc(p, t) == doctest::Approx(want).epsilon(1e-13));

  Tensor flat = t;
  for (std::size_t r = 0; r < 40; ++r) flat(r, 1) = 2.0;
  CHECK_THROWS_AS(pearson_cc(flat, t), ContractError);
}

TEST_CASE("crps: single member equals MAE, exact truth gives zero") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Ensemble e = random_ensemble(rng, 1, 5, 2);
    CHECK(crps_ensemble(e) == doctest::Approx(mae(e.members[0], e.truth)).epsilon(1e-15));
  }
  Ensemble same = random_ensemble(rng, 4, 3, 2);
  for (auto& m : same.members) m = same.truth;
  CHECK(crps_ensemble(same) == 0.0);
}

TEST_CASE("crps: two-member closed form") {
  Ensemble e;
  e.truth = Tensor::scalar(1.0).reshaped({1, 1});
  e.members = {Tensor::scalar(0.0).reshaped({1, 1}), Tensor::scalar(2.0).reshaped({1, 1})};
  CHECK(crps_ensemble(e) == doctest::Approx(0.5).epsilon(1e-15));
  // Empirical CDF F = 0 on (-inf,0), 1/2 on [0,2), 1 after; integral of
  // (F - 1{x >= 1})^2 = 1/4 * 1 + 1/4 * 1.
  CHECK(crps_ensemble(e) == doctest::Approx(0.25 + 0.25).epsilon(1e-15));
  // Fair form divides the spread by M (M - 1): 1 - 1/2 * 2 * 2 / 2 = 0.
  CHECK(crps_ensemble(e, CrpsEstimator::fair) == doctest::Approx(0.0));
}

TEST_CASE("crps: energy-form oracle, ordering, non-negativity, serial agreement") {
  Rng rng(4);
#ifdef _OPENMP
  omp_set_num_threads(4);
#endif
  for (int i = 0; i < 20; ++i) {
    Ensemble e = random_ensemble(rng, 2 + i % 7, 4, 3);
    double want = 0.0;
    for (std::size_t k = 0; k < e.truth.size(); ++k) {
      std::vector<double> mem;
      for (const auto& m : e.members) mem.push_back(m[k]);
      want += oracle::crps_energy(mem, e.truth[k]);
    }
    want /= static_cast<double>(e.truth.size());
    const double got = crps_ensemble(e);
    CHECK(got == doctest::Approx(want).epsilon(1e-13));
    CHECK(got >= 0.0);
    // The pairwise reference sums in a different order than the sorted form.
    CHECK(got == doctest::Approx(serial::crps_ensemble(e)).epsilon(1e-13));
    std::reverse(e.members.begin(), e.members.end());
    CHECK(crps_ensemble(e) == doctest::Approx(got).epsilon(1e-14));
  }
}

TEST_CASE("ensemble mean beats the average member (Jensen)") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Ensemble e = random_ensemble(rng, 6, 5, 2);
    double avg = 0.0;
    for (const auto& m : e.members) avg += mse(m, e.truth) / 6.0;
    CHECK(mse(e.mean(), e.truth) <= avg + 1e-15);
  }
}

TEST_CASE("ssr: exchangeable calibrated ensemble is near 1") {
  Rng rng(6);
  const std::size_t M = 50;
  const Ensemble e = exchangeable_ensemble(rng, M, 2000, 5, 0.7);
  // Finite-M expectation: sqrt(M / (M + 1)).
  CHECK(std::abs(ssr(e) - 1.0) < 0.05);
  CHECK(ssr(e) == doctest::Approx(std::sqrt(50.0 / 51.0)).epsilon(0.02));
}

TEST_CASE("ssr: members scattered around the truth itself give sqrt(M)") {
  // With members ~ N(truth, s^2) the ensemble mean error has variance s^2 / M
  // while the spread is s, so the ratio is sqrt(M), not 1.
  Rng rng(7);
  Ensemble e;
  e.truth = oracle::random_matrix(rng, 1000, 10);
  for (int m = 0; m < 50; ++m) {
    Tensor x = e.truth;
    for (double& v : x.values()) v += 0.5 * standard_normal(rng);
    e.members.push_back(x);
  }
  CHECK(ssr(e) == doctest::Approx(std::sqrt(50.0)).epsilon(0.05));
}

TEST_CASE("ssr: degenerate cases and spread scaling") {
  Rng rng(8);
  Ensemble same = random_ensemble(rng, 4, 5, 2);
  for (auto& m : same.members) m = same.members[0];
  CHECK(ssr(same) == 0.0);

  const Ensemble e = random_ensemble(rng, 5, 6, 2);
  const Tensor mean = e.mean();
  Ensemble wide = e;
  for (auto& m : wide.members)
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = mean[k] + 2.0 * (m[k] - mean[k]);
  CHECK(ssr(wide) == doctest::Approx(2.0 * ssr(e)).epsilon(1e-12));

  Ensemble one = random_ensemble(rng, 1, 3, 2);
  CHECK_THROWS_AS(ssr(one), ContractError);
  Ensemble exact = random_ensemble(rng, 3, 3, 2);
  exact.truth = exact.mean();
  CHECK_THROWS_AS(ssr(exact), ContractError);
}

TEST_CASE("ensemble validation") {
  Ensemble empty;
  empty.truth = Tensor::zeros(2, 2);
  CHECK_THROWS_AS(empty.validate(), ContractError);
  Rng rng(9);
  Ensemble bad = random_ensemble(rng, 2, 3, 2);
  bad.members[1] = Tensor::zeros(3, 3);
  CHECK_THROWS_AS(bad.validate(), DimensionError);
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanStderr ms = mean_stderr(v);
  CHECK(ms.mean == 2.5);
  CHECK(ms.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("metric report: JSON and CSV round trip") {
  MetricReport rep;
  rep.add("mae", 0.125, 0.01);
  rep.add("cc", std::nan(""), std::nan(""));
  const MetricReport back = MetricReport::from_json(rep.to_json());
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].value == 0.125);
  CHECK(std::isnan(back.rows[1].value));
  CHECK(rep.to_csv().rfind("metric,value,stderr\n", 0) == 0);
  CHECK(rep.find("mae") != nullptr);
  CHECK(rep.find("crps") == nullptr);
}
