#include "alternator/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "alternator/errors.hpp"

namespace alternator {

namespace {

void check_pair(const Tensor& pred, const Tensor& truth, const char* what) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw DimensionError(std::string(what) + ": prediction " + shape_string(pred.shape()) + " vs truth " +
                         shape_string(truth.shape()));
  }
  if (truth.size() == 0) throw ContractError(std::string(what) + ": empty input");
}

// Sorted-member CRPS for one entry: sum_m |x_m - y| and the pairwise sum
// via sum_{i<j} (x_j - x_i) = sum_j (2j - M + 1) x_(j) on sorted values.
double crps_entry(std::vector<double>& xs, double y, CrpsEstimator est) {
  const double M = static_cast<double>(xs.size());
  double skill = 0.0;
  for (double v : xs) skill += std::abs(v - y);
  std::sort(xs.begin(), xs.end());
  double pair = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) pair += (2.0 * static_cast<double>(j) - M + 1.0) * xs[j];
  // sum over ordered pairs m != m' equals 2 * pair
  const double spread = est == CrpsEstimator::empirical ? 2.0 * pair / (M * M)
                                                        : (M > 1 ? 2.0 * pair / (M * (M - 1.0)) : 0.0);
  return skill / M - 0.5 * spread;
}

}  // namespace

void Ensemble::validate() const {
  if (members.empty()) throw ContractError("ensemble: need at least one member");
  for (const auto& m : members) {
    if (m.rows() != truth.rows() || m.cols() != truth.cols()) throw DimensionError("ensemble: member shape mismatch");
  }
}

Tensor Ensemble::mean() const {
  validate();
  Tensor out = Tensor::zeros(truth.rows(), truth.cols());
  for (const auto& m : members) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& v : out.values()) v *= inv;
  return out;
}

double mae(const Tensor& pred, const Tensor& truth) {
  check_pair(pred, truth, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
  return acc / static_cast<double>(pred.size());
}

double mse(const Tensor& pred, const Tensor& truth) {
  check_pair(pred, truth, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return acc / static_cast<double>(pred.size());
}

double pearson_cc(const Tensor& pred, const Tensor& truth) {
  check_pair(pred, truth, "pearson_cc");
  const std::size_t T = truth.rows();
  const std::size_t D = truth.cols();
  double total = 0.0;
  for (std::size_t c = 0; c < D; ++c) {
    double mp = 0.0, mt = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      mp += pred(t, c);
      mt += truth(t, c);
    }
    mp /= static_cast<double>(T);
    mt /= static_cast<double>(T);
    double sp = 0.0, st = 0.0, cov = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double a = pred(t, c) - mp;
      const double b = truth(t, c) - mt;
      sp += a * a;
      st += b * b;
      cov += a * b;
    }
    if (!(sp > 0.0) || !(st > 0.0)) {
      throw ContractError("pearson_cc: dimension " + std::to_string(c) + " has zero variance");
    }
    total += std::clamp(cov / std::sqrt(sp * st), -1.0, 1.0);
  }
  return total / static_cast<double>(D);
}

double crps_ensemble(const Ensemble& ens, CrpsEstimator estimator) {
  ens.validate();
  const std::size_t n = ens.truth.size();
  const std::size_t M = ens.members.size();
  std::vector<double> per_entry(n);
#pragma omp parallel
  {
    std::vector<double> xs(M);
#pragma omp for schedule(static)
    for (long li = 0; li < static_cast<long>(n); ++li) {
      const auto i = static_cast<std::size_t>(li);
      for (std::size_t m = 0; m < M; ++m) xs[m] = ens.members[m][i];
      per_entry[i] = crps_entry(xs, ens.truth[i], estimator);
    }
  }
  double acc = 0.0;
  for (double v : per_entry) acc += v;
  return acc / static_cast<double>(n);
}

namespace serial {
double crps_ensemble(const Ensemble& ens, CrpsEstimator estimator) {
  ens.validate();
  const std::size_t n = ens.truth.size();
  const std::size_t M = ens.members.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double skill = 0.0, spread = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      skill += std::abs(ens.members[m][i] - ens.truth[i]);
      for (std::size_t k = 0; k < M; ++k) spread += std::abs(ens.members[m][i] - ens.members[k][i]);
    }
    const double Md = static_cast<double>(M);
    const double norm = estimator == CrpsEstimator::empirical ? Md * Md : (M > 1 ? Md * (Md - 1.0) : 1.0);
    acc += skill / Md - 0.5 * spread / norm;
  }
  return acc / static_cast<double>(n);
}
}  // namespace serial

double ssr(const Ensemble& ens) {
  ens.validate();
  const std::size_t M = ens.members.size();
  if (M < 2) throw ContractError("ssr: need at least two members");
  const Tensor mean = ens.mean();
  const std::size_t n = ens.truth.size();
  double var_sum = 0.0, err_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (const auto& m : ens.members) v += (m[i] - mean[i]) * (m[i] - mean[i]);
    var_sum += v / static_cast<double>(M - 1);
    err_sum += (mean[i] - ens.truth[i]) * (mean[i] - ens.truth[i]);
  }
  const double rmse = std::sqrt(err_sum / static_cast<double>(n));
  if (!(rmse > 0.0)) throw ContractError("ssr: ensemble mean matches truth exactly (zero RMSE)");
  return std::sqrt(var_sum / static_cast<double>(n)) / rmse;
}

MeanStderr mean_stderr(std::span<const double> values) {
  if (values.empty()) throw ContractError("mean_stderr: empty sample");
  MeanStderr r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.stderr_ = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
  }
  return r;
}

}  // namespace alternator
