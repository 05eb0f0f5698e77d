#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "alternator/numerics/tensor.hpp"

namespace alternator {

// M members, each T x D, predicting `truth` (T x D).
struct Ensemble {
  std::vector<Tensor> members;
  Tensor truth;

  void validate() const;
  Tensor mean() const;
};

double mae(const Tensor& pred, const Tensor& truth);
double mse(const Tensor& pred, const Tensor& truth);

// Pearson correlation over time per column, averaged over columns.
double pearson_cc(const Tensor& pred, const Tensor& truth);

enum class CrpsEstimator {
  empirical,  // mean|X - y| - 1/2 mean_{m,m'}|X_m - X_m'|, pairs over M^2
  fair,       // spread term normalized by M (M - 1)
};

// CRPS averaged over all T x D entries.
double crps_ensemble(const Ensemble& ens, CrpsEstimator estimator = CrpsEstimator::empirical);

// sqrt(mean entry variance (M - 1 divisor)) / RMSE(ensemble mean, truth).
double ssr(const Ensemble& ens);

// Mean and standard error of a sample (stderr = sd / sqrt(n), sd with n - 1).
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanStderr mean_stderr(std::span<const double> values);

namespace serial {
double crps_ensemble(const Ensemble& ens, CrpsEstimator estimator = CrpsEstimator::empirical);
}

}  // namespace alternator
