#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace alternator {

inline double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : terms) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace alternator
