#include <algorithm>
#include <cmath>

#include "alternator/numerics/kernels.hpp"

namespace alternator::kernels::serial {

void matmul(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    for (std::size_t j = 0; j < m; ++j) ci[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;  // sparse inputs (spike trains); adding 0 * finite is a no-op
      const double* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
}

void matmul_tn(const double* a, const double* g, double* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t p = 0; p < k; ++p) {
    double* cp = c + p * m;
    for (std::size_t j = 0; j < m; ++j) cp[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* gi = g + i * m;
      for (std::size_t j = 0; j < m; ++j) cp[j] += aip * gi[j];
    }
  }
}

void matmul_nt(const double* g, const double* b, double* c, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* gi = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += gi[j] * bp[j];
      c[i * k + p] = acc;
    }
  }
}

void add_row_bias(double* x, const double* bias, std::size_t n, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) x[i * m + j] += bias[j];
  }
}

void column_sums(const double* g, double* out, std::size_t n, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[j] += g[i * m + j];
  }
}

void tanh_forward(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
}

// Same 4096-element blocking as the parallel reduction, so both round alike.
double sum_squares(std::span<const double> x) {
  constexpr std::size_t block = 4096;
  double total = 0.0;
  for (std::size_t b = 0; b < x.size(); b += block) {
    const std::size_t end = std::min(x.size(), b + block);
    double acc = 0.0;
    for (std::size_t i = b; i < end; ++i) acc += x[i] * x[i];
    total += acc;
  }
  return total;
}

}  // namespace alternator::kernels::serial
