#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "alternator/numerics/kernels.hpp"

namespace alternator::kernels {

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1u << 15;
constexpr std::size_t kReduceBlock = 4096;

long as_long(std::size_t v) { return static_cast<long>(v); }
}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace parallel {

void matmul(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m) {
  const bool go = n * k * m >= kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (long li = 0; li < as_long(n); ++li) {
    const auto i = static_cast<std::size_t>(li);
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
  const bool go = n * k * m >= kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (long lp = 0; lp < as_long(k); ++lp) {
    const auto p = static_cast<std::size_t>(lp);
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
  const bool go = n * k * m >= kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (long li = 0; li < as_long(n); ++li) {
    const auto i = static_cast<std::size_t>(li);
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
  const bool go = n * m >= kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (long li = 0; li < as_long(n); ++li) {
    const auto i = static_cast<std::size_t>(li);
    for (std::size_t j = 0; j < m; ++j) x[i * m + j] += bias[j];
  }
}

void column_sums(const double* g, double* out, std::size_t n, std::size_t m) {
  const bool go = n * m >= kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (long lj = 0; lj < as_long(m); ++lj) {
    const auto j = static_cast<std::size_t>(lj);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += g[i * m + j];
    out[j] = acc;
  }
}

void tanh_forward(std::span<const double> in, std::span<double> out) {
  const bool go = in.size() >= kParallelWork / 8;
#pragma omp parallel for schedule(static) if (go)
  for (long li = 0; li < as_long(in.size()); ++li) {
    const auto i = static_cast<std::size_t>(li);
    out[i] = std::tanh(in[i]);
  }
}

double sum_squares(std::span<const double> x) {
  const std::size_t blocks = (x.size() + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  const bool go = x.size() >= kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (long lb = 0; lb < as_long(blocks); ++lb) {
    const auto b = static_cast<std::size_t>(lb);
    const std::size_t end = std::min(x.size(), (b + 1) * kReduceBlock);
    double acc = 0.0;
    for (std::size_t i = b * kReduceBlock; i < end; ++i) acc += x[i] * x[i];
    partial[b] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace parallel
}  // namespace alternator::kernels
