#pragma once

#include <cstddef>
#include <span>

// Dense kernels behind the tape. Two implementations share one contract:
//   serial::   straight loops, the reference used by tests and the benchmark
//   parallel:: OpenMP over independent output rows
// Every output element is accumulated in the same order by both, so the
// matrix products agree bit-for-bit regardless of thread count. Reductions
// (sum_squares) use fixed-size blocks combined in block order.

namespace alternator::kernels {

namespace serial {
// c[n x m] = a[n x k] * b[k x m]
void matmul(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m);
// c[k x m] = a[n x k]^T * g[n x m]
void matmul_tn(const double* a, const double* g, double* c, std::size_t n, std::size_t k, std::size_t m);
// c[n x k] = g[n x m] * b[k x m]^T
void matmul_nt(const double* g, const double* b, double* c, std::size_t n, std::size_t m, std::size_t k);
void add_row_bias(double* x, const double* bias, std::size_t n, std::size_t m);
void column_sums(const double* g, double* out, std::size_t n, std::size_t m);
void tanh_forward(std::span<const double> in, std::span<double> out);
double sum_squares(std::span<const double> x);
}  // namespace serial

namespace parallel {
void matmul(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m);
void matmul_tn(const double* a, const double* g, double* c, std::size_t n, std::size_t k, std::size_t m);
void matmul_nt(const double* g, const double* b, double* c, std::size_t n, std::size_t m, std::size_t k);
void add_row_bias(double* x, const double* bias, std::size_t n, std::size_t m);
void column_sums(const double* g, double* out, std::size_t n, std::size_t m);
void tanh_forward(std::span<const double> in, std::span<double> out);
double sum_squares(std::span<const double> x);
}  // namespace parallel

// Kernels used by the tape.
using namespace parallel;

int max_threads();

}  // namespace alternator::kernels
