#pragma once

#include <cstddef>

#include "projsplit/common.hpp"

// Dense kernels used on every hot path of the solver. Each kernel has an
// OpenMP implementation (namespace projsplit) and a plain serial reference
// (namespace projsplit::ref) kept for testing and benchmarking.
//
// The parallel reductions are bit-deterministic: sums are accumulated over
// fixed-size chunks whose layout does not depend on the thread count, and
// the chunk partials are combined in index order. A run therefore produces
// the same trajectory for any value of PROJSPLIT_THREADS.

namespace projsplit {

// Thread cap: min(omp_get_max_threads(), $PROJSPLIT_THREADS). 1 without OpenMP.
int max_threads();

double dot(const Vec& a, const Vec& b);
double norm_sq(const Vec& a);
double norm(const Vec& a);

// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);
// x *= alpha
void scal(double alpha, Vec& x);
// out = a - b
void sub(const Vec& a, const Vec& b, Vec& out);

// y = M x        (x: cols, y: rows)
void matvec(const DenseMatrix& m, const Vec& x, Vec& y);
// y = M^T x      (x: rows, y: cols)
void matvec_transpose(const DenseMatrix& m, const Vec& x, Vec& y);

// out[j] = sign(a[j]) * max(|a[j]| - kappa, 0)
void soft_threshold(const Vec& a, double kappa, Vec& out);

namespace ref {

double dot(const Vec& a, const Vec& b);
double norm_sq(const Vec& a);
void matvec(const DenseMatrix& m, const Vec& x, Vec& y);
void matvec_transpose(const DenseMatrix& m, const Vec& x, Vec& y);

}  // namespace ref

}  // namespace projsplit
