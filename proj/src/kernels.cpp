#include "projsplit/kernels.hpp"

#include <algorithm>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace projsplit {

namespace {

constexpr std::size_t kChunk = 4096;  // reduction chunk, independent of threads

int detect_threads() {
#ifdef _OPENMP
    int nt = omp_get_max_threads();
    if (const char* env = std::getenv("PROJSPLIT_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0 && cap < nt) nt = cap;
    }
    return nt;
#else
    return 1;
#endif
}

}  // namespace

int max_threads() {
    static const int nt = detect_threads();
    return nt;
}

double dot(const Vec& a, const Vec& b) {
    const std::size_t n = a.size();
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    if (chunks <= 1) return ref::dot(a, b);

    std::vector<double> partial(chunks, 0.0);
    const std::ptrdiff_t pc = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (std::ptrdiff_t c = 0; c < pc; ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = std::min(lo + kChunk, n);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        partial[static_cast<std::size_t>(c)] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

double norm_sq(const Vec& a) { return dot(a, a); }

double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

void axpy(double alpha, const Vec& x, Vec& y) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (n > 8192)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] += alpha * x[static_cast<std::size_t>(i)];
}

void scal(double alpha, Vec& x) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (n > 8192)
    for (std::ptrdiff_t i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] *= alpha;
}

void sub(const Vec& a, const Vec& b, Vec& out) {
    out.resize(a.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (n > 8192)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::size_t u = static_cast<std::size_t>(i);
        out[u] = a[u] - b[u];
    }
}

void matvec(const DenseMatrix& m, const Vec& x, Vec& y) {
    y.resize(m.rows);
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(m.rows);
    // one writer per output element: bit-deterministic for any thread count
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (m.rows* m.cols > 16384)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        const double* r = m.row(static_cast<std::size_t>(i));
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * x[j];
        y[static_cast<std::size_t>(i)] = s;
    }
}

void matvec_transpose(const DenseMatrix& m, const Vec& x, Vec& y) {
    y.assign(m.cols, 0.0);
    const std::size_t chunks = std::min<std::size_t>(16, std::max<std::size_t>(m.rows, 1));
    if (chunks <= 1 || m.rows * m.cols <= 16384) {
        ref::matvec_transpose(m, x, y);
        return;
    }
    // row-chunk partials combined in fixed order
    std::vector<double> partial(chunks * m.cols, 0.0);
    const std::size_t per = (m.rows + chunks - 1) / chunks;
    const std::ptrdiff_t pc = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (std::ptrdiff_t c = 0; c < pc; ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * per;
        const std::size_t hi = std::min(lo + per, m.rows);
        double* p = partial.data() + static_cast<std::size_t>(c) * m.cols;
        for (std::size_t i = lo; i < hi; ++i) {
            const double* r = m.row(i);
            const double xi = x[i];
            for (std::size_t j = 0; j < m.cols; ++j) p[j] += xi * r[j];
        }
    }
    for (std::size_t c = 0; c < chunks; ++c) {
        const double* p = partial.data() + c * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += p[j];
    }
}

void soft_threshold(const Vec& a, double kappa, Vec& out) {
    out.resize(a.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (n > 8192)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::size_t u = static_cast<std::size_t>(i);
        const double v = a[u];
        if (v > kappa) {
            out[u] = v - kappa;
        } else if (v < -kappa) {
            out[u] = v + kappa;
        } else {
            out[u] = 0.0;
        }
    }
}

namespace ref {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm_sq(const Vec& a) { return dot(a, a); }

void matvec(const DenseMatrix& m, const Vec& x, Vec& y) {
    y.resize(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * x[j];
        y[i] = s;
    }
}

void matvec_transpose(const DenseMatrix& m, const Vec& x, Vec& y) {
    y.assign(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += xi * r[j];
    }
}

}  // namespace ref

}  // namespace projsplit
