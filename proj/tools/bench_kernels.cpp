// Timing comparison of the OpenMP kernels against the serial references.
#include <chrono>
#include <cstdio>

#include "projsplit/common.hpp"
#include "projsplit/kernels.hpp"

namespace {

using namespace projsplit;
using clk = std::chrono::steady_clock;

volatile double sink = 0.0;

template <class F>
double time_ms(F&& f, int reps) {
    f();  // warm up
    auto t0 = clk::now();
    for (int r = 0; r < reps; ++r) f();
    auto t1 = clk::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    const std::size_t m = 2000, d = 4000;
    SplitMix64 rng(7);
    DenseMatrix q(m, d);
    for (double& v : q.data) v = rng.normal();
    Vec x(d), r(m), out;
    for (double& v : x) v = rng.normal();
    for (double& v : r) v = rng.normal();

    std::printf("threads: %d\n", max_threads());
    std::printf("%-18s %12s %12s %9s\n", "kernel", "serial(ms)", "parallel(ms)", "speedup");

    const int reps = 20;
    double ts, tp;

    ts = time_ms([&] { sink = ref::dot(x, x); }, reps);
    tp = time_ms([&] { sink = dot(x, x); }, reps);
    std::printf("%-18s %12.3f %12.3f %9.2f\n", "dot(d)", ts, tp, ts / tp);

    ts = time_ms([&] { ref::matvec(q, x, out); }, reps);
    tp = time_ms([&] { matvec(q, x, out); }, reps);
    std::printf("%-18s %12.3f %12.3f %9.2f\n", "matvec", ts, tp, ts / tp);

    ts = time_ms([&] { ref::matvec_transpose(q, r, out); }, reps);
    tp = time_ms([&] { matvec_transpose(q, r, out); }, reps);
    std::printf("%-18s %12.3f %12.3f %9.2f\n", "matvec_transpose", ts, tp, ts / tp);

    return 0;
}
