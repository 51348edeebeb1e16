#pragma once

#include "projsplit/solver.hpp"

namespace projsplit {

// min_x (1/2)||Qx - b||^2 + lambda*||x||_1 with a row partition for the
// splitting.
struct LassoProblem {
    DenseMatrix q;
    Vec b;
    double lambda = 0.0;
    std::vector<std::vector<std::size_t>> partition;  // disjoint row index sets covering all rows
};

enum class SplitKind { PSFor, PSBack };

struct SplittingOptions {
    SplitKind kind = SplitKind::PSFor;
    double sigma = 0.9;  // relative error constant for the CG backward steps
    CgConfig cg;
    bool permute_rows = false;  // shuffle rows before the contiguous split
    std::uint64_t seed = 0;
    // alternative modeling G_i = Q_i, T_i(t) = t - b_i; off by default
    bool compose_gi = false;
};

// The splitting instance: r least-squares blocks plus the soft-threshold
// block, with the solver config fragments it implies.
struct Splitting {
    Problem problem;
    std::vector<std::vector<std::size_t>> partition;
    std::vector<StepMode> modes;
    std::vector<int> always_active;  // the soft-threshold block
    bool prox_rho_from_forward_average = false;
};

std::vector<std::vector<std::size_t>> contiguous_partition(std::size_t m, std::size_t r);

// Uses problem.partition when nonempty, otherwise a contiguous near-equal
// split into r blocks (optionally row-permuted). Each matrix block carries
// cost weight |R_i|/m.
Splitting build_splitting(const LassoProblem& problem, std::size_t r, const SplittingOptions& opts = {});

double objective(const LassoProblem& problem, const Vec& x);

// Norm of the minimum-norm subgradient of the lasso objective at x.
double subgrad_residual(const LassoProblem& problem, const Vec& x);

// Metrics hook for solve() evaluating the two quantities above.
MetricsFn lasso_metrics(const LassoProblem& problem);

struct FistaConfig {
    std::int64_t max_iterations = 1000;
    double max_q_equivalents = std::numeric_limits<double>::infinity();
    double target_subgrad_residual = 0.0;
    double initial_stepsize = 1.0;
    double shrink = 0.5;
    std::int64_t metrics_stride = 1;
};

// FISTA with a backtracking linesearch on the smooth part, no restarts.
// Emits the same telemetry rows as solve() so curves are comparable per
// Q-equivalent multiply: one Q^T per iteration plus one Q per trial (the
// accepted product is reused to form the next momentum point).
RunRecord fista(const LassoProblem& problem, const FistaConfig& config = {});

// Best objective value seen along a long FISTA run; callers fold in the
// minima of their own runs.
double estimate_fstar(const LassoProblem& problem, std::int64_t iterations = 5000);

struct LambdaCalibration {
    double lambda = 0.0;
    double nonzero_fraction = 0.0;
};

// Bisects lambda in (0, ||Q^T b||_inf) until the solution has roughly the
// target fraction of nonzero entries.
LambdaCalibration calibrate_lambda(const LassoProblem& problem, double target_fraction = 0.10,
                                   std::int64_t probe_iterations = 400, int bisection_steps = 12);

}  // namespace projsplit
