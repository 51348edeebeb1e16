#pragma once

#include <functional>
#include <limits>

#include "projsplit/hyperplane.hpp"
#include "projsplit/scheduler.hpp"

namespace projsplit {

// A monotone inclusion 0 in sum_i G_i^* T_i(G_i z) + T_n(z). The last block
// must couple through the identity.
struct Problem {
    std::size_t primal_dim = 0;
    std::vector<OperatorBlock> blocks;
};

enum class StepMode { Backward, BackwardInexact, ForwardPlain, ForwardBacktrack, ForwardAffineAuto };

struct StoppingRule {
    std::int64_t max_iterations = 1000;
    double max_q_equivalents = std::numeric_limits<double>::infinity();
    double target_subgrad_residual = 0.0;  // <= 0 disables the early stop
};

struct IterationMetrics {
    double objective = std::numeric_limits<double>::quiet_NaN();
    double subgrad_residual = std::numeric_limits<double>::quiet_NaN();
};
using MetricsFn = std::function<IterationMetrics(const Vec& x)>;

// Everything a per-step observer needs to verify the separation inequality
//   <gz - x, y - w> >= delta_eff * ||gz - x||^2
// and the inexact prox contract.
struct BlockStepInfo {
    int block = 0;
    std::int64_t k = 0;
    std::int64_t d = 0;
    StepMode mode = StepMode::Backward;
    const Vec* gz_used = nullptr;
    const Vec* w_used = nullptr;
    const Vec* a = nullptr;  // prox input gz + rho*w; null for forward modes
    const BlockGraphPoint* point = nullptr;
    const Vec* e = nullptr;  // backward modes only
    double rho_used = 0.0;
    double delta_eff = 0.0;
    double sigma = 0.0;  // inexact backward only
};

struct SolverConfig {
    double gamma = 1.0;
    double beta = 1.0;
    double delta = 1.0;
    double rho_min = 1e-10;
    double rho_max = 1e10;
    std::vector<StepMode> modes;  // empty: derived from block capabilities
    std::vector<double> rho;      // per block; empty: 1.0, or 0.9/L for plain forward
    // stepsize of the always-active prox block follows the running average of
    // the most recently accepted forward stepsizes
    bool prox_rho_from_forward_average = false;
    SchedulePolicy policy;
    DelayModel delay;
    StoppingRule stopping;
    double pi_zero_tol = 1e-28;
    std::optional<PrimalDualPoint> initial_point;  // defaults to the origin
    std::uint64_t seed = 0;  // master seed; scheduler and delay streams derive from it
    MetricsFn metrics;
    std::int64_t metrics_stride = 1;
    std::function<void(const BlockStepInfo&)> on_block_step;
    std::function<void(std::int64_t k, const PrimalDualPoint& p, const Vec& w_n)> on_iterate;
};

enum class SolveStatus { Converged, FiniteTermination, BudgetExhausted };

struct IterationRow {
    std::int64_t k = 0;
    std::vector<int> active;
    std::vector<std::pair<int, std::int64_t>> delays;  // (block, d(i,k))
    double phi = 0.0;
    double pi = 0.0;
    double alpha = 0.0;
    double q_equivalents = 0.0;  // cumulative
    double objective = std::numeric_limits<double>::quiet_NaN();
    double subgrad_residual = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<int, int>> backtracks;     // (block, J)
    std::vector<std::pair<int, int>> cg_iterations;  // (block, inner iterations)
};

struct RunRecord {
    SolveStatus status = SolveStatus::BudgetExhausted;
    PrimalDualPoint final_point;
    Vec final_w_n;
    std::vector<BlockGraphPoint> final_blocks;
    std::vector<IterationRow> iterations;
    double total_q_equivalents = 0.0;
    std::uint64_t seed = 0;
    std::int64_t iterations_run = 0;
};

// Runs the asynchronous block-iterative projective splitting loop. Every
// block is processed once at k = 1 so the separator is valid from the start;
// the configured policy takes over from k = 2.
RunRecord solve(const Problem& problem, const SolverConfig& config);

const char* to_string(SolveStatus s);

}  // namespace projsplit
