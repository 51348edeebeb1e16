#pragma once

#include <cstdint>
#include <limits>

#include "projsplit/operators.hpp"

namespace projsplit {

// Per-block stepsize bookkeeping. The meaning of rho depends on the mode:
// the actual stepsize for backward and plain-forward blocks, the initial
// trial value for backtracking blocks. rho_hat_last starts at +inf so the
// closed-form rule min{rho_tilde/2, rho_hat_last} reduces to rho_tilde/2 on
// first use.
struct StepsizeState {
    double rho = 1.0;
    double rho_hat_last = std::numeric_limits<double>::infinity();
    double delta = 1.0;
    double rho_bar_fallback = 0.0;  // 0: use last accepted stepsize, else 1/delta
    double rho_min = 1e-10;
    double rho_max = 1e10;
};

// Current graph point (x_i, y_i) with y_i in T_i x_i once updated.
struct BlockGraphPoint {
    Vec x;
    Vec y;
    bool ever_updated = false;
    std::int64_t last_processed = 0;
};

struct StepResult {
    BlockGraphPoint point;
    Vec e;                // inexact backward defect; empty for other modes
    double rho_used = 0.0;
    double rho_tilde = std::numeric_limits<double>::quiet_NaN();  // raw closed-form stepsize
    int backtracks = 0;   // trials J for the backtracking engine
    int cg_iterations = 0;
};

// Resolvent step at a = G_i z_used + rho*w_used. Dispatches to the exact
// prox (e = 0) or the warm-started CG solve.
StepResult backward_step(const OperatorBlock& block, const Vec& z_used, const Vec& w_used, double rho,
                         const Vec& warm_start = {}, CostMeter* cost = nullptr);

// x = G z - rho*(T G z - w), y = T x. Requires rho < 1/L when L is known
// unless allow_unsafe is set.
StepResult forward_step_plain(const OperatorBlock& block, const Vec& z_used, const Vec& w_used,
                              double rho, bool allow_unsafe = false, CostMeter* cost = nullptr);

// Halve the trial stepsize until delta*||theta - x~||^2 <= <theta - x~, y~ - w>.
// One operator evaluation per trial after the shared theta/zeta evaluations.
StepResult backtracking_forward(const OperatorBlock& block, const Vec& z_used, const Vec& w_used,
                                double rho_initial, double delta, int max_backtracks = 60,
                                CostMeter* cost = nullptr);

// Closed-form stepsize for affine operators:
//   rho_tilde = ||xi||^2 / (delta*||xi||^2 + <xi, T^l xi>),  xi = zeta - w,
// combined with rho = min{rho_tilde/2, last used} and clamped to the state's
// bounds. One map application plus two linear-part applications total.
// Mutates state.rho_hat_last.
StepResult affine_autostep(const OperatorBlock& block, const Vec& z_used, const Vec& w_used,
                           StepsizeState& state, CostMeter* cost = nullptr);

}  // namespace projsplit
