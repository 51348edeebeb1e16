#include "projsplit/steps.hpp"

#include <algorithm>
#include <cmath>

#include "projsplit/kernels.hpp"

namespace projsplit {

namespace {

Vec apply_map(const OperatorBlock& block, const Vec& z, CostMeter* cost) {
    Vec out;
    block.map->apply(z, out, cost);
    return out;
}

}  // namespace

StepResult backward_step(const OperatorBlock& block, const Vec& z_used, const Vec& w_used, double rho,
                         const Vec& warm_start, CostMeter* cost) {
    if (!block.prox_capable()) throw ConfigError("backward_step: block is not prox-capable");
    if (rho <= 0.0) throw ConfigError("backward_step: rho must be positive");

    StepResult res;
    res.rho_used = rho;
    Vec gz = apply_map(block, z_used, cost);
    Vec a = gz;
    axpy(rho, w_used, a);

    if (std::holds_alternative<ProxExactCap>(block.capability)) {
        prox_exact(block, a, rho, res.point.x, res.point.y, cost);
        res.e.assign(a.size(), 0.0);
    } else {
        InexactProxResult ip = prox_inexact_cg(block, a, rho, gz, w_used, warm_start, cost);
        res.point.x = std::move(ip.x);
        res.point.y = std::move(ip.y);
        res.e = std::move(ip.e);
        res.cg_iterations = ip.inner_iterations;
    }
    res.point.ever_updated = true;
    return res;
}

StepResult forward_step_plain(const OperatorBlock& block, const Vec& z_used, const Vec& w_used,
                              double rho, bool allow_unsafe, CostMeter* cost) {
    if (!block.forward_capable()) throw ConfigError("forward_step_plain: block is not forward-capable");
    if (rho <= 0.0) throw ConfigError("forward_step_plain: rho must be positive");
    if (auto lip = block.lipschitz(); lip && *lip > 0.0 && rho >= 1.0 / *lip && !allow_unsafe) {
        throw ConfigError("forward_step_plain: rho must be below 1/L");
    }

    StepResult res;
    res.rho_used = rho;
    Vec theta = apply_map(block, z_used, cost);
    Vec tz = forward_eval(block, theta, cost);

    res.point.x = std::move(theta);
    for (std::size_t j = 0; j < res.point.x.size(); ++j) {
        res.point.x[j] -= rho * (tz[j] - w_used[j]);
    }
    res.point.y = forward_eval(block, res.point.x, cost);
    res.point.ever_updated = true;
    return res;
}

StepResult backtracking_forward(const OperatorBlock& block, const Vec& z_used, const Vec& w_used,
                                double rho_initial, double delta, int max_backtracks,
                                CostMeter* cost) {
    if (!block.forward_capable()) throw ConfigError("backtracking_forward: block is not forward-capable");
    if (rho_initial <= 0.0 || delta <= 0.0) {
        throw ConfigError("backtracking_forward: rho_initial and delta must be positive");
    }

    Vec theta = apply_map(block, z_used, cost);
    Vec zeta = forward_eval(block, theta, cost);
    const std::size_t d = theta.size();

    StepResult res;
    double rho = rho_initial;
    for (int j = 1; j <= max_backtracks; ++j) {
        Vec xt(d);
        for (std::size_t u = 0; u < d; ++u) xt[u] = theta[u] - rho * (zeta[u] - w_used[u]);
        Vec yt = forward_eval(block, xt, cost);

        double disp_sq = 0.0, inner = 0.0;
        for (std::size_t u = 0; u < d; ++u) {
            const double du = theta[u] - xt[u];
            disp_sq += du * du;
            inner += du * (yt[u] - w_used[u]);
        }
        if (delta * disp_sq - inner <= 0.0) {
            res.point.x = std::move(xt);
            res.point.y = std::move(yt);
            res.point.ever_updated = true;
            res.rho_used = rho;
            res.backtracks = j;
            return res;
        }
        rho *= 0.5;
    }
    throw NumericError("backtracking_forward: acceptance test not met within the trial cap");
}

StepResult affine_autostep(const OperatorBlock& block, const Vec& z_used, const Vec& w_used,
                           StepsizeState& state, CostMeter* cost) {
    const auto* cap = std::get_if<ForwardAffineCap>(&block.capability);
    if (!cap) throw ConfigError("affine_autostep: block has no affine structure");
    const AffineForwardOperator& op = *cap->op;

    StepResult res;
    Vec theta = apply_map(block, z_used, cost);
    Vec zeta;
    op.eval(theta, zeta, cost);

    const std::size_t d = theta.size();
    Vec xi(d);
    for (std::size_t u = 0; u < d; ++u) xi[u] = zeta[u] - w_used[u];

    const double xi_norm = norm(xi);
    if (xi_norm <= 1e-14 * (1.0 + norm(zeta))) {
        // acceptance holds trivially; x = theta, y = zeta for any stepsize
        double rho = std::isfinite(state.rho_hat_last)
                         ? state.rho_hat_last
                         : (state.rho_bar_fallback > 0.0 ? state.rho_bar_fallback : 1.0 / state.delta);
        rho = std::clamp(rho, state.rho_min, state.rho_max);
        res.point.x = std::move(theta);
        res.point.y = std::move(zeta);
        res.point.ever_updated = true;
        res.rho_used = rho;
        state.rho_hat_last = rho;
        return res;
    }

    Vec txi;
    op.apply_linear(xi, txi, cost);
    const double xi_sq = xi_norm * xi_norm;
    res.rho_tilde = xi_sq / (state.delta * xi_sq + dot(xi, txi));

    double rho = std::min(res.rho_tilde / 2.0, state.rho_hat_last);
    rho = std::clamp(rho, state.rho_min, state.rho_max);

    res.point.x.resize(d);
    res.point.y.resize(d);
    for (std::size_t u = 0; u < d; ++u) {
        res.point.x[u] = theta[u] - rho * xi[u];
        res.point.y[u] = zeta[u] - rho * txi[u];
    }
    res.point.ever_updated = true;
    res.rho_used = rho;
    state.rho_hat_last = rho;
    return res;
}

}  // namespace projsplit
