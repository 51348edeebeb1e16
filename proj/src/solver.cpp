#include "projsplit/solver.hpp"

#include <algorithm>
#include <cmath>

#include "projsplit/kernels.hpp"

namespace projsplit {

namespace {

StepMode default_mode(const OperatorBlock& block) {
    if (std::holds_alternative<ForwardAffineCap>(block.capability)) return StepMode::ForwardAffineAuto;
    if (std::holds_alternative<ForwardLipschitzCap>(block.capability)) {
        return block.lipschitz() ? StepMode::ForwardPlain : StepMode::ForwardBacktrack;
    }
    if (std::holds_alternative<ProxInexactCap>(block.capability)) return StepMode::BackwardInexact;
    return StepMode::Backward;
}

void validate_mode(const OperatorBlock& block, StepMode mode, int i) {
    const std::string at = "solve: block " + std::to_string(i);
    switch (mode) {
        case StepMode::Backward:
            if (!std::holds_alternative<ProxExactCap>(block.capability))
                throw ConfigError(at + " has no exact resolvent");
            break;
        case StepMode::BackwardInexact:
            if (!std::holds_alternative<ProxInexactCap>(block.capability))
                throw ConfigError(at + " has no inexact resolvent");
            break;
        case StepMode::ForwardPlain:
            if (!block.forward_capable()) throw ConfigError(at + " is not forward-capable");
            if (!block.lipschitz())
                throw ConfigError(at + " has no Lipschitz constant; use backtracking or autostep");
            break;
        case StepMode::ForwardBacktrack:
            if (!block.forward_capable()) throw ConfigError(at + " is not forward-capable");
            break;
        case StepMode::ForwardAffineAuto:
            if (!std::holds_alternative<ForwardAffineCap>(block.capability))
                throw ConfigError(at + " has no affine structure");
            break;
    }
}

struct BlockRuntime {
    BlockGraphPoint point;
    StepsizeState step;
    StepMode mode = StepMode::Backward;
    double last_rho_used = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::FiniteTermination: return "FiniteTermination";
        case SolveStatus::BudgetExhausted: return "BudgetExhausted";
    }
    return "?";
}

RunRecord solve(const Problem& problem, const SolverConfig& config) {
    const std::size_t n = problem.blocks.size();
    if (n == 0) throw ConfigError("solve: problem has no blocks");
    if (!(config.gamma > 0.0)) throw ConfigError("solve: gamma must be positive");
    if (!(config.beta > 0.0 && config.beta < 2.0)) throw ConfigError("solve: beta must lie in (0, 2)");
    if (!(config.delta > 0.0)) throw ConfigError("solve: delta must be positive");
    if (!(config.rho_min > 0.0 && config.rho_min <= config.rho_max)) {
        throw ConfigError("solve: stepsize bounds must satisfy 0 < rho_min <= rho_max");
    }
    if (!problem.blocks.back().map->is_identity()) {
        throw ConfigError("solve: the last block must couple through the identity");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const OperatorBlock& b = problem.blocks[i];
        if (b.map->in_dim() != problem.primal_dim) {
            throw ConfigError("solve: block " + std::to_string(i) + " map does not accept the primal space");
        }
        if (b.map->out_dim() != b.op_dim()) {
            throw ConfigError("solve: block " + std::to_string(i) + " map and operator dimensions differ");
        }
    }
    if (!config.modes.empty() && config.modes.size() != n) {
        throw ConfigError("solve: modes must be empty or one per block");
    }
    if (!config.rho.empty() && config.rho.size() != n) {
        throw ConfigError("solve: rho must be empty or one per block");
    }

    std::vector<BlockRuntime> rt(n);
    for (std::size_t i = 0; i < n; ++i) {
        const OperatorBlock& b = problem.blocks[i];
        rt[i].mode = config.modes.empty() ? default_mode(b) : config.modes[i];
        validate_mode(b, rt[i].mode, static_cast<int>(i));
        rt[i].point.x.assign(b.op_dim(), 0.0);
        rt[i].point.y.assign(b.op_dim(), 0.0);
        rt[i].step.delta = config.delta;
        rt[i].step.rho_min = config.rho_min;
        rt[i].step.rho_max = config.rho_max;
        if (!config.rho.empty()) {
            rt[i].step.rho = config.rho[i];
        } else if (rt[i].mode == StepMode::ForwardPlain) {
            rt[i].step.rho = 0.9 / *problem.blocks[i].lipschitz();
        } else {
            rt[i].step.rho = 1.0;
        }
        if (rt[i].step.rho <= 0.0) throw ConfigError("solve: stepsizes must be positive");
    }

    std::vector<std::shared_ptr<const LinearMap>> maps;
    for (std::size_t i = 0; i + 1 < n; ++i) maps.push_back(problem.blocks[i].map);

    PrimalDualPoint p;
    if (config.initial_point) {
        p = *config.initial_point;
        if (p.z.size() != problem.primal_dim || p.w.size() + 1 != n) {
            throw ConfigError("solve: initial point does not match the problem dimensions");
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (p.w[i].size() != problem.blocks[i].op_dim()) {
                throw ConfigError("solve: initial dual " + std::to_string(i) + " has the wrong size");
            }
        }
    } else {
        p.z.assign(problem.primal_dim, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) p.w.emplace_back(problem.blocks[i].op_dim(), 0.0);
    }
    Vec w_n = derived_dual(p, maps);

    // one master seed; scheduler and delay draw from derived streams
    SplitMix64 seeder(config.seed);
    SchedulePolicy policy = config.policy;
    policy.seed = seeder.next();
    Scheduler scheduler(policy, static_cast<int>(n));
    DelaySimulator delays({config.delay.max_delay, seeder.next()}, static_cast<int>(n));

    RunRecord rec;
    rec.seed = config.seed;
    CostMeter cost;

    std::vector<BlockGraphPoint> points(n);
    auto sync_points = [&]() {
        for (std::size_t i = 0; i < n; ++i) points[i] = rt[i].point;
    };

    std::vector<double> scores(n, 0.0);
    Vec tmp;

    for (std::int64_t k = 1; k <= config.stopping.max_iterations; ++k) {
        delays.push(k, p, w_n);

        std::vector<int> active;
        if (k == 1) {
            for (std::size_t i = 0; i < n; ++i) active.push_back(static_cast<int>(i));
        } else {
            const std::vector<double>* sc = nullptr;
            if (policy.mode == ScheduleMode::Greedy) {
                for (std::size_t i = 0; i < n; ++i) {
                    problem.blocks[i].map->apply(p.z, tmp);
                    const Vec& wi = i + 1 < n ? p.w[i] : w_n;
                    double s = 0.0;
                    for (std::size_t u = 0; u < tmp.size(); ++u) {
                        s += (tmp[u] - rt[i].point.x[u]) * (rt[i].point.y[u] - wi[u]);
                    }
                    scores[i] = s;
                }
                sc = &scores;
            }
            sync_points();
            active = scheduler.select(k, points, sc);
        }

        IterationRow row;
        row.k = k;
        row.active = active;

        for (int i : active) {
            const std::size_t ui = static_cast<std::size_t>(i);
            const OperatorBlock& block = problem.blocks[ui];
            BlockRuntime& r = rt[ui];

            auto drawn = delays.draw(i, k);
            const Vec& z_used = drawn.snap->p.z;
            const Vec& w_used = ui + 1 < n ? drawn.snap->p.w[ui] : drawn.snap->w_n;
            row.delays.emplace_back(i, drawn.d);

            double rho = r.step.rho;
            if (config.prox_rho_from_forward_average && ui + 1 == n && block.prox_capable()) {
                // average of the most recently accepted forward stepsizes
                double sum = 0.0;
                int cnt = 0;
                for (std::size_t j = 0; j + 1 < n; ++j) {
                    if (rt[j].point.ever_updated && std::isfinite(rt[j].last_rho_used)) {
                        sum += rt[j].last_rho_used;
                        ++cnt;
                    }
                }
                if (cnt > 0) rho = std::clamp(sum / cnt, config.rho_min, config.rho_max);
            }

            StepResult res;
            double delta_eff = 0.0;
            double sigma = 0.0;
            switch (r.mode) {
                case StepMode::Backward:
                    res = backward_step(block, z_used, w_used, rho, {}, &cost);
                    delta_eff = 1.0 / rho;
                    break;
                case StepMode::BackwardInexact:
                    sigma = std::get<ProxInexactCap>(block.capability).sigma;
                    res = backward_step(block, z_used, w_used, rho, r.point.x, &cost);
                    delta_eff = (1.0 - sigma) / rho;
                    row.cg_iterations.emplace_back(i, res.cg_iterations);
                    break;
                case StepMode::ForwardPlain:
                    res = forward_step_plain(block, z_used, w_used, rho, false, &cost);
                    delta_eff = 1.0 / rho - *block.lipschitz();
                    break;
                case StepMode::ForwardBacktrack:
                    res = backtracking_forward(block, z_used, w_used, rho, config.delta, 60, &cost);
                    delta_eff = config.delta;
                    row.backtracks.emplace_back(i, res.backtracks);
                    break;
                case StepMode::ForwardAffineAuto:
                    res = affine_autostep(block, z_used, w_used, r.step, &cost);
                    delta_eff = config.delta;
                    break;
            }

            res.point.last_processed = k;
            r.point = std::move(res.point);
            r.last_rho_used = res.rho_used;

            if (config.on_block_step) {
                Vec gz;
                block.map->apply(z_used, gz);
                Vec a;
                if (block.prox_capable()) {
                    a = gz;
                    axpy(res.rho_used, w_used, a);
                }
                BlockStepInfo info;
                info.block = i;
                info.k = k;
                info.d = drawn.d;
                info.mode = r.mode;
                info.gz_used = &gz;
                info.w_used = &w_used;
                info.a = block.prox_capable() ? &a : nullptr;
                info.point = &r.point;
                info.e = res.e.empty() ? nullptr : &res.e;
                info.rho_used = res.rho_used;
                info.delta_eff = delta_eff;
                info.sigma = sigma;
                config.on_block_step(info);
            }
        }

        sync_points();
        ProjectionComputation pc = compute_projection(points, maps, p, config.gamma, config.beta);
        row.phi = pc.phi;
        row.pi = pc.pi;

        bool coverage = true;
        for (const BlockRuntime& r : rt) coverage = coverage && r.point.ever_updated;

        bool finite_term = false;
        if (pc.pi <= config.pi_zero_tol) {
            pc.alpha = 0.0;
            if (coverage) {
                finite_term = true;
                p.z = rt[n - 1].point.x;
                for (std::size_t i = 0; i + 1 < n; ++i) p.w[i] = rt[i].point.y;
                w_n = derived_dual(p, maps);
            }
        } else {
            p = apply_projection(p, pc, config.gamma);
            w_n = derived_dual(p, maps);
        }
        row.alpha = pc.alpha;
        row.q_equivalents = cost.q_equivalents;

        if (config.metrics &&
            (k % std::max<std::int64_t>(config.metrics_stride, 1) == 0 || k == 1 || finite_term)) {
            IterationMetrics m = config.metrics(rt[n - 1].point.x);
            row.objective = m.objective;
            row.subgrad_residual = m.subgrad_residual;
        }

        rec.iterations.push_back(std::move(row));
        rec.iterations_run = k;
        if (config.on_iterate) config.on_iterate(k, p, w_n);

        if (finite_term) {
            rec.status = SolveStatus::FiniteTermination;
            break;
        }
        if (config.stopping.target_subgrad_residual > 0.0 &&
            rec.iterations.back().subgrad_residual <= config.stopping.target_subgrad_residual) {
            rec.status = SolveStatus::Converged;
            break;
        }
        if (cost.q_equivalents >= config.stopping.max_q_equivalents) {
            rec.status = SolveStatus::BudgetExhausted;
            break;
        }
        rec.status = SolveStatus::BudgetExhausted;
    }

    rec.final_point = std::move(p);
    rec.final_w_n = std::move(w_n);
    sync_points();
    rec.final_blocks = std::move(points);
    rec.total_q_equivalents = cost.q_equivalents;
    return rec;
}

}  // namespace projsplit
