#include "projsplit/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "projsplit/kernels.hpp"

namespace projsplit {

namespace {

// Resolvent of t -> t - b_i, for the composed-map modeling of a block:
// x + rho*(x - b) = a  =>  x = (a + rho*b)/(1 + rho).
class ShiftedIdentityProx final : public ProxOperator {
public:
    explicit ShiftedIdentityProx(Vec b) : b_(std::move(b)) {}
    std::size_t dim() const override { return b_.size(); }
    void prox(const Vec& a, double rho, Vec& x, Vec& y, CostMeter*) const override {
        x.resize(a.size());
        y.resize(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            x[j] = (a[j] + rho * b_[j]) / (1.0 + rho);
            y[j] = (a[j] - x[j]) / rho;
        }
    }

private:
    Vec b_;
};

DenseMatrix gather_rows(const DenseMatrix& q, const std::vector<std::size_t>& rows) {
    DenseMatrix out(rows.size(), q.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = q.row(rows[i]);
        std::copy(src, src + q.cols, out.row(i));
    }
    return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> contiguous_partition(std::size_t m, std::size_t r) {
    if (r == 0 || r > m) throw ConfigError("contiguous_partition: need 1 <= r <= m");
    std::vector<std::vector<std::size_t>> parts(r);
    const std::size_t base = m / r;
    const std::size_t extra = m % r;  // first `extra` blocks get one more row
    std::size_t row = 0;
    for (std::size_t i = 0; i < r; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        parts[i].resize(len);
        std::iota(parts[i].begin(), parts[i].end(), row);
        row += len;
    }
    return parts;
}

Splitting build_splitting(const LassoProblem& problem, std::size_t r, const SplittingOptions& opts) {
    const std::size_t m = problem.q.rows;
    const std::size_t d = problem.q.cols;
    if (r == 0) throw ConfigError("build_splitting: r must be >= 1");
    if (r > m) throw ConfigError("build_splitting: more blocks than rows");

    Splitting s;
    if (!problem.partition.empty()) {
        s.partition = problem.partition;
    } else {
        s.partition = contiguous_partition(m, r);
        if (opts.permute_rows) {
            std::vector<std::size_t> perm(m);
            std::iota(perm.begin(), perm.end(), 0);
            SplitMix64 rng(opts.seed);
            for (std::size_t i = m; i > 1; --i) {
                std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
            }
            for (auto& part : s.partition) {
                for (std::size_t& idx : part) idx = perm[idx];
            }
        }
    }
    if (s.partition.size() != r) throw ConfigError("build_splitting: partition size differs from r");

    s.problem.primal_dim = d;
    auto identity = std::make_shared<IdentityMap>(d);

    for (std::size_t i = 0; i < r; ++i) {
        const auto& rows = s.partition[i];
        const double weight = static_cast<double>(rows.size()) / static_cast<double>(m);
        DenseMatrix qi = gather_rows(problem.q, rows);
        Vec bi(rows.size());
        for (std::size_t j = 0; j < rows.size(); ++j) bi[j] = problem.b[rows[j]];

        OperatorBlock block;
        block.cost_weight = weight;
        if (opts.compose_gi) {
            auto qi_shared = std::make_shared<DenseMatrix>(std::move(qi));
            block.map = std::make_shared<DenseMatrixMap>(qi_shared, weight);
            if (opts.kind == SplitKind::PSFor) {
                Vec shift(bi.size());
                for (std::size_t j = 0; j < bi.size(); ++j) shift[j] = -bi[j];
                block.capability =
                    ForwardAffineCap{std::make_shared<TranslatedIdentityOperator>(std::move(shift))};
                s.modes.push_back(StepMode::ForwardAffineAuto);
            } else {
                block.capability = ProxExactCap{std::make_shared<ShiftedIdentityProx>(std::move(bi))};
                s.modes.push_back(StepMode::Backward);
            }
        } else {
            auto ls = std::make_shared<LeastSquaresOperator>(std::move(qi), std::move(bi), weight);
            block.map = identity;
            if (opts.kind == SplitKind::PSFor) {
                block.capability = ForwardAffineCap{ls};
                s.modes.push_back(StepMode::ForwardAffineAuto);
            } else {
                block.capability = ProxInexactCap{ls, opts.sigma, opts.cg};
                s.modes.push_back(StepMode::BackwardInexact);
            }
        }
        s.problem.blocks.push_back(std::move(block));
    }

    OperatorBlock l1;
    l1.map = identity;
    l1.capability = ProxExactCap{std::make_shared<SoftThresholdProx>(d, problem.lambda)};
    l1.cost_weight = 0.0;
    s.problem.blocks.push_back(std::move(l1));
    s.modes.push_back(StepMode::Backward);

    s.always_active = {static_cast<int>(r)};
    s.prox_rho_from_forward_average = opts.kind == SplitKind::PSFor && !opts.compose_gi;
    return s;
}

double objective(const LassoProblem& problem, const Vec& x) {
    Vec res;
    matvec(problem.q, x, res);
    axpy(-1.0, problem.b, res);
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    return 0.5 * norm_sq(res) + problem.lambda * l1;
}

double subgrad_residual(const LassoProblem& problem, const Vec& x) {
    Vec res;
    matvec(problem.q, x, res);
    axpy(-1.0, problem.b, res);
    Vec grad;
    matvec_transpose(problem.q, res, grad);

    const double lam = problem.lambda;
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double g;
        if (x[j] > 0.0) {
            g = grad[j] + lam;
        } else if (x[j] < 0.0) {
            g = grad[j] - lam;
        } else {
            g = grad[j] - std::clamp(grad[j], -lam, lam);
        }
        s += g * g;
    }
    return std::sqrt(s);
}

MetricsFn lasso_metrics(const LassoProblem& problem) {
    return [&problem](const Vec& x) {
        IterationMetrics m;
        m.objective = objective(problem, x);
        m.subgrad_residual = subgrad_residual(problem, x);
        return m;
    };
}

RunRecord fista(const LassoProblem& problem, const FistaConfig& config) {
    const std::size_t d = problem.q.cols;
    const double lam = problem.lambda;
    if (config.initial_stepsize <= 0.0 || config.shrink <= 0.0 || config.shrink >= 1.0) {
        throw ConfigError("fista: need initial_stepsize > 0 and shrink in (0, 1)");
    }

    RunRecord rec;
    CostMeter cost;

    Vec x(d, 0.0), x_prev(d, 0.0);
    Vec qx(problem.q.rows, 0.0), qx_prev(problem.q.rows, 0.0);  // x = 0 keeps them free
    Vec y = x, qy = qx;
    Vec grad, ry, trial, qtrial, rtrial;
    double t = 1.0;
    double step = config.initial_stepsize;

    for (std::int64_t k = 1; k <= config.max_iterations; ++k) {
        // gradient at y; Qy is maintained without a multiply
        sub(qy, problem.b, ry);
        matvec_transpose(problem.q, ry, grad);
        cost.add(1.0);
        const double fy = 0.5 * norm_sq(ry);

        int rejected = 0;
        double ftrial = 0.0;
        for (;;) {
            trial.resize(d);
            for (std::size_t j = 0; j < d; ++j) trial[j] = y[j] - step * grad[j];
            soft_threshold(trial, step * lam, trial);

            matvec(problem.q, trial, qtrial);
            cost.add(1.0);
            sub(qtrial, problem.b, rtrial);
            ftrial = 0.5 * norm_sq(rtrial);

            double lin = 0.0, dist = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = trial[j] - y[j];
                lin += grad[j] * diff;
                dist += diff * diff;
            }
            // slack absorbs rounding noise between the fresh f(trial) and the
            // incrementally maintained f(y) when the displacement is tiny
            if (dist == 0.0 || ftrial <= fy + lin + dist / (2.0 * step) + 1e-12 * (1.0 + std::abs(fy))) {
                break;
            }
            step *= config.shrink;
            ++rejected;
            if (step < 1e-300) throw NumericError("fista: stepsize underflow in the linesearch");
        }

        x_prev.swap(x);
        qx_prev.swap(qx);
        x = trial;
        qx = qtrial;

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double momentum = (t - 1.0) / t_next;
        t = t_next;
        y.resize(d);
        for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + momentum * (x[j] - x_prev[j]);
        qy.resize(qx.size());
        for (std::size_t j = 0; j < qx.size(); ++j) qy[j] = qx[j] + momentum * (qx[j] - qx_prev[j]);

        IterationRow row;
        row.k = k;
        row.q_equivalents = cost.q_equivalents;
        if (rejected > 0) row.backtracks.emplace_back(0, rejected);
        if (k % std::max<std::int64_t>(config.metrics_stride, 1) == 0 || k == 1) {
            double l1 = 0.0;
            for (double v : x) l1 += std::abs(v);
            row.objective = ftrial + lam * l1;
            row.subgrad_residual = subgrad_residual(problem, x);
        }
        rec.iterations.push_back(std::move(row));
        rec.iterations_run = k;

        if (config.target_subgrad_residual > 0.0 &&
            rec.iterations.back().subgrad_residual <= config.target_subgrad_residual) {
            rec.status = SolveStatus::Converged;
            break;
        }
        if (cost.q_equivalents >= config.max_q_equivalents) break;
    }

    rec.final_point.z = x;
    rec.total_q_equivalents = cost.q_equivalents;
    return rec;
}

double estimate_fstar(const LassoProblem& problem, std::int64_t iterations) {
    FistaConfig cfg;
    cfg.max_iterations = iterations;
    cfg.metrics_stride = 1;
    RunRecord rec = fista(problem, cfg);
    double best = std::numeric_limits<double>::infinity();
    for (const IterationRow& row : rec.iterations) {
        if (std::isfinite(row.objective)) best = std::min(best, row.objective);
    }
    return best;
}

LambdaCalibration calibrate_lambda(const LassoProblem& problem, double target_fraction,
                                   std::int64_t probe_iterations, int bisection_steps) {
    Vec qtb;
    matvec_transpose(problem.q, problem.b, qtb);
    double lambda_max = 0.0;
    for (double v : qtb) lambda_max = std::max(lambda_max, std::abs(v));
    if (lambda_max <= 0.0) throw DataError("calibrate_lambda: Q^T b is zero");

    auto fraction_at = [&](double lam) {
        LassoProblem p;
        p.q = problem.q;
        p.b = problem.b;
        p.lambda = lam;
        FistaConfig cfg;
        cfg.max_iterations = probe_iterations;
        cfg.metrics_stride = probe_iterations;  // metrics not needed while probing
        RunRecord rec = fista(p, cfg);
        std::size_t nnz = 0;
        for (double v : rec.final_point.z) nnz += v != 0.0;
        return static_cast<double>(nnz) / static_cast<double>(problem.q.cols);
    };

    double lo = 0.0, hi = lambda_max;  // fraction decreases as lambda grows
    double lam = lambda_max / 2.0;
    double frac = fraction_at(lam);
    for (int it = 1; it < bisection_steps; ++it) {
        if (frac > target_fraction) {
            lo = lam;
        } else {
            hi = lam;
        }
        lam = 0.5 * (lo + hi);
        frac = fraction_at(lam);
    }
    return {lam, frac};
}

}  // namespace projsplit
