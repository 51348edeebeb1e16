#pragma once

#include <cmath>
#include <memory>

#include "projsplit/ingest.hpp"
#include "projsplit/kernels.hpp"
#include "projsplit/lasso.hpp"
#include "projsplit/solver.hpp"

namespace testsupport {

using namespace projsplit;

inline Vec random_vec(SplitMix64& rng, std::size_t n, double scale = 1.0) {
    Vec v(n);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

inline DenseMatrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols,
                                 double scale = 1.0) {
    DenseMatrix m(rows, cols);
    for (double& x : m.data) x = scale * rng.normal();
    return m;
}

// Random orthogonal matrix via Gram-Schmidt on a Gaussian sample.
inline DenseMatrix random_orthogonal(SplitMix64& rng, std::size_t d) {
    DenseMatrix q = random_matrix(rng, d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += q(i, j) * q(k, j);
            for (std::size_t j = 0; j < d; ++j) q(i, j) -= dot * q(k, j);
        }
        double nrm = 0.0;
        for (std::size_t j = 0; j < d; ++j) nrm += q(i, j) * q(i, j);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-8) return random_orthogonal(rng, d);  // resample a degenerate draw
        for (std::size_t j = 0; j < d; ++j) q(i, j) /= nrm;
    }
    return q;
}

// Symmetric PSD matrix U diag(s) U^T with largest eigenvalue exactly `lmax`,
// so the operator norm is known without estimation.
inline DenseMatrix random_psd(SplitMix64& rng, std::size_t d, double lmax) {
    DenseMatrix u = random_orthogonal(rng, d);
    Vec s(d);
    for (std::size_t i = 0; i < d; ++i) s[i] = lmax * rng.uniform01();
    s[rng.uniform_index(d)] = lmax;
    DenseMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < d; ++k) v += u(k, i) * s[k] * u(k, j);
            m(i, j) = v;
        }
    }
    return m;
}

// Monotone affine operator with known Lipschitz constant.
inline std::shared_ptr<DenseAffineOperator> random_affine_op(SplitMix64& rng, std::size_t d,
                                                             double lmax) {
    return std::make_shared<DenseAffineOperator>(random_psd(rng, d, lmax), random_vec(rng, d), lmax);
}

// A problem built backward from a chosen primal solution: affine blocks
// T_i(x) = B_i(x - G_i z*) + w_i* for i < n and an l1 block whose chosen dual
// -sum G_i^* w_i* is a subgradient of lambda*||.||_1 at z*. The returned pair
// (z*, w*) lies in the extended solution set.
struct ConstructedProblem {
    Problem problem;
    PrimalDualPoint solution;
    double lambda = 1.0;
};

inline ConstructedProblem construct_kt_problem(SplitMix64& rng, std::size_t d, std::size_t n_blocks) {
    ConstructedProblem out;
    out.problem.primal_dim = d;

    Vec zstar(d);
    for (std::size_t j = 0; j < d; ++j) {
        zstar[j] = rng.uniform01() < 0.4 ? 0.0 : rng.normal();
    }
    out.lambda = 0.5 + rng.uniform01();

    // subgradient of lambda*||.||_1 at z*
    Vec g(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (zstar[j] > 0.0) {
            g[j] = out.lambda;
        } else if (zstar[j] < 0.0) {
            g[j] = -out.lambda;
        } else {
            g[j] = out.lambda * (2.0 * rng.uniform01() - 1.0);
        }
    }

    const std::size_t r = n_blocks - 1;  // affine blocks; the l1 block is last
    std::vector<Vec> wstar(r);
    Vec sum(d, 0.0);
    for (std::size_t i = 0; i + 1 < r; ++i) {
        wstar[i] = random_vec(rng, d);
        for (std::size_t j = 0; j < d; ++j) sum[j] += wstar[i][j];
    }
    // last affine dual closes the optimality condition: sum_i w_i* = -g
    wstar[r - 1].resize(d);
    for (std::size_t j = 0; j < d; ++j) wstar[r - 1][j] = -g[j] - sum[j];

    auto identity = std::make_shared<IdentityMap>(d);
    for (std::size_t i = 0; i < r; ++i) {
        DenseMatrix b = random_psd(rng, d, 1.0 + 3.0 * rng.uniform01());
        // T_i(x) = B(x - z*) + w_i*  =>  constant = w_i* - B z*
        Vec c(d);
        for (std::size_t row = 0; row < d; ++row) {
            double bz = 0.0;
            for (std::size_t col = 0; col < d; ++col) bz += b(row, col) * zstar[col];
            c[row] = wstar[i][row] - bz;
        }
        OperatorBlock block;
        block.map = identity;
        block.capability = ForwardAffineCap{std::make_shared<DenseAffineOperator>(
            std::move(b), std::move(c), std::optional<double>{})};
        out.problem.blocks.push_back(std::move(block));
    }

    OperatorBlock l1;
    l1.map = identity;
    l1.capability = ProxExactCap{std::make_shared<SoftThresholdProx>(d, out.lambda)};
    out.problem.blocks.push_back(std::move(l1));

    out.solution.z = std::move(zstar);
    out.solution.w = std::move(wstar);
    return out;
}

// Independent proximal-gradient (ISTA) oracle for the lasso, written against
// the serial reference kernels only. Fixed stepsize below 1/||Q^T Q||.
inline Vec ista_oracle(const LassoProblem& p, double tol, std::int64_t max_iters = 2000000) {
    const std::size_t d = p.q.cols;

    // power iteration upper bound for ||Q^T Q||
    SplitMix64 rng(12345);
    Vec v = random_vec(rng, d);
    double lam = 1.0;
    for (int it = 0; it < 200; ++it) {
        Vec qv, qtqv;
        ref::matvec(p.q, v, qv);
        ref::matvec_transpose(p.q, qv, qtqv);
        lam = std::sqrt(ref::norm_sq(qtqv));
        if (lam == 0.0) break;
        for (std::size_t j = 0; j < d; ++j) v[j] = qtqv[j] / lam;
    }
    const double step = 1.0 / (1.05 * std::max(lam, 1e-12));

    Vec x(d, 0.0), qx, r, grad;
    for (std::int64_t k = 0; k < max_iters; ++k) {
        ref::matvec(p.q, x, qx);
        r.resize(qx.size());
        for (std::size_t j = 0; j < qx.size(); ++j) r[j] = qx[j] - p.b[j];
        ref::matvec_transpose(p.q, r, grad);

        double change = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = x[j] - step * grad[j];
            const double kappa = step * p.lambda;
            double nx = 0.0;
            if (t > kappa) {
                nx = t - kappa;
            } else if (t < -kappa) {
                nx = t + kappa;
            }
            change = std::max(change, std::abs(nx - x[j]));
            x[j] = nx;
        }
        if (change <= tol * step) break;
    }
    return x;
}

// Dual pair completing an oracle lasso solution to a point of the extended
// solution set of the row-split formulation: w_i* = Q_i^T (Q_i z* - b_i).
inline PrimalDualPoint lasso_solution_point(const LassoProblem& p, const Splitting& s,
                                            const Vec& zstar) {
    PrimalDualPoint point;
    point.z = zstar;
    for (std::size_t i = 0; i + 1 < s.problem.blocks.size(); ++i) {
        const auto& cap = s.problem.blocks[i].capability;
        const LeastSquaresOperator* ls = nullptr;
        if (const auto* f = std::get_if<ForwardAffineCap>(&cap)) {
            ls = dynamic_cast<const LeastSquaresOperator*>(f->op.get());
        } else if (const auto* b = std::get_if<ProxInexactCap>(&cap)) {
            ls = b->op.get();
        }
        Vec w;
        ls->eval(zstar, w);
        point.w.push_back(std::move(w));
    }
    return point;
}

}  // namespace testsupport
