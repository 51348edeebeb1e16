#include "projsplit/operators.hpp"

#include <cmath>

#include "projsplit/kernels.hpp"

namespace projsplit {

// ---------------------------------------------------------------------------
// LinearMap variants
// ---------------------------------------------------------------------------

void IdentityMap::apply(const Vec& x, Vec& out, CostMeter*) const { out = x; }
void IdentityMap::adjoint(const Vec& y, Vec& out, CostMeter*) const { out = y; }

void DenseMatrixMap::apply(const Vec& x, Vec& out, CostMeter* cost) const {
    matvec(*a_, x, out);
    if (cost) cost->add(q_cost_);
}

void DenseMatrixMap::adjoint(const Vec& y, Vec& out, CostMeter* cost) const {
    matvec_transpose(*a_, y, out);
    if (cost) cost->add(q_cost_);
}

RowSubmatrixMap::RowSubmatrixMap(std::shared_ptr<const DenseMatrix> a, std::size_t row_begin,
                                 std::size_t row_end, double q_cost_per_multiply)
    : a_(std::move(a)), row_begin_(row_begin), row_end_(row_end), q_cost_(q_cost_per_multiply) {
    if (row_begin_ > row_end_ || row_end_ > a_->rows) {
        throw ConfigError("RowSubmatrixMap: row range out of bounds");
    }
}

void RowSubmatrixMap::apply(const Vec& x, Vec& out, CostMeter* cost) const {
    out.resize(out_dim());
    for (std::size_t i = row_begin_; i < row_end_; ++i) {
        const double* r = a_->row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a_->cols; ++j) s += r[j] * x[j];
        out[i - row_begin_] = s;
    }
    if (cost) cost->add(q_cost_);
}

void RowSubmatrixMap::adjoint(const Vec& y, Vec& out, CostMeter* cost) const {
    out.assign(a_->cols, 0.0);
    for (std::size_t i = row_begin_; i < row_end_; ++i) {
        const double* r = a_->row(i);
        const double yi = y[i - row_begin_];
        for (std::size_t j = 0; j < a_->cols; ++j) out[j] += yi * r[j];
    }
    if (cost) cost->add(q_cost_);
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

void AffineForwardOperator::eval(const Vec& x, Vec& out, CostMeter* cost) const {
    apply_linear(x, out, cost);
    axpy(1.0, constant(), out);
}

DenseAffineOperator::DenseAffineOperator(DenseMatrix linear, Vec constant,
                                         std::optional<double> lipschitz)
    : m_(std::move(linear)), c_(std::move(constant)), lipschitz_(lipschitz) {
    if (m_.rows != m_.cols || m_.rows != c_.size()) {
        throw ConfigError("DenseAffineOperator: linear part must be square and match the constant");
    }
}

void DenseAffineOperator::apply_linear(const Vec& x, Vec& out, CostMeter*) const {
    matvec(m_, x, out);
}

LeastSquaresOperator::LeastSquaresOperator(DenseMatrix q, Vec b, double q_cost_per_multiply)
    : q_(std::move(q)), b_(std::move(b)), q_cost_(q_cost_per_multiply) {
    if (q_.rows != b_.size()) throw ConfigError("LeastSquaresOperator: rows of Q must match b");
    matvec_transpose(q_, b_, c_);
    scal(-1.0, c_);
}

void LeastSquaresOperator::eval(const Vec& x, Vec& out, CostMeter* cost) const {
    Vec r;
    matvec(q_, x, r);
    axpy(-1.0, b_, r);
    matvec_transpose(q_, r, out);
    if (cost) cost->add(2.0 * q_cost_);
}

void LeastSquaresOperator::apply_linear(const Vec& x, Vec& out, CostMeter* cost) const {
    Vec r;
    matvec(q_, x, r);
    matvec_transpose(q_, r, out);
    if (cost) cost->add(2.0 * q_cost_);
}

void SoftThresholdProx::prox(const Vec& a, double rho, Vec& x, Vec& y, CostMeter*) const {
    soft_threshold(a, rho * lambda_, x);
    y.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) y[j] = (a[j] - x[j]) / rho;
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

bool OperatorBlock::forward_capable() const {
    return std::holds_alternative<ForwardLipschitzCap>(capability) ||
           std::holds_alternative<ForwardAffineCap>(capability);
}

bool OperatorBlock::prox_capable() const {
    return std::holds_alternative<ProxExactCap>(capability) ||
           std::holds_alternative<ProxInexactCap>(capability);
}

std::size_t OperatorBlock::op_dim() const {
    return std::visit([](const auto& cap) { return cap.op->dim(); }, capability);
}

std::optional<double> OperatorBlock::lipschitz() const {
    if (const auto* f = std::get_if<ForwardLipschitzCap>(&capability)) return f->op->lipschitz();
    if (const auto* a = std::get_if<ForwardAffineCap>(&capability)) return a->op->lipschitz();
    return std::nullopt;
}

Vec forward_eval(const OperatorBlock& block, const Vec& x, CostMeter* cost) {
    Vec out;
    if (const auto* f = std::get_if<ForwardLipschitzCap>(&block.capability)) {
        f->op->eval(x, out, cost);
    } else if (const auto* a = std::get_if<ForwardAffineCap>(&block.capability)) {
        a->op->eval(x, out, cost);
    } else {
        throw ConfigError("forward_eval: block is not forward-capable");
    }
    return out;
}

void prox_exact(const OperatorBlock& block, const Vec& a, double rho, Vec& x, Vec& y,
                CostMeter* cost) {
    if (rho <= 0.0) throw ConfigError("prox_exact: rho must be positive");
    const auto* cap = std::get_if<ProxExactCap>(&block.capability);
    if (!cap) throw ConfigError("prox_exact: block has no exact resolvent");
    cap->op->prox(a, rho, x, y, cost);
}

bool check_relative_error(const Vec& gz, const Vec& x, const Vec& y, const Vec& w, const Vec& e,
                          double rho, double sigma) {
    double gzx_dot_e = 0.0, gzx_sq = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
        const double d = gz[j] - x[j];
        gzx_dot_e += d * e[j];
        gzx_sq += d * d;
    }
    if (gzx_dot_e < -sigma * gzx_sq) return false;

    double e_dot_yw = 0.0, yw_sq = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
        const double d = y[j] - w[j];
        e_dot_yw += e[j] * d;
        yw_sq += d * d;
    }
    return e_dot_yw <= rho * sigma * yw_sq;
}

InexactProxResult prox_inexact_cg(const OperatorBlock& block, const Vec& a, double rho,
                                  const Vec& gz, const Vec& w, const Vec& warm_start,
                                  CostMeter* cost) {
    if (rho <= 0.0) throw ConfigError("prox_inexact_cg: rho must be positive");
    const auto* cap = std::get_if<ProxInexactCap>(&block.capability);
    if (!cap) throw ConfigError("prox_inexact_cg: block has no inexact resolvent");
    const LeastSquaresOperator& ls = *cap->op;
    const std::size_t d = ls.dim();

    InexactProxResult res;
    res.x = warm_start;
    res.x.resize(d, 0.0);

    // y recomputed from x through the true operator keeps y in T x exactly.
    auto refresh = [&]() {
        ls.eval(res.x, res.y, cost);
        res.e.resize(d);
        for (std::size_t j = 0; j < d; ++j) res.e[j] = res.x[j] + rho * res.y[j] - a[j];
    };

    refresh();
    if (check_relative_error(gz, res.x, res.y, w, res.e, rho, cap->sigma)) {
        res.inner_iterations = 0;
        return res;
    }

    // CG on (I + rho Q^T Q) x = a + rho Q^T b. The initial residual is -e:
    //   rhs - (x + rho Q^T Q x) = a + rho Q^T b - x - rho(y + Q^T b) = -(x + rho y - a).
    Vec r(d), p(d), ap(d), qp;
    for (std::size_t j = 0; j < d; ++j) r[j] = -res.e[j];
    p = r;
    double rs = dot(r, r);

    for (int it = 1; it <= cap->cg.max_iter; ++it) {
        ls.apply_linear(p, ap, cost);
        for (std::size_t j = 0; j < d; ++j) ap[j] = p[j] + rho * ap[j];
        const double pap = dot(p, ap);
        if (pap <= 0.0) {
            // residual numerically zero yet the criteria failed
            res.inner_iterations = it - 1;
            throw CgBudgetError("prox_inexact_cg: stagnated before meeting the error criteria", res);
        }
        const double alpha = rs / pap;
        axpy(alpha, p, res.x);
        axpy(-alpha, ap, r);

        refresh();
        if (check_relative_error(gz, res.x, res.y, w, res.e, rho, cap->sigma)) {
            res.inner_iterations = it;
            return res;
        }

        const double rs_new = dot(r, r);
        const double beta = rs_new / rs;
        rs = rs_new;
        for (std::size_t j = 0; j < d; ++j) p[j] = r[j] + beta * p[j];
    }
    res.inner_iterations = cap->cg.max_iter;
    throw CgBudgetError("prox_inexact_cg: budget exhausted before meeting the error criteria", res);
}

}  // namespace projsplit
