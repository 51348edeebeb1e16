#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "projsplit/common.hpp"

namespace projsplit {

// ---------------------------------------------------------------------------
// Linear coupling maps G_i : H_0 -> H_i
// ---------------------------------------------------------------------------

class LinearMap {
public:
    virtual ~LinearMap() = default;
    virtual std::size_t in_dim() const = 0;
    virtual std::size_t out_dim() const = 0;
    virtual void apply(const Vec& x, Vec& out, CostMeter* cost = nullptr) const = 0;
    virtual void adjoint(const Vec& y, Vec& out, CostMeter* cost = nullptr) const = 0;
    virtual bool is_identity() const { return false; }
};

class IdentityMap final : public LinearMap {
public:
    explicit IdentityMap(std::size_t dim) : dim_(dim) {}
    std::size_t in_dim() const override { return dim_; }
    std::size_t out_dim() const override { return dim_; }
    void apply(const Vec& x, Vec& out, CostMeter* = nullptr) const override;
    void adjoint(const Vec& y, Vec& out, CostMeter* = nullptr) const override;
    bool is_identity() const override { return true; }

private:
    std::size_t dim_;
};

class DenseMatrixMap final : public LinearMap {
public:
    DenseMatrixMap(std::shared_ptr<const DenseMatrix> a, double q_cost_per_multiply = 0.0)
        : a_(std::move(a)), q_cost_(q_cost_per_multiply) {}
    std::size_t in_dim() const override { return a_->cols; }
    std::size_t out_dim() const override { return a_->rows; }
    void apply(const Vec& x, Vec& out, CostMeter* cost = nullptr) const override;
    void adjoint(const Vec& y, Vec& out, CostMeter* cost = nullptr) const override;

private:
    std::shared_ptr<const DenseMatrix> a_;
    double q_cost_;
};

// Contiguous row range [row_begin, row_end) of a shared matrix, applied
// without copying.
class RowSubmatrixMap final : public LinearMap {
public:
    RowSubmatrixMap(std::shared_ptr<const DenseMatrix> a, std::size_t row_begin, std::size_t row_end,
                    double q_cost_per_multiply = 0.0);
    std::size_t in_dim() const override { return a_->cols; }
    std::size_t out_dim() const override { return row_end_ - row_begin_; }
    void apply(const Vec& x, Vec& out, CostMeter* cost = nullptr) const override;
    void adjoint(const Vec& y, Vec& out, CostMeter* cost = nullptr) const override;

private:
    std::shared_ptr<const DenseMatrix> a_;
    std::size_t row_begin_;
    std::size_t row_end_;
    double q_cost_;
};

// ---------------------------------------------------------------------------
// Monotone operators T_i
// ---------------------------------------------------------------------------

// Single-valued monotone operator with full domain, usable in forward steps.
class ForwardOperator {
public:
    virtual ~ForwardOperator() = default;
    virtual std::size_t dim() const = 0;
    virtual void eval(const Vec& x, Vec& out, CostMeter* cost = nullptr) const = 0;
    virtual std::optional<double> lipschitz() const { return std::nullopt; }
};

// Affine T(x) = T^l x + c with the linear part exposed, enabling the
// closed-form stepsize that needs T^l applied to a displacement.
class AffineForwardOperator : public ForwardOperator {
public:
    virtual void apply_linear(const Vec& x, Vec& out, CostMeter* cost = nullptr) const = 0;
    virtual const Vec& constant() const = 0;
    void eval(const Vec& x, Vec& out, CostMeter* cost = nullptr) const override;
};

// Maximal monotone operator with an exactly computable resolvent.
class ProxOperator {
public:
    virtual ~ProxOperator() = default;
    virtual std::size_t dim() const = 0;
    // x = (I + rho T)^{-1}(a), y = (a - x)/rho; y in T x and x + rho y = a.
    virtual void prox(const Vec& a, double rho, Vec& x, Vec& y, CostMeter* cost = nullptr) const = 0;
};

// T(x) = M x + c for a dense square matrix M with a monotone (PSD symmetric
// part) linear term. Mostly used by tests and small synthetic problems.
class DenseAffineOperator final : public AffineForwardOperator {
public:
    DenseAffineOperator(DenseMatrix linear, Vec constant, std::optional<double> lipschitz = std::nullopt);
    std::size_t dim() const override { return c_.size(); }
    void apply_linear(const Vec& x, Vec& out, CostMeter* cost = nullptr) const override;
    const Vec& constant() const override { return c_; }
    std::optional<double> lipschitz() const override { return lipschitz_; }

private:
    DenseMatrix m_;
    Vec c_;
    std::optional<double> lipschitz_;
};

// T(x) = x + c. The gradient of (1/2)||x + c||^2; Lipschitz with L = 1.
class TranslatedIdentityOperator final : public AffineForwardOperator {
public:
    explicit TranslatedIdentityOperator(Vec constant) : c_(std::move(constant)) {}
    std::size_t dim() const override { return c_.size(); }
    void apply_linear(const Vec& x, Vec& out, CostMeter* = nullptr) const override { out = x; }
    const Vec& constant() const override { return c_; }
    std::optional<double> lipschitz() const override { return 1.0; }

private:
    Vec c_;
};

// T(x) = Q^T (Q x - b), the gradient of (1/2)||Qx - b||^2. Affine with
// linear part Q^T Q and constant -Q^T b. Each multiply by Q or Q^T adds
// q_cost_per_multiply (= |R_i|/m for a row block) to the meter.
class LeastSquaresOperator final : public AffineForwardOperator {
public:
    LeastSquaresOperator(DenseMatrix q, Vec b, double q_cost_per_multiply = 0.0);
    std::size_t dim() const override { return q_.cols; }
    void eval(const Vec& x, Vec& out, CostMeter* cost = nullptr) const override;
    void apply_linear(const Vec& x, Vec& out, CostMeter* cost = nullptr) const override;
    const Vec& constant() const override { return c_; }
    std::optional<double> lipschitz() const override { return lipschitz_; }

    const DenseMatrix& q() const { return q_; }
    const Vec& b() const { return b_; }
    double q_cost_per_multiply() const { return q_cost_; }

private:
    DenseMatrix q_;
    Vec b_;
    Vec c_;  // -Q^T b
    double q_cost_;
    std::optional<double> lipschitz_;  // ||Q||^2, filled lazily by callers that need it
};

// T = subdifferential of lambda*||.||_1; resolvent is soft thresholding.
class SoftThresholdProx final : public ProxOperator {
public:
    SoftThresholdProx(std::size_t dim, double lambda) : dim_(dim), lambda_(lambda) {}
    std::size_t dim() const override { return dim_; }
    void prox(const Vec& a, double rho, Vec& x, Vec& y, CostMeter* = nullptr) const override;
    double lambda() const { return lambda_; }

private:
    std::size_t dim_;
    double lambda_;
};

// ---------------------------------------------------------------------------
// Blocks (G_i, T_i) with a capability tag
// ---------------------------------------------------------------------------

struct CgConfig {
    int max_iter = 200;
};

// forward-evaluable, stepsize from a known L or backtracking
struct ForwardLipschitzCap {
    std::shared_ptr<const ForwardOperator> op;
};

// forward-evaluable with affine structure: closed-form stepsize available
struct ForwardAffineCap {
    std::shared_ptr<const AffineForwardOperator> op;
};

// exact resolvent
struct ProxExactCap {
    std::shared_ptr<const ProxOperator> op;
};

// resolvent approximated by warm-started CG under the relative error criteria
struct ProxInexactCap {
    std::shared_ptr<const LeastSquaresOperator> op;
    double sigma = 0.9;
    CgConfig cg;
};

struct OperatorBlock {
    std::shared_ptr<const LinearMap> map;
    std::variant<ForwardLipschitzCap, ForwardAffineCap, ProxExactCap, ProxInexactCap> capability;
    double cost_weight = 0.0;  // Q-equivalents per multiply, |R_i|/m for row blocks

    bool forward_capable() const;
    bool prox_capable() const;
    std::size_t op_dim() const;
    std::optional<double> lipschitz() const;
};

struct InexactProxResult {
    Vec x;
    Vec y;  // recomputed from x through the true operator, so y in T x
    Vec e;  // x + rho*y - a, the defect of the approximate solve
    int inner_iterations = 0;
};

// CG ran out of budget before meeting the relative error criteria; carries
// the best iterate so the caller can tighten or abort.
struct CgBudgetError : NumericError {
    CgBudgetError(const std::string& msg, InexactProxResult best_iterate)
        : NumericError(msg), best(std::move(best_iterate)) {}
    InexactProxResult best;
};

// y = T_i x for a forward-capable block.
Vec forward_eval(const OperatorBlock& block, const Vec& x, CostMeter* cost = nullptr);

// Exact resolvent: x = (I + rho T)^{-1}(a), y = (a - x)/rho.
void prox_exact(const OperatorBlock& block, const Vec& a, double rho, Vec& x, Vec& y,
                CostMeter* cost = nullptr);

// Warm-started CG on (I + rho Q^T Q) x = a + rho Q^T b, stopping as soon as
// both relative error inequalities hold for (gz, w) = delayed (G_i z, w_i).
// Requires a = gz + rho*w.
InexactProxResult prox_inexact_cg(const OperatorBlock& block, const Vec& a, double rho, const Vec& gz,
                                  const Vec& w, const Vec& warm_start, CostMeter* cost = nullptr);

// Both inequalities of the relative error criterion:
//   <gz - x, e> >= -sigma*||gz - x||^2   and   <e, y - w> <= rho*sigma*||y - w||^2
bool check_relative_error(const Vec& gz, const Vec& x, const Vec& y, const Vec& w, const Vec& e,
                          double rho, double sigma);

}  // namespace projsplit
