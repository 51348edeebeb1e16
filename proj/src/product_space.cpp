#include "projsplit/product_space.hpp"

#include "projsplit/kernels.hpp"
#include "projsplit/operators.hpp"

namespace projsplit {

Vec derived_dual(const PrimalDualPoint& p, const std::vector<std::shared_ptr<const LinearMap>>& maps) {
    if (maps.size() != p.w.size()) {
        throw ConfigError("derived_dual: one map per dual component required");
    }
    Vec out(p.z.size(), 0.0);
    Vec tmp;
    for (std::size_t i = 0; i < p.w.size(); ++i) {
        maps[i]->adjoint(p.w[i], tmp);
        if (tmp.size() != out.size()) {
            throw ConfigError("derived_dual: adjoint output does not live in the primal space");
        }
        axpy(-1.0, tmp, out);
    }
    return out;
}

double gamma_norm_sq(const PrimalDualPoint& p, const GammaMetric& m) {
    double s = m.gamma * norm_sq(p.z);
    for (const Vec& wi : p.w) s += norm_sq(wi);
    return s;
}

double gamma_inner(const PrimalDualPoint& p, const PrimalDualPoint& q, const GammaMetric& m) {
    if (p.z.size() != q.z.size() || p.w.size() != q.w.size()) {
        throw ConfigError("gamma_inner: dimension mismatch");
    }
    double s = m.gamma * dot(p.z, q.z);
    for (std::size_t i = 0; i < p.w.size(); ++i) {
        if (p.w[i].size() != q.w[i].size()) throw ConfigError("gamma_inner: dimension mismatch");
        s += dot(p.w[i], q.w[i]);
    }
    return s;
}

}  // namespace projsplit
