#include "projsplit/hyperplane.hpp"

#include <algorithm>

#include "projsplit/kernels.hpp"
#include "projsplit/operators.hpp"

namespace projsplit {

ProjectionComputation compute_projection(const std::vector<BlockGraphPoint>& blocks,
                                         const std::vector<std::shared_ptr<const LinearMap>>& maps,
                                         const PrimalDualPoint& p, double gamma, double beta) {
    const std::size_t n = blocks.size();
    const BlockGraphPoint& last = blocks[n - 1];

    ProjectionComputation pc;
    pc.beta = beta;
    pc.u.resize(n - 1);
    pc.v = last.y;

    Vec tmp;
    double u_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        maps[i]->apply(last.x, tmp);
        sub(blocks[i].x, tmp, pc.u[i]);
        u_sq += norm_sq(pc.u[i]);

        maps[i]->adjoint(blocks[i].y, tmp);
        axpy(1.0, tmp, pc.v);
    }
    pc.pi = u_sq + norm_sq(pc.v) / gamma;

    pc.sum_xy = 0.0;
    for (const BlockGraphPoint& b : blocks) pc.sum_xy += dot(b.x, b.y);

    pc.phi = phi_at(pc, p);
    pc.alpha = pc.pi > 0.0 ? beta * std::max(0.0, pc.phi) / pc.pi : 0.0;
    return pc;
}

double phi_at(const ProjectionComputation& pc, const PrimalDualPoint& p) {
    double s = dot(p.z, pc.v);
    for (std::size_t i = 0; i < pc.u.size(); ++i) s += dot(p.w[i], pc.u[i]);
    return s - pc.sum_xy;
}

PrimalDualPoint apply_projection(const PrimalDualPoint& p, const ProjectionComputation& pc,
                                 double gamma) {
    PrimalDualPoint next = p;
    axpy(-pc.alpha / gamma, pc.v, next.z);
    for (std::size_t i = 0; i < next.w.size(); ++i) axpy(-pc.alpha, pc.u[i], next.w[i]);
    return next;
}

}  // namespace projsplit
