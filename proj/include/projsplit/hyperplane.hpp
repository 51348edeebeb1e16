#pragma once

#include "projsplit/product_space.hpp"
#include "projsplit/steps.hpp"

namespace projsplit {

// One coordination step: gradient blocks of the separating affine function,
// its squared gradient norm pi under the gamma metric, its value phi at the
// current point, and the relaxed projection coefficient alpha.
struct ProjectionComputation {
    std::vector<Vec> u;  // u_i = x_i - G_i x_n, i = 1..n-1
    Vec v;               // v = sum_i G_i^* y_i + y_n
    double pi = 0.0;     // sum ||u_i||^2 + ||v||^2 / gamma
    double phi = 0.0;
    double alpha = 0.0;
    double beta = 1.0;
    double sum_xy = 0.0;  // sum_i <x_i, y_i>, kept so phi is evaluable anywhere
};

// blocks holds all n graph points; maps the n-1 coupling maps (the last
// block couples through the identity). alpha = beta*max{0,phi}/pi when
// pi > 0 and 0 otherwise; callers with a zero tolerance on pi decide the
// termination branch themselves.
ProjectionComputation compute_projection(const std::vector<BlockGraphPoint>& blocks,
                                         const std::vector<std::shared_ptr<const LinearMap>>& maps,
                                         const PrimalDualPoint& p, double gamma, double beta);

// phi evaluated at an arbitrary point of the product space.
double phi_at(const ProjectionComputation& pc, const PrimalDualPoint& p);

// Relaxed projection: z+ = z - alpha*v/gamma, w_i+ = w_i - alpha*u_i.
PrimalDualPoint apply_projection(const PrimalDualPoint& p, const ProjectionComputation& pc,
                                 double gamma);

}  // namespace projsplit
