#pragma once

#include <memory>
#include <vector>

#include "projsplit/common.hpp"

namespace projsplit {

class LinearMap;

// Iterate p^k = (z, w_1, ..., w_{n-1}) in the collective primal-dual space
// H_0 x H_1 x ... x H_{n-1}. The last dual w_n = -sum_i G_i^* w_i is derived,
// not stored; see derived_dual.
struct PrimalDualPoint {
    Vec z;
    std::vector<Vec> w;
};

// gamma-scaled metric on the product space:
//   ||(z,w)||^2 = gamma*||z||^2 + sum_i ||w_i||^2
struct GammaMetric {
    double gamma = 1.0;
};

// -sum_{i=1}^{n-1} G_i^* w_i; the zero vector of H_0 when n = 1.
// maps has one entry per w component.
Vec derived_dual(const PrimalDualPoint& p, const std::vector<std::shared_ptr<const LinearMap>>& maps);

double gamma_norm_sq(const PrimalDualPoint& p, const GammaMetric& m);

double gamma_inner(const PrimalDualPoint& p, const PrimalDualPoint& q, const GammaMetric& m);

}  // namespace projsplit
