#pragma once

#include <functional>
#include <vector>

namespace msdflow {

// Nodes and weights for Gauss-Hermite quadrature with weight exp(-s^2):
//   int f(s) exp(-s^2) ds ~= sum_i w_i f(s_i).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(unsigned m);

struct BoxQuadratureResult {
    double value = 0.0;
    bool converged = false;
    int levels = 0;
    double last_change = 0.0;
};

// Composite trapezoid on an axis-aligned box, refined by doubling the grid
// until two consecutive levels agree to rel_tol. Intended for smooth,
// well-localized integrands in up to three dimensions.
BoxQuadratureResult adaptive_trapezoid_box(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& lo, const std::vector<double>& hi,
    double rel_tol = 1e-7, unsigned base_cells = 16, unsigned max_levels = 9);

}  // namespace msdflow
