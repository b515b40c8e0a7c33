#include "msdflow/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace msdflow {

GaussHermiteRule gauss_hermite(unsigned m) {
    if (m < 1 || m > 128) throw std::invalid_argument("gauss_hermite: order out of range");
    GaussHermiteRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    const double pi_m4 = 0.7511255444649425;  // pi^{-1/4}
    unsigned half = (m + 1) / 2;
    double z = 0.0;
    for (unsigned i = 0; i < half; ++i) {
        // Stroud-Secrest style initial guesses, then Newton on the
        // orthonormal Hermite recurrence.
        if (i == 0) {
            z = std::sqrt(2.0 * m + 1.0) - 1.85575 * std::pow(2.0 * m + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(m), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pi_m4, p2 = 0.0;
            for (unsigned j = 1; j <= m; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * m) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15 * (1.0 + std::abs(z))) break;
        }
        rule.nodes[i] = z;
        rule.nodes[m - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[m - 1 - i] = rule.weights[i];
    }
    if (m % 2 == 1) rule.nodes[half - 1] = 0.0;
    return rule;
}

BoxQuadratureResult adaptive_trapezoid_box(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& lo, const std::vector<double>& hi,
    double rel_tol, unsigned base_cells, unsigned max_levels) {
    if (lo.size() != hi.size() || lo.empty())
        throw std::invalid_argument("adaptive_trapezoid_box: bad bounds");
    std::size_t dims = lo.size();
    if (dims > 3) throw std::invalid_argument("adaptive_trapezoid_box: dims > 3 unsupported");

    auto evaluate_level = [&](unsigned cells) {
        std::vector<double> x(dims);
        std::vector<double> h(dims);
        for (std::size_t k = 0; k < dims; ++k) h[k] = (hi[k] - lo[k]) / cells;
        double sum = 0.0;
        std::vector<unsigned> idx(dims, 0);
        std::size_t total = 1;
        for (std::size_t k = 0; k < dims; ++k) total *= (cells + 1);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            double w = 1.0;
            for (std::size_t k = 0; k < dims; ++k) {
                unsigned ik = static_cast<unsigned>(rem % (cells + 1));
                rem /= (cells + 1);
                x[k] = lo[k] + ik * h[k];
                if (ik == 0 || ik == cells) w *= 0.5;
            }
            sum += w * f(x);
        }
        double vol_factor = 1.0;
        for (std::size_t k = 0; k < dims; ++k) vol_factor *= h[k];
        return sum * vol_factor;
    };

    BoxQuadratureResult res;
    unsigned cells = base_cells;
    double prev = evaluate_level(cells);
    for (unsigned level = 1; level <= max_levels; ++level) {
        cells *= 2;
        double cur = evaluate_level(cells);
        res.levels = static_cast<int>(level);
        res.last_change = std::abs(cur - prev);
        res.value = cur;
        if (res.last_change <= rel_tol * std::max(1.0, std::abs(cur))) {
            res.converged = true;
            return res;
        }
        prev = cur;
    }
    res.converged = false;
    return res;
}

}  // namespace msdflow
