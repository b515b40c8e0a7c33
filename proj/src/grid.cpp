#include "msdflow/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace msdflow {

TensorGrid::TensorGrid(std::vector<double> lo_, std::vector<double> hi_,
                       std::vector<unsigned> cells_)
    : lo(std::move(lo_)), hi(std::move(hi_)), cells(std::move(cells_)) {
    if (lo.size() != hi.size() || lo.size() != cells.size() || lo.empty())
        throw std::invalid_argument("TensorGrid: inconsistent axis data");
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (!(hi[k] > lo[k]) || cells[k] == 0)
            throw std::invalid_argument("TensorGrid: bad axis bounds or cell count");
    }
}

std::size_t TensorGrid::num_points() const {
    std::size_t n = 1;
    for (unsigned c : cells) n *= c;
    return n;
}

double TensorGrid::cell_volume() const {
    double v = 1.0;
    for (std::size_t k = 0; k < dims(); ++k) v *= spacing(k);
    return v;
}

std::vector<double> TensorGrid::point(std::size_t flat_index) const {
    std::vector<double> p(dims());
    std::size_t rem = flat_index;
    for (std::size_t k = 0; k < dims(); ++k) {
        p[k] = center(k, static_cast<unsigned>(rem % cells[k]));
        rem /= cells[k];
    }
    return p;
}

void GridMeasure::validate(double mass_tol) const {
    if (points.size() != weights.size() * dim)
        throw std::invalid_argument("GridMeasure: point/weight size mismatch");
    double mass = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("GridMeasure: negative weight");
        mass += w;
    }
    if (std::abs(mass - 1.0) > mass_tol)
        throw std::invalid_argument("GridMeasure: weights do not sum to one");
}

void GridMeasure::renormalize() {
    double mass = 0.0;
    for (double w : weights) mass += w;
    if (!(mass > 0.0)) throw std::invalid_argument("GridMeasure: zero total mass");
    for (double& w : weights) w /= mass;
}

double GridMeasure::second_moment() const {
    double m2 = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            double c = points[i * dim + k];
            r2 += c * c;
        }
        m2 += weights[i] * r2;
    }
    return m2;
}

double GridMeasure::l1_distance(const GridMeasure& other) const {
    if (size() != other.size() || dim != other.dim)
        throw std::invalid_argument("GridMeasure: l1_distance needs a common support");
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += std::abs(weights[i] - other.weights[i]);
    return s;
}

GridMeasure GridMeasure::from_points(std::size_t dim, std::vector<double> pts,
                                     std::vector<double> wts) {
    GridMeasure m;
    m.dim = dim;
    m.points = std::move(pts);
    m.weights = std::move(wts);
    m.renormalize();
    m.validate(1e-9);
    return m;
}

GridMeasure GridMeasure::from_density(
    const TensorGrid& grid, const std::function<double(const std::vector<double>&)>& density) {
    GridMeasure m;
    m.grid = grid;
    m.dim = grid.dims();
    std::size_t n = grid.num_points();
    m.points.resize(n * m.dim);
    m.weights.resize(n);
    double vol = grid.cell_volume();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p = grid.point(i);
        for (std::size_t k = 0; k < m.dim; ++k) m.points[i * m.dim + k] = p[k];
        double rho = density(p);
        if (!(rho >= 0.0)) throw std::invalid_argument("GridMeasure: negative density");
        m.weights[i] = rho * vol;
    }
    m.renormalize();
    return m;
}

GridMeasure GridMeasure::gaussian_on_grid(const TensorGrid& grid, const std::vector<double>& mean,
                                          const std::vector<double>& variance) {
    if (mean.size() != grid.dims() || variance.size() != grid.dims())
        throw std::invalid_argument("gaussian_on_grid: dimension mismatch");
    return from_density(grid, [&](const std::vector<double>& p) {
        double e = 0.0, norm = 1.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            e += (p[k] - mean[k]) * (p[k] - mean[k]) / (2.0 * variance[k]);
            norm /= std::sqrt(2.0 * M_PI * variance[k]);
        }
        return norm * std::exp(-e);
    });
}

}  // namespace msdflow
