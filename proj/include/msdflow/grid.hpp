#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace msdflow {

// Uniform tensor grid on an axis-aligned box; measures live on cell centers.
struct TensorGrid {
    std::vector<double> lo, hi;
    std::vector<unsigned> cells;

    TensorGrid() = default;
    TensorGrid(std::vector<double> lo_, std::vector<double> hi_, std::vector<unsigned> cells_);

    std::size_t dims() const { return lo.size(); }
    std::size_t num_points() const;
    double spacing(std::size_t axis) const { return (hi[axis] - lo[axis]) / cells[axis]; }
    double cell_volume() const;
    double center(std::size_t axis, unsigned index) const {
        return lo[axis] + (index + 0.5) * spacing(axis);
    }
    std::vector<double> point(std::size_t flat_index) const;
};

// Probability measure on a finite point set: distinct support points with
// nonnegative weights summing to one. When built on a TensorGrid the cell
// volume is retained so weights can be read as densities.
struct GridMeasure {
    TensorGrid grid;              // may be empty for a free point cloud
    std::size_t dim = 0;          // ambient dimension of the points
    std::vector<double> points;   // size num_points * dim, row-major
    std::vector<double> weights;  // size num_points

    std::size_t size() const { return weights.size(); }
    const double* point_ptr(std::size_t i) const { return points.data() + i * dim; }
    double cell_volume() const { return grid.dims() ? grid.cell_volume() : 0.0; }

    void validate(double mass_tol = 1e-12) const;
    void renormalize();

    double second_moment() const;
    double l1_distance(const GridMeasure& other) const;

    static GridMeasure from_points(std::size_t dim, std::vector<double> pts,
                                   std::vector<double> wts);
    // Density sampled at cell centers, then normalized to total mass one.
    static GridMeasure from_density(const TensorGrid& grid,
                                    const std::function<double(const std::vector<double>&)>& density);
    static GridMeasure gaussian_on_grid(const TensorGrid& grid, const std::vector<double>& mean,
                                        const std::vector<double>& variance);
};

}  // namespace msdflow
