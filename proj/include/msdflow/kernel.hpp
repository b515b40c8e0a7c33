#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "msdflow/cost.hpp"
#include "msdflow/grid.hpp"

namespace msdflow {

struct DiracLimitRow {
    double t = 0.0;
    double value = 0.0;
    double error = 0.0;  // |value - phi(y)|
    bool quadrature_converged = false;
};

struct EvolveResult {
    GridMeasure measure;
    double mass_error = 0.0;  // |mass before renormalization - 1|
};

// Fundamental solution of the degenerate Kolmogorov equation
//   d_t f = sum_{i=2}^n x_i . grad_{x_{i-1}} f + Delta_{x_n} f:
//   Phi(t,x,y) = beta_d t^{-n^2 d/2} exp(-C_t(x,y)/(4t)),
// with beta_d = (det(M_s)/(4 pi)^n)^{d/2} fixed by Gaussian normalization.
class Kernel {
  public:
    Kernel(unsigned n, unsigned d);

    unsigned order() const { return eval_->order(); }
    unsigned dim() const { return eval_->dim(); }
    double beta() const { return beta_; }
    const CostEvaluator& evaluator() const { return *eval_; }

    static double beta_constant(unsigned n, unsigned d);

    double phi(double t, const std::vector<double>& x, const std::vector<double>& y) const;

    // int Phi(t,x,y) dx over R^{dn} by Gauss-Hermite quadrature aligned with
    // the Gaussian factor; exact up to roundoff, so a sharp normalization oracle.
    double normalization_integral(double t, const std::vector<double>& y,
                                  unsigned nodes_per_axis = 16) const;

    // Central finite differences of Phi pushed through the PDE; returns the
    // residual relative to max(|d_t Phi|, beta t^{-n^2 d/2 - 1}).
    double pde_residual(double t, const std::vector<double>& x, const std::vector<double>& y,
                        double fd_step) const;

    std::vector<DiracLimitRow> dirac_limit_check(
        const std::vector<double>& y, const std::vector<double>& t_sequence,
        const std::function<double(const std::vector<double>&)>& test_function,
        double box_halfwidth = 0.0) const;

    // rho(t,x) = sum_j w_j Phi(t, y_j, x): the adjoint-pairing kernel action,
    // evaluated on rho0's grid and renormalized. Reference-solution generator
    // for the scheme with V == 0. Each source cell is treated as a
    // piecewise-constant density and integrated with subsamples^dim
    // Gauss-Legendre points; subsamples = 0 picks enough points to resolve
    // the kernel width against the cell size.
    EvolveResult evolve_by_kernel(const GridMeasure& rho0, double t,
                                  unsigned subsamples = 0) const;

  private:
    std::shared_ptr<const CostEvaluator> eval_;
    double beta_ = 0.0;
};

}  // namespace msdflow
