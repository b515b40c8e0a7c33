#pragma once

#include <cstddef>
#include <vector>

#include "msdflow/matrices.hpp"

namespace msdflow {

// End state of an order-n curve in R^d: the dn numbers
// (xi, xi', ..., xi^{(n-1)}) stored block by block, d components per block.
struct BoundaryState {
    unsigned n = 1;
    unsigned d = 1;
    std::vector<double> coords;  // size n*d

    BoundaryState() = default;
    BoundaryState(unsigned n_, unsigned d_, std::vector<double> c);
    void validate() const;
};

// Floating-point evaluator of the mean-squared-derivative cost
//   C_t(x,y) = t^{2-2n} b^T M b,   b = H1(t) y - H2(t) x,
// together with its closed-form derivatives. The n x n matrices act
// blockwise on R^{dn}; d never enters the stored matrices.
class CostEvaluator {
  public:
    CostEvaluator(unsigned n, unsigned d);

    unsigned order() const { return n_; }
    unsigned dim() const { return d_; }
    std::size_t state_size() const { return static_cast<std::size_t>(n_) * d_; }

    // b = H1(t) y - H2(t) x, blockwise in d.
    std::vector<double> assemble_b(double t, const std::vector<double>& x,
                                   const std::vector<double>& y) const;

    // The zero-cost image of x: y_i = sum_{j>=i} t^{j-i}/(j-i)! x_j.
    std::vector<double> freeflow(double t, const std::vector<double>& x) const;

    double cost(double t, const std::vector<double>& x, const std::vector<double>& y) const;

    std::vector<double> cost_grad_x(double t, const std::vector<double>& x,
                                    const std::vector<double>& y) const;
    std::vector<double> cost_grad_y(double t, const std::vector<double>& x,
                                    const std::vector<double>& y) const;

    double cost_dt(double t, const std::vector<double>& x, const std::vector<double>& y) const;

    // Delta_{x_n} C; a t-independent constant equal to 2 d n^2, but computed
    // honestly from the trace formula.
    double cost_laplacian_xn(double t) const;

    // sum_{i=2}^n x_i . grad_{x_{i-1}} C
    double cost_transport_term(double t, const std::vector<double>& x,
                               const std::vector<double>& y) const;

    // Residual of  dC/dt = C/t + sum x_i.grad_{x_{i-1}}C - |grad_{x_n}C|^2/(4t)
    //              + Delta_{x_n}C - 2dn^2
    // evaluated with the closed forms above.
    double verify_cost_pde(double t, const std::vector<double>& x,
                           const std::vector<double>& y) const;

    // Explicit constant K with |y-x|^2 <= K [C_t(x,y) + t^2(|x|^2+|y|^2)]
    // for all 0 < t <= t_max, derived from operator norms.
    double comparability_constant(double t_max) const;

    // det of the symmetric part of M, converted from the exact rational value.
    double det_Ms() const { return det_Ms_; }
    double lambda_min_Ms() const { return lambda_min_; }
    const std::vector<double>& M_flat() const { return M_; }

  private:
    unsigned n_, d_;
    std::vector<double> M_;    // n x n, row-major
    std::vector<double> Ms_;   // (M + M^T)/2; equals M_, kept as the contract states
    double det_Ms_ = 0.0;
    double lambda_min_ = 0.0;

    void check_t(double t) const;
    void check_state(const std::vector<double>& v) const;
    // w = (S ⊗ I_d) v for a scalar n x n matrix S given row-major.
    std::vector<double> apply_block(const std::vector<double>& S,
                                    const std::vector<double>& v) const;
    std::vector<double> apply_block_transposed(const std::vector<double>& S,
                                               const std::vector<double>& v) const;
    std::vector<double> h1_apply(double t, const std::vector<double>& v, bool derivative) const;
    std::vector<double> h2_apply(double t, const std::vector<double>& v, bool derivative,
                                 bool transposed) const;
};

}  // namespace msdflow
