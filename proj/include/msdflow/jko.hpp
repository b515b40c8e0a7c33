#pragma once

#include <functional>
#include <string>
#include <vector>

#include "msdflow/cost.hpp"
#include "msdflow/grid.hpp"
#include "msdflow/kernel.hpp"
#include "msdflow/transport.hpp"

namespace msdflow {

// Confining potential V acting through the last coordinate block only,
// with V >= 0 and Lipschitz gradient.
class PotentialSpec {
  public:
    static PotentialSpec zero();
    // V(x) = 0.5 * a * x^2
    static PotentialSpec quadratic(double a);
    // V(x) = sum_k coeffs[k] * x^k
    static PotentialSpec polynomial(std::vector<double> coeffs);

    double value(double xn) const;
    double grad(double xn) const;
    bool is_zero() const { return kind_ == Kind::zero; }
    bool is_standard_quadratic() const;  // V = x^2/2, the analytic OU case
    const std::string& name() const { return name_; }

    // Samples V >= 0 and |V'(a)-V'(b)| <= C|a-b| over the given coordinates;
    // throws if the nonnegativity assumption fails, returns the fitted C.
    double validate_on(const std::vector<double>& xn_samples) const;

  private:
    enum class Kind { zero, quadratic, polynomial } kind_ = Kind::zero;
    std::vector<double> coeffs_;
    std::string name_ = "zero";
};

struct FreeEnergy {
    double potential = 0.0;        // int V(x_n) rho
    double entropy = 0.0;          // int rho log rho
    double total = 0.0;            // potential + entropy
    double positive_entropy = 0.0; // int max(rho log rho, 0)
};

// Quadrature of the free energy on a tensor-grid measure (densities are
// weights over cell volume; 0 log 0 = 0).
FreeEnergy free_energy(const GridMeasure& rho, const PotentialSpec& V);

struct JkoConfig {
    double epsilon = 1e-2;      // entropic temperature in cost units
    double marginal_tol = 1e-8; // L1 row-marginal violation target
    double objective_rel_tol = 1e-9;
    int max_sweeps = 4000;
    bool epsilon_scaling = true;  // only applied on a cold start
};

struct StepRecord {
    double free_energy_total = 0.0;
    double free_energy_potential = 0.0;
    double free_energy_entropy = 0.0;
    double positive_entropy = 0.0;
    double transport_cost = 0.0;  // W_h(rho_{k-1}, rho_k), plan cost
    double second_moment = 0.0;
    int inner_sweeps = 0;
    double marginal_violation = 0.0;
};

struct JkoStepResult {
    GridMeasure rho_next;
    TransportPlan plan;
    StepRecord record;
};

// One minimizing-movement step:
//   min_rho  (1/2h) W_h(rho_prev, rho) + int (V(x_n) + log rho) rho.
// Solved over the grid weights by alternating Sinkhorn row projections with
// the closed-form KL-proximal column update of the free energy; this is the
// multiplicative mirror-descent family on the simplex.
JkoStepResult jko_step(const CostEvaluator& eval, const GridMeasure& rho_prev, double h,
                       const PotentialSpec& V, const JkoConfig& config,
                       bool materialize_plan = true,
                       const std::vector<double>* warm_f = nullptr,
                       const std::vector<double>* warm_g = nullptr);

// Same step on a precomputed cost matrix (the support is fixed across a
// scheme run, so run_scheme assembles the matrix once).
JkoStepResult jko_step_on_cost(const std::vector<double>& cost, const GridMeasure& rho_prev,
                               double h, const PotentialSpec& V, const JkoConfig& config,
                               bool materialize_plan = true,
                               const std::vector<double>* warm_f = nullptr,
                               const std::vector<double>* warm_g = nullptr);

struct SchemeState {
    double h = 0.0;
    double T = 0.0;
    unsigned steps = 0;
    std::vector<GridMeasure> densities;  // rho_0 .. rho_K
    std::vector<StepRecord> records;     // record[k] describes rho_k (k >= 0)

    const GridMeasure& interpolate(double t) const;  // rho^h(t) = rho_k on ((k-1)h, kh]
};

// Iterates jko_step K = ceil(T/h) times with monitor records and a blow-up
// guard (abort when a monitor exceeds 10x its running median).
SchemeState run_scheme(const CostEvaluator& eval, const GridMeasure& rho0, double h, double T,
                       const PotentialSpec& V, const JkoConfig& config);

// Smooth compactly supported product bump for the Euler-Lagrange residual:
// phi(x) = prod_k exp(1 - 1/(1 - u_k^2)), u_k = (x_k - c_k)/r_k on |u_k|<1.
class SmoothBump {
  public:
    SmoothBump(std::vector<double> center, std::vector<double> radius);
    double value(const std::vector<double>& x) const;
    double partial(const std::vector<double>& x, std::size_t axis) const;
    double second_partial(const std::vector<double>& x, std::size_t axis) const;
    const std::vector<double>& center() const { return center_; }
    const std::vector<double>& radius() const { return radius_; }

  private:
    std::vector<double> center_, radius_;
};

// The discrete Euler-Lagrange expression of one scheme step:
//   (1/h) sum_ij P_ij (y_j - x_i).grad phi(y_j)
//   - sum_j w_j sum_{i=2}^n x_i.grad_{x_{i-1}} phi
//   + sum_j w_j V'(x_n) d phi/d x_n  -  sum_j w_j Delta_{x_n} phi.
// Vanishes at rate o(h) along the scheme.
double euler_lagrange_residual(const CostEvaluator& eval, const GridMeasure& rho_prev,
                               const GridMeasure& rho_next, const TransportPlan& plan, double h,
                               const PotentialSpec& V, const SmoothBump& phi);

enum class SchemeReference { kernel_evolution, ou_analytic };

struct ConvergenceRow {
    double h = 0.0;
    double l1_error = 0.0;
    double observed_order = 0.0;  // vs previous row, 0 for the first
    double step_cost_sum = 0.0;   // sum_k W_h(rho_{k-1}, rho_k)
    bool energy_dissipation_ok = true;
    double worst_dissipation_slack = 0.0;
};

struct ConvergenceReport {
    SchemeReference reference;
    std::vector<ConvergenceRow> rows;
    bool monotone_decreasing() const;
};

// Runs the scheme for each h and measures the L1 grid distance at time T
// against the requested reference solution. Throws when no reference exists
// for the configuration (no fabrication).
ConvergenceReport convergence_report(const CostEvaluator& eval, const GridMeasure& rho0,
                                     const PotentialSpec& V, double T,
                                     const std::vector<double>& h_list, SchemeReference reference,
                                     const JkoConfig& config);

struct EquicontinuityRow {
    double t1 = 0.0, t2 = 0.0;
    double w2_squared = 0.0;
    double ratio = 0.0;  // W2^2 / (|t2-t1| + h)
};

struct EquicontinuityTable {
    std::vector<EquicontinuityRow> rows;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
};

// W2^2 between interpolants at sampled time pairs; measures stay coarsened
// to at most `coarse_cap` support points per side before the exact LP.
EquicontinuityTable equicontinuity_monitor(const SchemeState& state, std::size_t coarse_cap = 100);

}  // namespace msdflow
