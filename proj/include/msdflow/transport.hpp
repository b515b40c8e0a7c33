#pragma once

#include <cstddef>
#include <vector>

#include "msdflow/cost.hpp"
#include "msdflow/grid.hpp"

namespace msdflow {

// Coupling between two discrete measures with its cost value. The reported
// cost is always sum_ij plan_ij * C_ij, entropy excluded.
struct TransportPlan {
    std::size_t rows = 0, cols = 0;
    std::vector<double> matrix;  // row-major, rows*cols
    double cost_value = 0.0;
    enum class Method { exact, entropic } method = Method::exact;
    double epsilon = 0.0;  // entropic only
    bool converged = true;
    double marginal_violation = 0.0;
    int iterations = 0;
    std::vector<double> potential_source;  // dual values, one per source atom
    std::vector<double> potential_target;

    double at(std::size_t i, std::size_t j) const { return matrix[i * cols + j]; }
    // L1 violation of the marginal constraints against (p, q).
    double check_marginals(const std::vector<double>& p, const std::vector<double>& q) const;
};

// Pairwise cost matrix C_ij = C_h(x_i, y_j) through the cost evaluator.
std::vector<double> cost_matrix(const CostEvaluator& eval, double h, const GridMeasure& source,
                                const GridMeasure& target);

// Exact transportation LP by the primal simplex on the bipartite basis tree
// (MODI). Intended for desk-scale instances; refuses rows*cols > 10^4.
TransportPlan solve_exact(const std::vector<double>& cost, const std::vector<double>& p,
                          const std::vector<double>& q);
TransportPlan solve_exact(const CostEvaluator& eval, double h, const GridMeasure& source,
                          const GridMeasure& target);

struct SinkhornOptions {
    double epsilon = 1e-2;       // entropic temperature, in cost units
    int max_iters = 20000;       // total half-sweep budget across the schedule
    double tol = 1e-9;           // L1 marginal violation target
    bool epsilon_scaling = true; // start at 10x epsilon and halve down
    bool materialize_plan = true;
};

// Log-domain Sinkhorn on the Gibbs kernel exp(-C/eps). Non-convergence is
// reported, not thrown; the best plan found is still returned.
TransportPlan solve_entropic(const std::vector<double>& cost, const std::vector<double>& p,
                             const std::vector<double>& q, const SinkhornOptions& opt);
TransportPlan solve_entropic(const CostEvaluator& eval, double h, const GridMeasure& source,
                             const GridMeasure& target, const SinkhornOptions& opt);

// Squared-Euclidean optimal transport cost (the W_2^2 of the equi-continuity
// monitor). One-dimensional supports use the exact monotone coupling; higher
// dimensions go through the exact LP and inherit its size cap.
double wasserstein2_euclidean(const GridMeasure& source, const GridMeasure& target);

// Shared log-sum-exp sweeps over a dense cost matrix, exposed for the scheme
// module's proximal updates.
// out[i] = log sum_j exp((g[j] - C_ij)/eps)   (over_rows = true)
// out[j] = log sum_i exp((f[i] - C_ij)/eps)   (over_rows = false)
void sinkhorn_lse(const std::vector<double>& cost, std::size_t rows, std::size_t cols,
                  const std::vector<double>& dual, double eps, bool over_rows,
                  std::vector<double>& out);

}  // namespace msdflow
