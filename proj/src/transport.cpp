#include "msdflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "msdflow/parallel.hpp"

namespace msdflow {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double TransportPlan::check_marginals(const std::vector<double>& p,
                                      const std::vector<double>& q) const {
    double viol = 0.0;
    std::vector<double> col(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            r += matrix[i * cols + j];
            col[j] += matrix[i * cols + j];
        }
        viol += std::abs(r - p[i]);
    }
    for (std::size_t j = 0; j < cols; ++j) viol += std::abs(col[j] - q[j]);
    return viol;
}

std::vector<double> cost_matrix(const CostEvaluator& eval, double h, const GridMeasure& source,
                                const GridMeasure& target) {
    if (!(h > 0.0)) throw std::invalid_argument("cost_matrix: h must be positive");
    if (source.dim != eval.state_size() || target.dim != eval.state_size())
        throw std::invalid_argument("cost_matrix: measure dimension mismatch");
    std::size_t m = source.size(), n = target.size();
    std::vector<double> C(m * n);
    parallel_for(m, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> x(source.dim), y(target.dim);
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t k = 0; k < source.dim; ++k) x[k] = source.points[i * source.dim + k];
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < target.dim; ++k)
                    y[k] = target.points[j * target.dim + k];
                C[i * n + j] = eval.cost(h, x, y);
            }
        }
    });
    for (double c : C)
        if (!std::isfinite(c) || c < 0.0)
            throw std::runtime_error("cost_matrix: non-finite or negative entry");
    return C;
}

// ---------------------------------------------------------------------------
// Exact solver: primal transportation simplex on the basis spanning tree.
// ---------------------------------------------------------------------------

namespace {

struct BasisCell {
    std::size_t i, j;
    double flow;
};

class TransportSimplex {
  public:
    TransportSimplex(const std::vector<double>& cost, std::vector<double> supply,
                     std::vector<double> demand)
        : C(cost), a(std::move(supply)), b(std::move(demand)), m(a.size()), n(b.size()) {}

    TransportPlan run() {
        northwest_corner();
        double scale = 1.0;
        for (double c : C) scale = std::max(scale, std::abs(c));
        const double tol = 1e-12 * scale;
        const long max_pivots = 2000 + 200 * static_cast<long>(m + n);
        long pivot = 0;
        for (; pivot < max_pivots; ++pivot) {
            compute_potentials();
            // Entering arc: most negative reduced cost; Bland's rule (first
            // negative) after a grace period to rule out cycling.
            bool bland = pivot > 500 + 20 * static_cast<long>(m + n);
            double best = -tol;
            std::size_t bi = m, bj = n;
            for (std::size_t i = 0; i < m && (bi == m || !bland); ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    double r = C[i * n + j] - u[i] - v[j];
                    if (r < best) {
                        best = r;
                        bi = i;
                        bj = j;
                        if (bland) break;
                    }
                }
            }
            if (bi == m) break;  // optimal
            pivot_on(bi, bj);
        }
        if (pivot >= max_pivots)
            throw std::runtime_error("solve_exact: simplex failed to converge");

        TransportPlan plan;
        plan.rows = m;
        plan.cols = n;
        plan.matrix.assign(m * n, 0.0);
        plan.method = TransportPlan::Method::exact;
        double total = 0.0;
        for (const auto& c : basis) {
            plan.matrix[c.i * n + c.j] = c.flow;
            total += c.flow * C[c.i * n + c.j];
        }
        plan.cost_value = total;
        plan.potential_source = u;
        plan.potential_target = v;
        plan.iterations = static_cast<int>(pivot);
        return plan;
    }

  private:
    const std::vector<double>& C;
    std::vector<double> a, b;
    std::size_t m, n;
    std::vector<BasisCell> basis;
    std::vector<double> u, v;

    void northwest_corner() {
        std::vector<double> ra = a, rb = b;
        std::size_t i = 0, j = 0;
        while (i < m && j < n) {
            double f = std::min(ra[i], rb[j]);
            basis.push_back({i, j, f});
            ra[i] -= f;
            rb[j] -= f;
            if (i == m - 1 && j == n - 1) break;
            // on ties advance only one index so the basis stays a tree with
            // exactly m+n-1 cells (zero-flow cells are legitimate)
            if (ra[i] <= rb[j] && i < m - 1) {
                ++i;
            } else if (j < n - 1) {
                ++j;
            } else {
                ++i;
            }
        }
    }

    void compute_potentials() {
        u.assign(m, std::numeric_limits<double>::quiet_NaN());
        v.assign(n, std::numeric_limits<double>::quiet_NaN());
        // adjacency over basic cells
        std::vector<std::vector<std::size_t>> row_cells(m), col_cells(n);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            row_cells[basis[k].i].push_back(k);
            col_cells[basis[k].j].push_back(k);
        }
        std::vector<std::size_t> stack;
        u[0] = 0.0;
        stack.push_back(0);  // encoded: row r as r, col c as m + c
        std::vector<char> seen_cell(basis.size(), 0);
        while (!stack.empty()) {
            std::size_t node = stack.back();
            stack.pop_back();
            if (node < m) {
                for (std::size_t k : row_cells[node]) {
                    if (seen_cell[k]) continue;
                    seen_cell[k] = 1;
                    std::size_t j = basis[k].j;
                    if (std::isnan(v[j])) {
                        v[j] = C[node * n + j] - u[node];
                        stack.push_back(m + j);
                    }
                }
            } else {
                std::size_t j = node - m;
                for (std::size_t k : col_cells[j]) {
                    if (seen_cell[k]) continue;
                    seen_cell[k] = 1;
                    std::size_t i = basis[k].i;
                    if (std::isnan(u[i])) {
                        u[i] = C[i * n + j] - v[j];
                        stack.push_back(i);
                    }
                }
            }
        }
        for (std::size_t i = 0; i < m; ++i)
            if (std::isnan(u[i])) throw std::runtime_error("solve_exact: basis not connected");
        for (std::size_t j = 0; j < n; ++j)
            if (std::isnan(v[j])) throw std::runtime_error("solve_exact: basis not connected");
    }

    // Find the unique cycle created by adding (bi, bj), alternate signs,
    // shift flow, drop the blocking leaving cell.
    void pivot_on(std::size_t bi, std::size_t bj) {
        // path from row bi to col bj through the basis tree
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(m + n);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            adj[basis[k].i].push_back({m + basis[k].j, k});
            adj[m + basis[k].j].push_back({basis[k].i, k});
        }
        std::vector<std::size_t> parent_node(m + n, SIZE_MAX), parent_edge(m + n, SIZE_MAX);
        std::vector<char> visited(m + n, 0);
        std::vector<std::size_t> queue{bi};
        visited[bi] = 1;
        for (std::size_t q = 0; q < queue.size(); ++q) {
            std::size_t node = queue[q];
            if (node == m + bj) break;
            for (auto [next, edge] : adj[node]) {
                if (visited[next]) continue;
                visited[next] = 1;
                parent_node[next] = node;
                parent_edge[next] = edge;
                queue.push_back(next);
            }
        }
        if (!visited[m + bj]) throw std::runtime_error("solve_exact: no pivot cycle");

        // walk back: edges alternate -,+,-,... starting from the edge into col bj
        std::vector<std::size_t> cycle_edges;
        for (std::size_t node = m + bj; node != bi; node = parent_node[node])
            cycle_edges.push_back(parent_edge[node]);
        // entering cell gets +theta; edges at even positions from the target
        // side are the "minus" ones
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leaving = SIZE_MAX;
        for (std::size_t pos = 0; pos < cycle_edges.size(); ++pos) {
            if (pos % 2 != 0) continue;  // minus edges
            const BasisCell& cell = basis[cycle_edges[pos]];
            if (cell.flow < theta ||
                (cell.flow == theta && leaving != SIZE_MAX &&
                 (cell.i < basis[leaving].i ||
                  (cell.i == basis[leaving].i && cell.j < basis[leaving].j)))) {
                theta = cell.flow;
                leaving = cycle_edges[pos];
            }
        }
        if (leaving == SIZE_MAX) throw std::runtime_error("solve_exact: unbounded pivot");
        for (std::size_t pos = 0; pos < cycle_edges.size(); ++pos) {
            basis[cycle_edges[pos]].flow += (pos % 2 == 0) ? -theta : theta;
        }
        BasisCell entering{bi, bj, theta};
        basis[leaving] = entering;
    }
};

void check_measure_pair(const std::vector<double>& p, const std::vector<double>& q) {
    double sp = std::accumulate(p.begin(), p.end(), 0.0);
    double sq = std::accumulate(q.begin(), q.end(), 0.0);
    if (std::abs(sp - sq) > 1e-9)
        throw std::invalid_argument("transport: marginal masses differ");
    for (double w : p)
        if (!(w >= 0.0)) throw std::invalid_argument("transport: negative source weight");
    for (double w : q)
        if (!(w >= 0.0)) throw std::invalid_argument("transport: negative target weight");
}

}  // namespace

TransportPlan solve_exact(const std::vector<double>& cost, const std::vector<double>& p,
                          const std::vector<double>& q) {
    if (cost.size() != p.size() * q.size())
        throw std::invalid_argument("solve_exact: cost matrix shape mismatch");
    if (p.size() * q.size() > 10000)
        throw std::invalid_argument("solve_exact: instance exceeds the 10^4-entry cap");
    check_measure_pair(p, q);
    TransportSimplex simplex(cost, p, q);
    return simplex.run();
}

TransportPlan solve_exact(const CostEvaluator& eval, double h, const GridMeasure& source,
                          const GridMeasure& target) {
    return solve_exact(cost_matrix(eval, h, source, target), source.weights, target.weights);
}

// ---------------------------------------------------------------------------
// Entropic solver: log-domain Sinkhorn with an epsilon-scaling schedule.
// ---------------------------------------------------------------------------

void sinkhorn_lse(const std::vector<double>& cost, std::size_t rows, std::size_t cols,
                  const std::vector<double>& dual, double eps, bool over_rows,
                  std::vector<double>& out) {
    if (over_rows) {
        out.assign(rows, kNegInf);
        parallel_for(rows, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const double* ci = cost.data() + i * cols;
                double mx = kNegInf;
                for (std::size_t j = 0; j < cols; ++j) {
                    double vdual = dual[j];
                    if (vdual == kNegInf) continue;
                    double a = (vdual - ci[j]) / eps;
                    if (a > mx) mx = a;
                }
                if (mx == kNegInf) continue;
                double s = 0.0;
                for (std::size_t j = 0; j < cols; ++j) {
                    double vdual = dual[j];
                    if (vdual == kNegInf) continue;
                    s += std::exp((vdual - ci[j]) / eps - mx);
                }
                out[i] = mx + std::log(s);
            }
        });
    } else {
        // column sweep: accumulate per-thread partial maxima then a second pass
        out.assign(cols, kNegInf);
        std::vector<double> mx(cols, kNegInf);
        for (std::size_t i = 0; i < rows; ++i) {
            if (dual[i] == kNegInf) continue;
            const double* ci = cost.data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) {
                double aij = (dual[i] - ci[j]) / eps;
                if (aij > mx[j]) mx[j] = aij;
            }
        }
        std::vector<double> sum(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            if (dual[i] == kNegInf) continue;
            const double* ci = cost.data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j)
                sum[j] += std::exp((dual[i] - ci[j]) / eps - mx[j]);
        }
        for (std::size_t j = 0; j < cols; ++j)
            if (mx[j] != kNegInf) out[j] = mx[j] + std::log(sum[j]);
    }
}

TransportPlan solve_entropic(const std::vector<double>& cost, const std::vector<double>& p,
                             const std::vector<double>& q, const SinkhornOptions& opt) {
    if (cost.size() != p.size() * q.size())
        throw std::invalid_argument("solve_entropic: cost matrix shape mismatch");
    if (!(opt.epsilon > 0.0)) throw std::invalid_argument("solve_entropic: epsilon must be positive");
    check_measure_pair(p, q);
    std::size_t m = p.size(), n = q.size();

    std::vector<double> logp(m), logq(n);
    for (std::size_t i = 0; i < m; ++i) logp[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;
    for (std::size_t j = 0; j < n; ++j) logq[j] = q[j] > 0.0 ? std::log(q[j]) : kNegInf;

    std::vector<double> f(m, 0.0), g(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (logp[i] == kNegInf) f[i] = kNegInf;
    for (std::size_t j = 0; j < n; ++j)
        if (logq[j] == kNegInf) g[j] = kNegInf;

    std::vector<double> schedule;
    if (opt.epsilon_scaling) {
        for (double e = 10.0 * opt.epsilon; e > opt.epsilon * 1.0001; e *= 0.5)
            schedule.push_back(e);
    }
    schedule.push_back(opt.epsilon);

    std::vector<double> lse, colsum;
    int iters = 0;
    double violation = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
        double eps = schedule[stage];
        bool final_stage = stage + 1 == schedule.size();
        int budget = final_stage ? std::max(1, opt.max_iters - iters)
                                 : std::max(10, opt.max_iters / (4 * static_cast<int>(schedule.size())));
        for (int it = 0; it < budget; ++it) {
            // f-update: rows exact
            sinkhorn_lse(cost, m, n, g, eps, true, lse);
            for (std::size_t i = 0; i < m; ++i)
                f[i] = logp[i] == kNegInf ? kNegInf : eps * (logp[i] - lse[i]);
            // column marginals under current (f, g)
            sinkhorn_lse(cost, m, n, f, eps, false, colsum);
            violation = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double cs = colsum[j] == kNegInf ? 0.0 : std::exp(g[j] / eps + colsum[j]);
                violation += std::abs(cs - q[j]);
            }
            ++iters;
            if (violation < opt.tol) {
                converged = true;
                break;
            }
            // g-update
            for (std::size_t j = 0; j < n; ++j)
                g[j] = logq[j] == kNegInf ? kNegInf : eps * (logq[j] - colsum[j]);
            converged = false;
        }
        if (!final_stage) converged = false;
    }

    TransportPlan plan;
    plan.rows = m;
    plan.cols = n;
    plan.method = TransportPlan::Method::entropic;
    plan.epsilon = opt.epsilon;
    plan.iterations = iters;
    plan.converged = converged;
    plan.marginal_violation = violation;
    plan.potential_source = f;
    plan.potential_target = g;
    double eps = opt.epsilon;
    double cost_total = 0.0;
    if (opt.materialize_plan) plan.matrix.assign(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (f[i] == kNegInf) continue;
        const double* ci = cost.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            if (g[j] == kNegInf) continue;
            double pij = std::exp((f[i] + g[j] - ci[j]) / eps);
            cost_total += pij * ci[j];
            if (opt.materialize_plan) plan.matrix[i * n + j] = pij;
        }
    }
    plan.cost_value = cost_total;
    return plan;
}

TransportPlan solve_entropic(const CostEvaluator& eval, double h, const GridMeasure& source,
                             const GridMeasure& target, const SinkhornOptions& opt) {
    return solve_entropic(cost_matrix(eval, h, source, target), source.weights, target.weights,
                          opt);
}

double wasserstein2_euclidean(const GridMeasure& source, const GridMeasure& target) {
    if (source.dim != target.dim)
        throw std::invalid_argument("wasserstein2_euclidean: dimension mismatch");
    if (source.dim == 1) {
        // monotone (quantile) coupling is optimal for convex costs on the line
        auto sorted_ix = [](const GridMeasure& mu) {
            std::vector<std::size_t> ix(mu.size());
            std::iota(ix.begin(), ix.end(), 0);
            std::sort(ix.begin(), ix.end(),
                      [&](std::size_t a, std::size_t b) { return mu.points[a] < mu.points[b]; });
            return ix;
        };
        std::vector<std::size_t> si = sorted_ix(source), ti = sorted_ix(target);
        double cost = 0.0;
        std::size_t i = 0, j = 0;
        double ri = source.weights[si[0]], rj = target.weights[ti[0]];
        while (i < si.size() && j < ti.size()) {
            double f = std::min(ri, rj);
            double dxy = source.points[si[i]] - target.points[ti[j]];
            cost += f * dxy * dxy;
            ri -= f;
            rj -= f;
            if (ri <= 1e-17 && i + 1 < si.size()) ri = source.weights[si[++i]];
            else if (ri <= 1e-17) ++i;
            if (rj <= 1e-17 && j + 1 < ti.size()) rj = target.weights[ti[++j]];
            else if (rj <= 1e-17) ++j;
        }
        return cost;
    }
    std::size_t m = source.size(), n = target.size();
    std::vector<double> C(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < source.dim; ++k) {
                double dd = source.points[i * source.dim + k] - target.points[j * target.dim + k];
                s += dd * dd;
            }
            C[i * n + j] = s;
        }
    return solve_exact(C, source.weights, target.weights).cost_value;
}

}  // namespace msdflow
