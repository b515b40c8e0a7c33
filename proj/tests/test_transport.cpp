#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "msdflow/transport.hpp"
#include "oracle.hpp"

using namespace msdflow;
using msdflow::testing::random_state;

namespace {

GridMeasure cloud(std::mt19937_64& rng, std::size_t count, std::size_t dim, bool uniform) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> pts(count * dim), wts(count);
    for (double& p : pts) p = g(rng);
    if (uniform) {
        std::fill(wts.begin(), wts.end(), 1.0 / count);
    } else {
        std::uniform_real_distribution<double> u(0.2, 1.0);
        for (double& w : wts) w = u(rng);
    }
    return GridMeasure::from_points(dim, std::move(pts), std::move(wts));
}

double brute_force_assignment(const std::vector<double>& C, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += C[i * n + perm[i]];
        best = std::min(best, c / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// random marginal-preserving rebalancing moves applied to the independent
// coupling produce arbitrary feasible competitors
std::vector<double> random_feasible_plan(std::mt19937_64& rng, const std::vector<double>& p,
                                         const std::vector<double>& q) {
    std::size_t m = p.size(), n = q.size();
    std::vector<double> plan(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) plan[i * n + j] = p[i] * q[j];
    std::uniform_int_distribution<std::size_t> ri(0, m - 1), rj(0, n - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int moves = 0; moves < 200; ++moves) {
        std::size_t i1 = ri(rng), i2 = ri(rng), j1 = rj(rng), j2 = rj(rng);
        if (i1 == i2 || j1 == j2) continue;
        double cap = std::min(plan[i1 * n + j2], plan[i2 * n + j1]);
        double delta = u(rng) * cap;
        plan[i1 * n + j1] += delta;
        plan[i2 * n + j2] += delta;
        plan[i1 * n + j2] -= delta;
        plan[i2 * n + j1] -= delta;
    }
    return plan;
}

}  // namespace

TEST_CASE("cost matrix entries through the evaluator") {
    std::mt19937_64 rng(51);
    CostEvaluator e1(1, 1);
    GridMeasure a = cloud(rng, 4, 1, true), b = cloud(rng, 5, 1, false);
    auto C = cost_matrix(e1, 0.7, a, b);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double dd = a.points[i] - b.points[j];
            CHECK(C[i * 5 + j] == doctest::Approx(dd * dd).epsilon(1e-12));
        }

    // single-point measures give a 1x1 matrix
    GridMeasure s = GridMeasure::from_points(2, {0.1, 0.2}, {1.0});
    GridMeasure t = GridMeasure::from_points(2, {0.4, -0.3}, {1.0});
    CostEvaluator e2(2, 1);
    auto C1 = cost_matrix(e2, 0.5, s, t);
    CHECK(C1.size() == 1);
    CHECK(C1[0] == doctest::Approx(e2.cost(0.5, {0.1, 0.2}, {0.4, -0.3})));

    // order-two diagonal entries pay for the velocity drift: 12 |x2|^2
    GridMeasure z = GridMeasure::from_points(2, {0.3, 0.8}, {1.0});
    auto C2 = cost_matrix(e2, 0.25, z, z);
    CHECK(C2[0] == doctest::Approx(12.0 * 0.8 * 0.8).epsilon(1e-10));
}

TEST_CASE("exact solver: degenerate and tiny instances") {
    // single Dirac to itself
    TransportPlan p = solve_exact({3.25}, {1.0}, {1.0});
    CHECK(p.matrix[0] == doctest::Approx(1.0));
    CHECK(p.cost_value == doctest::Approx(3.25));

    // two-point uniform, zero-cost diagonal
    std::vector<double> C{0.0, 1.0, 1.0, 0.0};
    TransportPlan q = solve_exact(C, {0.5, 0.5}, {0.5, 0.5});
    CHECK(q.cost_value == doctest::Approx(0.0));
    CHECK(q.matrix[0] == doctest::Approx(0.5));
    CHECK(q.matrix[3] == doctest::Approx(0.5));
}

TEST_CASE("exact solver matches permutation enumeration on 5x5") {
    std::mt19937_64 rng(53);
    for (unsigned n : {1u, 2u}) {
        CostEvaluator eval(n, 1);
        for (int rep = 0; rep < 20; ++rep) {
            GridMeasure a = cloud(rng, 5, n, true), b = cloud(rng, 5, n, true);
            auto C = cost_matrix(eval, 0.5, a, b);
            TransportPlan plan = solve_exact(C, a.weights, b.weights);
            double brute = brute_force_assignment(C, 5);
            CHECK(plan.cost_value == doctest::Approx(brute).epsilon(1e-10));
            CHECK(plan.check_marginals(a.weights, b.weights) < 1e-8);
        }
    }
}

TEST_CASE("exact solver dominates random feasible plans") {
    std::mt19937_64 rng(59);
    CostEvaluator eval(2, 1);
    GridMeasure a = cloud(rng, 8, 2, false), b = cloud(rng, 9, 2, false);
    auto C = cost_matrix(eval, 0.8, a, b);
    TransportPlan plan = solve_exact(C, a.weights, b.weights);
    for (int rep = 0; rep < 100; ++rep) {
        auto feasible = random_feasible_plan(rng, a.weights, b.weights);
        double cost = 0.0;
        for (std::size_t k = 0; k < C.size(); ++k) cost += feasible[k] * C[k];
        CHECK(plan.cost_value <= cost + 1e-10);
    }
}

TEST_CASE("exact solver refuses oversized instances and broken marginals") {
    std::vector<double> C(4, 1.0);
    CHECK_THROWS_AS(solve_exact(C, {0.7, 0.2}, {0.5, 0.5}), std::invalid_argument);
    std::vector<double> big(101 * 101, 1.0);
    std::vector<double> w(101, 1.0 / 101);
    CHECK_THROWS_AS(solve_exact(big, w, w), std::invalid_argument);
}

TEST_CASE("label permutation leaves the optimal cost unchanged") {
    std::mt19937_64 rng(61);
    CostEvaluator eval(1, 1);
    GridMeasure a = cloud(rng, 6, 1, false), b = cloud(rng, 6, 1, false);
    auto C = cost_matrix(eval, 1.0, a, b);
    double base = solve_exact(C, a.weights, b.weights).cost_value;

    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    GridMeasure ap = a;
    for (std::size_t i = 0; i < 6; ++i) {
        ap.points[i] = a.points[perm[i]];
        ap.weights[i] = a.weights[perm[i]];
    }
    auto Cp = cost_matrix(eval, 1.0, ap, b);
    CHECK(solve_exact(Cp, ap.weights, b.weights).cost_value ==
          doctest::Approx(base).epsilon(1e-11));
}

TEST_CASE("entropic solver approaches the exact cost as epsilon shrinks") {
    std::mt19937_64 rng(67);
    for (unsigned n : {1u, 2u}) {
        CostEvaluator eval(n, 1);
        GridMeasure a = cloud(rng, 5, n, true), b = cloud(rng, 5, n, true);
        auto C = cost_matrix(eval, 0.5, a, b);
        double exact = solve_exact(C, a.weights, b.weights).cost_value;

        std::vector<double> Csorted = C;
        std::sort(Csorted.begin(), Csorted.end());
        double median = Csorted[Csorted.size() / 2];

        double prev_cost = std::numeric_limits<double>::infinity();
        for (double scale : {1.0, 0.1, 0.01, 1e-3}) {
            SinkhornOptions opt;
            opt.epsilon = scale * median;
            opt.tol = 1e-6;
            TransportPlan plan = solve_entropic(C, a.weights, b.weights, opt);
            CHECK(plan.converged);
            CHECK(plan.marginal_violation < 1e-6);
            // decreasing toward the exact value (within solver slack)
            CHECK(plan.cost_value <= prev_cost * (1.0 + 1e-6) + 1e-12);
            prev_cost = plan.cost_value;
            if (scale == 1e-3) {
                CHECK(std::abs(plan.cost_value - exact) <= 0.01 * std::max(exact, 1e-30));
            }
        }
    }
}

TEST_CASE("entropic plan concentrates on the diagonal for identical measures") {
    std::mt19937_64 rng(71);
    CostEvaluator eval(1, 1);
    GridMeasure a = cloud(rng, 6, 1, false);
    auto C = cost_matrix(eval, 1.0, a, a);
    SinkhornOptions opt;
    opt.epsilon = 1e-4;
    TransportPlan plan = solve_entropic(C, a.weights, a.weights, opt);
    double off_diag = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (i != j) off_diag += plan.at(i, j);
    CHECK(off_diag < 1e-6);
    CHECK(plan.cost_value < 1e-6);
}

TEST_CASE("entropic non-convergence is reported, not thrown") {
    std::mt19937_64 rng(73);
    CostEvaluator eval(1, 1);
    GridMeasure a = cloud(rng, 5, 1, false), b = cloud(rng, 5, 1, false);
    auto C = cost_matrix(eval, 1.0, a, b);
    SinkhornOptions opt;
    opt.epsilon = 1e-5;
    opt.max_iters = 3;  // deliberately starved
    opt.epsilon_scaling = false;
    TransportPlan plan = solve_entropic(C, a.weights, b.weights, opt);
    CHECK_FALSE(plan.converged);
    CHECK(plan.matrix.size() == 25);
    CHECK(plan.marginal_violation > 0.0);
}

TEST_CASE("squared-euclidean transport distance") {
    // Diracs at distance |x - y|
    GridMeasure dx = GridMeasure::from_points(2, {0.0, 0.0}, {1.0});
    GridMeasure dy = GridMeasure::from_points(2, {3.0, 4.0}, {1.0});
    CHECK(wasserstein2_euclidean(dx, dy) == doctest::Approx(25.0));

    // identical measures
    std::mt19937_64 rng(79);
    GridMeasure a = cloud(rng, 12, 1, false);
    CHECK(wasserstein2_euclidean(a, a) == doctest::Approx(0.0).epsilon(1e-12));

    // 1-d sorting shortcut agrees with the LP on small instances
    for (int rep = 0; rep < 10; ++rep) {
        GridMeasure s = cloud(rng, 7, 1, false), t = cloud(rng, 9, 1, false);
        double sorted_val = wasserstein2_euclidean(s, t);
        std::vector<double> C(7 * 9);
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = 0; j < 9; ++j) {
                double dd = s.points[i] - t.points[j];
                C[i * 9 + j] = dd * dd;
            }
        double lp_val = solve_exact(C, s.weights, t.weights).cost_value;
        CHECK(sorted_val == doctest::Approx(lp_val).epsilon(1e-9));
    }

    // two-point monotone coupling in closed form
    GridMeasure u = GridMeasure::from_points(1, {0.0, 1.0}, {0.5, 0.5});
    GridMeasure v = GridMeasure::from_points(1, {2.0, 5.0}, {0.5, 0.5});
    CHECK(wasserstein2_euclidean(u, v) == doctest::Approx(0.5 * 4.0 + 0.5 * 16.0));
}
