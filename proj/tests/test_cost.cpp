#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "msdflow/cost.hpp"
#include "oracle.hpp"

using namespace msdflow;
using msdflow::testing::polynomial_min_cost;
using msdflow::testing::random_state;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

// sign flip of the even-indexed derivative blocks, the time-reversal map
std::vector<double> flip_even_blocks(const std::vector<double>& v, unsigned n, unsigned d) {
    std::vector<double> r = v;
    for (unsigned i = 2; i <= n; i += 2)
        for (unsigned c = 0; c < d; ++c) r[(i - 1) * d + c] = -r[(i - 1) * d + c];
    return r;
}

}  // namespace

TEST_CASE("assemble_b matches the displayed formula") {
    CostEvaluator e1(1, 1);
    CHECK(e1.assemble_b(2.5, {0.75}, {-0.5})[0] == doctest::Approx(-1.25));

    CostEvaluator e2(2, 1);
    auto b = e2.assemble_b(1.0, {0.0, 1.0}, {1.0, 1.0});
    CHECK(b[0] == doctest::Approx(0.0));
    CHECK(b[1] == doctest::Approx(0.0));

    // n=3: compare against the elementwise sum formula
    CostEvaluator e3(3, 2);
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        double t = 0.3 + 2.0 * (rep / 20.0);
        auto x = random_state(rng, 3, 2), y = random_state(rng, 3, 2);
        auto got = e3.assemble_b(t, x, y);
        for (unsigned i = 1; i <= 3; ++i) {
            for (unsigned c = 0; c < 2; ++c) {
                double inner = y[(i - 1) * 2 + c];
                double fact = 1.0;
                for (unsigned j = i; j <= 3; ++j) {
                    if (j > i) fact *= (j - i);
                    inner -= std::pow(t, static_cast<int>(j - i)) / fact * x[(j - 1) * 2 + c];
                }
                double want = std::pow(t, static_cast<int>(i) - 1) * inner;
                CHECK(got[(i - 1) * 2 + c] == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("cost reduces to |y-x|^2 at order one") {
    CostEvaluator e(1, 3);
    std::mt19937_64 rng(11);
    for (double t : {0.05, 1.0, 7.5}) {
        auto x = random_state(rng, 1, 3), y = random_state(rng, 1, 3);
        double want = 0.0;
        for (int c = 0; c < 3; ++c) want += (y[c] - x[c]) * (y[c] - x[c]);
        CHECK(rel_err(e.cost(t, x, y), want) < 1e-13);
    }
}

TEST_CASE("free flow is the zero-cost image") {
    std::mt19937_64 rng(13);
    for (unsigned n = 1; n <= 5; ++n) {
        CostEvaluator e(n, 1);
        for (double t : {0.2, 1.0, 3.0}) {
            auto x = random_state(rng, n, 1);
            auto y = e.freeflow(t, x);
            CHECK(std::abs(e.cost(t, x, y)) < 1e-10);
        }
    }
}

TEST_CASE("cost matches the polynomial minimization oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> tdist(0.1, 5.0);
    for (unsigned n : {2u, 3u, 4u, 5u}) {
        CostEvaluator e(n, 1);
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            double t = tdist(rng);
            auto x = random_state(rng, n, 1), y = random_state(rng, n, 1);
            double got = e.cost(t, x, y);
            double want = polynomial_min_cost(n, 1, t, x, y);
            worst = std::max(worst, rel_err(got, want));
        }
        CAPTURE(n);
        CHECK(worst < 1e-9);
    }
    // d > 1 separates across components
    CostEvaluator e32(3, 2);
    for (int rep = 0; rep < 10; ++rep) {
        double t = tdist(rng);
        auto x = random_state(rng, 3, 2), y = random_state(rng, 3, 2);
        CHECK(rel_err(e32.cost(t, x, y), polynomial_min_cost(3, 2, t, x, y)) < 1e-9);
    }
}

TEST_CASE("informational: published order-two kernel cost, by coordinate grouping" *
          doctest::may_fail()) {
    // The published two-derivative cost reads |y2-y1|^2 + 12|(x2-x1)/t - (y1+y2)/2|^2
    // with positions grouped in x and velocities grouped in y. Under that
    // grouping it matches the matrix cost; under the (state at 0, state at t)
    // pairing used everywhere else it does not, which is why the matrix
    // formula is the contract and this stays a non-gating comparison.
    CostEvaluator e(2, 1);
    std::mt19937_64 rng(97);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        double t = 0.3 + 0.1 * rep;
        double p0 = g(rng), v0 = g(rng), pt = g(rng), vt = g(rng);
        double grouped = (vt - v0) * (vt - v0) +
                         12.0 * std::pow((pt - p0) / t - (v0 + vt) / 2.0, 2);
        double matrix_cost = e.cost(t, {p0, v0}, {pt, vt});
        CHECK(grouped == doctest::Approx(matrix_cost).epsilon(1e-10));

        double literal = (vt - pt) * (vt - pt) +
                         12.0 * std::pow((v0 - p0) / t - (pt + vt) / 2.0, 2);
        WARN(literal == doctest::Approx(matrix_cost).epsilon(1e-10));
    }
}

TEST_CASE("oracle agreement holds over the wide time range at low order") {
    std::mt19937_64 rng(101);
    for (unsigned n : {2u, 3u}) {
        CostEvaluator e(n, 1);
        for (double t : {1e-2, 0.1, 1.0, 10.0}) {
            for (int rep = 0; rep < 10; ++rep) {
                auto x = random_state(rng, n, 1), y = random_state(rng, n, 1);
                double got = e.cost(t, x, y);
                double want = polynomial_min_cost(n, 1, t, x, y);
                CHECK(rel_err(got, want) < 1e-9);
            }
        }
    }
}

TEST_CASE("cost is nonnegative and vanishes only on the free flow") {
    std::mt19937_64 rng(19);
    CostEvaluator e(3, 1);
    for (int rep = 0; rep < 200; ++rep) {
        double t = 0.2 + 2.0 * (rep / 200.0);
        auto x = random_state(rng, 3, 1), y = random_state(rng, 3, 1);
        double c = e.cost(t, x, y);
        CHECK(c >= -1e-12);
        auto b = e.assemble_b(t, x, y);
        double bn = 0.0;
        for (double v : b) bn += v * v;
        if (c < 1e-14) CHECK(bn < 1e-10);
        if (bn > 1e-6) CHECK(c > 0.0);
    }
}

TEST_CASE("time reversal with even-block sign flips preserves the cost") {
    std::mt19937_64 rng(23);
    for (unsigned n : {2u, 3u, 4u}) {
        CostEvaluator e(n, 1);
        for (int rep = 0; rep < 50; ++rep) {
            double t = 0.3 + 2.4 * (rep / 50.0);
            auto x = random_state(rng, n, 1), y = random_state(rng, n, 1);
            double direct = e.cost(t, x, y);
            double reversed = e.cost(t, flip_even_blocks(y, n, 1), flip_even_blocks(x, n, 1));
            CHECK(rel_err(reversed, direct) < 1e-10);
            // also confirmed through the oracle, independent of the matrices
            double oracle_rev = polynomial_min_cost(
                n, 1, t, flip_even_blocks(y, n, 1), flip_even_blocks(x, n, 1));
            CHECK(rel_err(oracle_rev, direct) < 1e-8);
        }
    }
}

TEST_CASE("gradients: closed form at order one and finite differences beyond") {
    CostEvaluator e1(1, 2);
    std::mt19937_64 rng(29);
    auto x1 = random_state(rng, 1, 2), y1 = random_state(rng, 1, 2);
    auto gx = e1.cost_grad_x(0.7, x1, y1);
    auto gy = e1.cost_grad_y(0.7, x1, y1);
    for (int c = 0; c < 2; ++c) {
        CHECK(gx[c] == doctest::Approx(2.0 * (x1[c] - y1[c])));
        CHECK(gy[c] == doctest::Approx(2.0 * (y1[c] - x1[c])));
    }

    for (unsigned n : {2u, 3u}) {
        CostEvaluator e(n, 1);
        for (int rep = 0; rep < 20; ++rep) {
            double t = 0.4 + 2.0 * (rep / 20.0);
            auto x = random_state(rng, n, 1), y = random_state(rng, n, 1);
            auto gradx = e.cost_grad_x(t, x, y);
            auto grady = e.cost_grad_y(t, x, y);
            double scale = 1.0;
            for (double v : x) scale = std::max(scale, std::abs(v));
            double step = 1e-5 * scale;
            for (std::size_t k = 0; k < x.size(); ++k) {
                auto xp = x, xm = x;
                xp[k] += step;
                xm[k] -= step;
                double fd = (e.cost(t, xp, y) - e.cost(t, xm, y)) / (2 * step);
                CHECK(std::abs(gradx[k] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
                auto yp = y, ym = y;
                yp[k] += step;
                ym[k] -= step;
                fd = (e.cost(t, x, yp) - e.cost(t, x, ym)) / (2 * step);
                CHECK(std::abs(grady[k] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("grad_y vanishes on the free flow") {
    std::mt19937_64 rng(31);
    CostEvaluator e(4, 1);
    auto x = random_state(rng, 4, 1);
    auto y = e.freeflow(1.3, x);
    for (double g : e.cost_grad_y(1.3, x, y)) CHECK(std::abs(g) < 1e-9);
}

TEST_CASE("time derivative: zero at order one, finite differences beyond") {
    CostEvaluator e1(1, 1);
    CHECK(e1.cost_dt(0.9, {0.3}, {-1.2}) == doctest::Approx(0.0));

    std::mt19937_64 rng(37);
    CostEvaluator e2(2, 1);
    for (int rep = 0; rep < 20; ++rep) {
        double t = 0.5 + 2.0 * (rep / 20.0);
        auto x = random_state(rng, 2, 1), y = random_state(rng, 2, 1);
        double dt = 1e-5 * t;
        double fd = (e2.cost(t + dt, x, y) - e2.cost(t - dt, x, y)) / (2 * dt);
        CHECK(std::abs(e2.cost_dt(t, x, y) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("the x_n Laplacian is the constant 2 d n^2") {
    for (unsigned n : {1u, 2u, 3u, 5u}) {
        for (unsigned d : {1u, 2u}) {
            CostEvaluator e(n, d);
            for (double t : {0.3, 1.0, 2.7}) {
                CHECK(rel_err(e.cost_laplacian_xn(t), 2.0 * d * n * n) < 1e-11);
            }
        }
    }
}

TEST_CASE("closed forms satisfy the cost PDE") {
    // order one: both sides vanish termwise
    CostEvaluator e1(1, 1);
    CHECK(std::abs(e1.verify_cost_pde(0.8, {0.5}, {-0.25})) < 1e-12);

    // fixed spot from the contract
    CostEvaluator e2(2, 1);
    CHECK(std::abs(e2.verify_cost_pde(1.0, {0.0, 1.0}, {1.0, 0.0})) < 1e-8);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> tdist(0.2, 3.0);
    for (unsigned n : {2u, 3u, 4u, 5u}) {
        CostEvaluator e(n, 1);
        double worst = 0.0;
        for (int rep = 0; rep < 250; ++rep) {
            double t = tdist(rng);
            auto x = random_state(rng, n, 1), y = random_state(rng, n, 1);
            double res = e.verify_cost_pde(t, x, y);
            double tol = 1e-8 * (1.0 + std::abs(e.cost(t, x, y)) / t);
            worst = std::max(worst, std::abs(res) / tol);
        }
        CAPTURE(n);
        CHECK(worst < 1.0);
    }
}

TEST_CASE("comparability constant validates on random samples") {
    std::mt19937_64 rng(43);
    for (unsigned n : {1u, 2u, 3u}) {
        CostEvaluator e(n, 1);
        double tmax = 1.0;
        double K = e.comparability_constant(tmax);
        CHECK(K > 0.0);
        std::uniform_real_distribution<double> tdist(1e-3, tmax);
        int violations = 0;
        for (int rep = 0; rep < 10000; ++rep) {
            double t = tdist(rng);
            auto x = random_state(rng, n, 1, 2.0), y = random_state(rng, n, 1, 2.0);
            double lhs = 0.0, nx = 0.0, ny = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                lhs += (y[k] - x[k]) * (y[k] - x[k]);
                nx += x[k] * x[k];
                ny += y[k] * y[k];
            }
            double rhs = K * (e.cost(t, x, y) + t * t * (nx + ny));
            if (lhs > rhs * (1.0 + 1e-12)) ++violations;
        }
        CAPTURE(n);
        CHECK(violations == 0);
    }
    // order one: the inequality already holds with K = 1
    CostEvaluator e1(1, 1);
    CHECK(e1.comparability_constant(1.0) >= 1.0);
}

TEST_CASE("degenerate comparability case reads zero on both sides") {
    CostEvaluator e(2, 1);
    std::vector<double> zero{0.0, 0.0};
    CHECK(e.cost(1.0, zero, zero) == doctest::Approx(0.0));
}

TEST_CASE("argument validation") {
    CostEvaluator e(2, 1);
    std::vector<double> ok{0.0, 0.0};
    CHECK_THROWS_AS(e.cost(0.0, ok, ok), std::invalid_argument);
    CHECK_THROWS_AS(e.cost(-1.0, ok, ok), std::invalid_argument);
    CHECK_THROWS_AS(e.cost(1.0, {0.0}, ok), std::invalid_argument);
    CHECK_THROWS_AS(e.comparability_constant(0.0), std::invalid_argument);
    CHECK_THROWS_AS(BoundaryState(2, 1, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(BoundaryState(2, 1, {1.0, std::nan("")}), std::invalid_argument);
}
