#include <doctest.h>

#include <stdexcept>

#include "msdflow/identities.hpp"
#include "msdflow/matrices.hpp"
#include "msdflow/rational.hpp"

using namespace msdflow;

namespace {

Rational rat(std::int64_t num, std::int64_t den = 1) { return Rational(num, den); }

RatMatrix from_rows(const std::vector<std::vector<Rational>>& rows) {
    RatMatrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[0].size(); ++j) m.at(i, j) = rows[i][j];
    return m;
}

}  // namespace

TEST_CASE("bigint arithmetic round trips through strings") {
    BigInt a = BigInt::from_string("123456789012345678901234567890");
    BigInt b = BigInt::from_string("-98765432109876543210");
    CHECK(a.to_string() == "123456789012345678901234567890");
    CHECK((a * b).to_string() == "-12193263113702179522496570642237463801111263526900");
    CHECK((a + b).to_string() == "123456788913580246791358024680");
    CHECK((a / b).to_string() == "-1249999988");
    CHECK(BigInt::factorial(25).to_string() == "15511210043330985984000000");
    CHECK(BigInt::binomial(52, 26).to_string() == "495918532948104");
    CHECK(BigInt::gcd(BigInt::factorial(20), BigInt::factorial(15)) == BigInt::factorial(15));
}

TEST_CASE("bigint to_double handles huge magnitudes") {
    BigInt f40 = BigInt::factorial(40);
    CHECK(f40.to_double() == doctest::Approx(8.159152832478977e47).epsilon(1e-14));
    Rational r(BigInt::factorial(60), BigInt::factorial(59));
    CHECK(r.to_double() == doctest::Approx(60.0));
}

TEST_CASE("rational arithmetic stays in lowest terms") {
    Rational a(6, 4);
    CHECK(a.num() == BigInt(3));
    CHECK(a.den() == BigInt(2));
    Rational b(-10, 15);
    CHECK(b.to_string() == "-2/3");
    CHECK((a + b).to_string() == "5/6");
    CHECK((a * b).to_string() == "-1");
    CHECK((a / b).to_string() == "-9/4");
    CHECK(Rational::pow(Rational(1, 2), -3).to_string() == "8");
    CHECK(a - a == Rational(0));
}

TEST_CASE("matrix A matches the displayed falling-factorial rows") {
    CHECK(build_A(1) == from_rows({{rat(1)}}));
    CHECK(build_A(2) == from_rows({{rat(1), rat(1)}, {rat(2), rat(3)}}));
    CHECK(build_A(3) ==
          from_rows({{rat(1), rat(1), rat(1)}, {rat(3), rat(4), rat(5)}, {rat(6), rat(12), rat(20)}}));
}

TEST_CASE("matrix B and its closed-form inverse") {
    CHECK(build_B(1) == from_rows({{rat(1)}}));
    CHECK(build_B(2) == from_rows({{rat(0), rat(-6)}, {rat(2), rat(6)}}));
    CHECK(build_B_inverse_closed(2) ==
          from_rows({{rat(1, 2), rat(1, 2)}, {rat(-1, 6), rat(0)}}));
    for (unsigned n : {1u, 2u, 3u, 5u, 8u}) {
        CAPTURE(n);
        CHECK((build_B(n) * build_B_inverse_closed(n)).is_identity());
        // anti-triangular zero block
        RatMatrix b = build_B(n);
        for (unsigned k = 1; k <= n; ++k)
            for (unsigned i = 1; i <= n; ++i)
                if (k + i < n + 1) CHECK(b.at(k - 1, i - 1).is_zero());
    }
}

TEST_CASE("LU closed forms multiply back to A") {
    LUFactors f2 = build_LU(2);
    CHECK(f2.U == from_rows({{rat(1), rat(1)}, {rat(0), rat(1)}}));
    CHECK(f2.L == from_rows({{rat(1), rat(0)}, {rat(2), rat(1)}}));
    CHECK(f2.L * f2.U == build_A(2));
    for (unsigned n = 1; n <= 10; ++n) {
        CAPTURE(n);
        LUFactors f = build_LU(n);
        CHECK(f.L * f.U == build_A(n));
        CHECK((f.Uinv * f.Linv * build_A(n)).is_identity());
        CHECK((f.L * f.Linv).is_identity());
        CHECK((f.U * f.Uinv).is_identity());
    }
}

TEST_CASE("M = B A^{-1} with its closed-form inverse") {
    CHECK(build_M(1) == from_rows({{rat(1)}}));
    CHECK(build_M(2) == from_rows({{rat(12), rat(-6)}, {rat(-6), rat(4)}}));
    for (unsigned n = 1; n <= 10; ++n) {
        CAPTURE(n);
        RatMatrix m = build_M(n);
        CHECK(m.at(n - 1, n - 1) == rat(static_cast<std::int64_t>(n) * n));
        CHECK((m * build_M_inverse_closed(n)).is_identity());
        CHECK(m == m.transpose());
    }
}

TEST_CASE("order bounds are enforced") {
    CHECK_THROWS_AS(build_A(0), std::invalid_argument);
    CHECK_THROWS_AS(build_A(65), std::invalid_argument);
    CHECK_THROWS_AS(identity_suite(13), std::invalid_argument);
}

TEST_CASE("identity suite passes exactly for n up to 6") {
    for (unsigned n = 1; n <= 6; ++n) {
        IdentityReport rep = identity_suite(n);
        CAPTURE(n);
        for (const auto& c : rep.checks) {
            CAPTURE(c.name);
            CAPTURE(c.detail);
            CHECK(c.passed);
        }
    }
}

TEST_CASE("identity suite detects an injected fault") {
    IdentityReport rep = identity_suite(4, /*corrupt_for_selftest=*/true);
    CHECK_FALSE(rep.all_passed());
}

TEST_CASE("K closed form inverts the scaled cross matrix at big order") {
    // spot-check the heavier orders the acceptance gate will sweep
    for (unsigned n : {8u, 10u}) {
        const Rational t(1, 2);
        RatMatrix cross = build_H2(n, t).transpose() * build_M(n) * build_H1(n, t);
        RatMatrix scaled = cross.scaled(Rational::pow(t, 2 - 2 * static_cast<int>(n)));
        CHECK((build_K_closed(n, t) * scaled).is_identity());
    }
}
