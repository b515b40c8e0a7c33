#include "msdflow/identities.hpp"

#include <stdexcept>

namespace msdflow {

namespace {

std::string entry_diff(const RatMatrix& got, const RatMatrix& want) {
    for (std::size_t i = 0; i < got.rows(); ++i)
        for (std::size_t j = 0; j < got.cols(); ++j)
            if (got.at(i, j) != want.at(i, j))
                return "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                       "): got " + got.at(i, j).to_string() + ", want " +
                       want.at(i, j).to_string();
    return "";
}

void check_equal(IdentityReport& rep, const std::string& name, const RatMatrix& got,
                 const RatMatrix& want) {
    IdentityCheck c{name, got == want, ""};
    if (!c.passed) c.detail = entry_diff(got, want);
    rep.checks.push_back(std::move(c));
}

void check_true(IdentityReport& rep, const std::string& name, bool ok,
                const std::string& detail = "") {
    rep.checks.push_back({name, ok, ok ? "" : detail});
}

}  // namespace

IdentityReport identity_suite(unsigned n, bool corrupt_for_selftest) {
    if (n < 1 || n > 12) throw std::invalid_argument("identity_suite: order out of range");
    IdentityReport rep;
    rep.order = n;

    const RatMatrix A = build_A(n);
    const RatMatrix B = build_B(n);
    const RatMatrix Binv = build_B_inverse_closed(n);
    const LUFactors lu = build_LU(n);
    RatMatrix M = build_M(n);
    if (corrupt_for_selftest) M.at(n - 1, n - 1) += Rational(1, 7);
    const RatMatrix Minv_closed = build_M_inverse_closed(n);
    const RatMatrix I = RatMatrix::identity(n);
    const RatMatrix H0 = build_H0(n);
    const RatMatrix Q = build_Q(n);
    const RatMatrix D = build_D(n);

    check_equal(rep, "B * Binv_closed == I", B * Binv, I);
    check_equal(rep, "L * U == A", lu.L * lu.U, A);
    check_equal(rep, "Uinv * Linv * A == I", lu.Uinv * lu.Linv * A, I);
    check_equal(rep, "A * Binv == closed form for M^{-1}", A * Binv, Minv_closed);
    check_equal(rep, "M * Minv_closed == I", M * Minv_closed, I);
    check_true(rep, "M symmetric", M == M.transpose());
    check_true(rep, "M_{nn} == n^2",
               M.at(n - 1, n - 1) == Rational(static_cast<std::int64_t>(n) * n),
               "M_nn = " + M.at(n - 1, n - 1).to_string());

    // diag(2n-1, 2n-3, ..., 1)
    std::vector<Rational> odd;
    for (unsigned i = 0; i < n; ++i)
        odd.emplace_back(2 * static_cast<std::int64_t>(n) - 1 - 2 * i);
    const RatMatrix odd_diag = RatMatrix::diagonal(odd);

    // T11 and T31 share the entrywise closed form (i-j)/((2n+1-i-j)(n-i)!(n-j)!).
    RatMatrix T_closed(n, n);
    for (unsigned i = 1; i <= n; ++i)
        for (unsigned j = 1; j <= n; ++j)
            T_closed.at(i - 1, j - 1) =
                Rational(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j)) *
                Minv_closed.at(i - 1, j - 1);
    check_equal(rep, "M^{-1} diag(2n-1..1) - H0 == antisymmetric closed form",
                M.inverse() * odd_diag - H0, T_closed);

    const std::vector<Rational> t_samples = {Rational(1), Rational(1, 2), Rational(3)};
    for (const Rational& t : t_samples) {
        const std::string at_t = " at t=" + t.to_string();
        const RatMatrix H1 = build_H1(n, t);
        const RatMatrix H2 = build_H2(n, t);
        const RatMatrix H2p = build_H2_prime(n, t);
        const RatMatrix H2T = H2.transpose();
        const RatMatrix H2Tinv = H2T.inverse();
        const Rational t_2n2 = Rational::pow(t, 2 * static_cast<int>(n) - 2);

        check_equal(rep, "H2 * H == H1" + at_t, H2 * build_H_flow(n, t), H1);
        check_equal(rep, "H2 D H2^T == t^{2(n-1)} H0" + at_t, H2 * D * H2T,
                    H0.scaled(t_2n2));
        check_equal(rep, "(H2^T)^{-1} == closed form" + at_t, H2Tinv,
                    build_H2T_inverse_closed(n, t));

        const RatMatrix K = build_K_closed(n, t);
        const RatMatrix scaled_cross =
            (H2T * M * H1).scaled(Rational::pow(t, 2 - 2 * static_cast<int>(n)));
        check_equal(rep, "K * (t^{2-2n} H2^T M H1) == I" + at_t, K * scaled_cross, I);
        check_equal(rep, "K == t^{2n-2} (H2^T M H1)^{-1}" + at_t,
                    (H2T * M * H1).inverse().scaled(t_2n2), K);

        const RatMatrix diag_lhs = I.scaled(Rational(2 * static_cast<std::int64_t>(n) - 1)) -
                                   (H2Tinv * H2p.transpose()).scaled(t * Rational(2)) +
                                   (H2Tinv * Q * H2T).scaled(t * Rational(2));
        check_equal(rep, "(2n-1)I - 2t(H2^T)^{-1}(H2')^T + 2t(H2^T)^{-1}QH2^T == diag(2n-1..1)" + at_t,
                    diag_lhs, odd_diag);
        check_equal(rep, "A Binv [diag relation] - H0 == antisymmetric closed form" + at_t,
                    Minv_closed * diag_lhs - H0, T_closed);

        RatMatrix T1 = build_T1(n, t);
        RatMatrix T2 = build_T2(n, t);
        RatMatrix T3 = build_T3(n, t);
        if (corrupt_for_selftest) {
            // rebuild with the corrupted M so the fault propagates
            const Rational tp = Rational::pow(t, 2 - 2 * static_cast<int>(n));
            const RatMatrix H1p = build_H1_prime(n, t);
            const RatMatrix MH1 = M * H1;
            T1 = (H1.transpose() * MH1).scaled(Rational(2 * static_cast<std::int64_t>(n) - 1)) -
                 (H1p.transpose() * MH1).scaled(t * Rational(2)) -
                 (H1.transpose() * M * H2 * D * H2T * MH1).scaled(tp);
            T2 = (H2T * MH1).scaled(Rational(1 - 2 * static_cast<std::int64_t>(n))) +
                 (H2p.transpose() * MH1 + H2T * M * H1p).scaled(t) -
                 (Q * H2T * MH1).scaled(t) + H2T * M * H0 * MH1;
            T3 = (H2T * M * H2).scaled(Rational(2 * static_cast<std::int64_t>(n) - 1)) -
                 (H2p.transpose() * M * H2).scaled(t * Rational(2)) +
                 (Q * H2T * M * H2).scaled(t * Rational(2)) -
                 (H2T * M * H2 * D * H2T * M * H2).scaled(tp);
        }
        check_true(rep, "T2 == 0" + at_t, T2.is_zero());
        check_true(rep, "T1 antisymmetric" + at_t, T1.is_antisymmetric());
        check_true(rep, "T3 antisymmetric" + at_t, T3.is_antisymmetric());
        check_true(rep, "Tr(D H2^T M H2) == n^2 t^{2(n-1)}" + at_t,
                   (D * H2T * M * H2).trace() ==
                       Rational(static_cast<std::int64_t>(n) * n) * t_2n2,
                   "trace = " + (D * H2T * M * H2).trace().to_string());
    }

    // Appendix combinatorial identities, exact over a grid of parameters.
    {
        bool ok = true;
        std::string detail;
        for (unsigned N : {n, 2 * n}) {
            for (unsigned k = 0; k < N && ok; ++k) {
                BigInt lhs(0);
                for (unsigned j = 0; j <= k; ++j) {
                    BigInt term = BigInt::binomial(N, j);
                    lhs += (j % 2 == 0) ? term : -term;
                }
                BigInt rhs = BigInt::binomial(N - 1, k);
                if (k % 2 == 1) rhs = -rhs;
                if (lhs != rhs) {
                    ok = false;
                    detail = "N=" + std::to_string(N) + " k=" + std::to_string(k);
                }
            }
        }
        check_true(rep, "alternating binomial sum == (-1)^k C(N-1,k)", ok, detail);
    }
    {
        bool ok = true;
        std::string detail;
        for (unsigned j = 1; j <= n && ok; ++j) {
            for (unsigned k = j; k <= n + 1 && ok; ++k) {
                if (k - j > n) continue;
                Rational lhs;
                for (unsigned i = 1; i <= j; ++i) {
                    if (n + i < k) continue;  // factorial argument would be negative
                    Rational term(BigInt::factorial(n + i - 1),
                                  BigInt::factorial(i - 1) * BigInt::factorial(j - i) *
                                      BigInt::factorial(n + i - k));
                    lhs += ((i + j) % 2 == 0) ? term : -term;
                }
                Rational rhs(BigInt::binomial(k - 1, j - 1) * BigInt::factorial(n),
                             BigInt::factorial(n - (k - j)));
                if (lhs != rhs) {
                    ok = false;
                    detail = "j=" + std::to_string(j) + " k=" + std::to_string(k);
                }
            }
        }
        check_true(rep, "factorial-ratio identity behind M_{nn}", ok, detail);
    }

    return rep;
}

}  // namespace msdflow
