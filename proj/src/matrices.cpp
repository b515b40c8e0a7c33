#include "msdflow/matrices.hpp"

#include <stdexcept>

namespace msdflow {

namespace {

Rational rat_factorial(unsigned k) { return Rational(BigInt::factorial(k), BigInt(1)); }

Rational inv_factorial(unsigned k) { return Rational(BigInt(1), BigInt::factorial(k)); }

int parity_sign(unsigned k) { return (k % 2 == 0) ? 1 : -1; }

}  // namespace

void check_order(unsigned n) {
    if (n < 1 || n > kMaxOrder) throw std::invalid_argument("order out of range");
}

RatMatrix build_A(unsigned n) {
    check_order(n);
    RatMatrix a(n, n);
    for (unsigned k = 0; k < n; ++k) {
        BigInt kf = BigInt::factorial(k);
        for (unsigned i = 1; i <= n; ++i) {
            a.at(k, i - 1) = Rational(kf * BigInt::binomial(n + i - 1, k), BigInt(1));
        }
    }
    return a;
}

RatMatrix build_B(unsigned n) {
    check_order(n);
    RatMatrix b(n, n);
    for (unsigned k = 1; k <= n; ++k) {
        for (unsigned i = 1; i <= n; ++i) {
            if (k + i < n + 1) continue;
            BigInt v = BigInt::factorial(n + i - 1) / BigInt::factorial(k + i - n - 1);
            if (parity_sign(n - k) < 0) v = -v;
            b.at(k - 1, i - 1) = Rational(v, BigInt(1));
        }
    }
    return b;
}

RatMatrix build_B_inverse_closed(unsigned n) {
    check_order(n);
    RatMatrix binv(n, n);
    for (unsigned k = 1; k <= n; ++k) {
        for (unsigned i = 1; i <= n; ++i) {
            if (k + i > n + 1) continue;
            BigInt den = BigInt::factorial(n + k - 1) * BigInt::factorial(n + 1 - k - i);
            binv.at(k - 1, i - 1) = Rational(BigInt(parity_sign(k - 1)), den);
        }
    }
    return binv;
}

LUFactors build_LU(unsigned n) {
    check_order(n);
    LUFactors f{RatMatrix(n, n), RatMatrix(n, n), RatMatrix(n, n), RatMatrix(n, n)};
    for (unsigned i = 1; i <= n; ++i) {
        for (unsigned j = 1; j <= n; ++j) {
            if (j >= i) {
                f.U.at(i - 1, j - 1) =
                    Rational(BigInt::factorial(j - 1) / BigInt::factorial(j - i), BigInt(1));
                f.Uinv.at(i - 1, j - 1) = Rational(
                    BigInt(parity_sign(i + j)),
                    BigInt::factorial(i - 1) * BigInt::factorial(j - i));
            }
        }
    }
    for (unsigned k = 1; k <= n; ++k) {
        for (unsigned j = 1; j <= k; ++j) {
            f.L.at(k - 1, j - 1) = Rational(
                BigInt::binomial(k - 1, j - 1) * BigInt::factorial(n),
                BigInt::factorial(n - k + j));
        }
    }
    for (unsigned j = 1; j <= n; ++j) {
        for (unsigned i = 1; i <= j; ++i) {
            BigInt v = BigInt::factorial(j - 1) * BigInt::binomial(n + j - i - 1, j - i);
            if (parity_sign(j - i) < 0) v = -v;
            f.Linv.at(j - 1, i - 1) = Rational(v, BigInt::factorial(i - 1));
        }
    }
    return f;
}

RatMatrix build_M(unsigned n) {
    check_order(n);
    LUFactors f = build_LU(n);
    return build_B(n) * f.Uinv * f.Linv;
}

RatMatrix build_M_inverse_closed(unsigned n) {
    check_order(n);
    RatMatrix m(n, n);
    for (unsigned i = 1; i <= n; ++i) {
        for (unsigned j = 1; j <= n; ++j) {
            BigInt den = BigInt(2 * static_cast<std::int64_t>(n) + 1 - i - j) *
                         BigInt::factorial(n - i) * BigInt::factorial(n - j);
            m.at(i - 1, j - 1) = Rational(BigInt(1), den);
        }
    }
    return m;
}

RatMatrix build_H1(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix h(n, n);
    for (unsigned i = 1; i <= n; ++i) h.at(i - 1, i - 1) = Rational::pow(t, static_cast<int>(i) - 1);
    return h;
}

RatMatrix build_H1_prime(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix h(n, n);
    for (unsigned i = 2; i <= n; ++i)
        h.at(i - 1, i - 1) = Rational(static_cast<std::int64_t>(i) - 1) *
                             Rational::pow(t, static_cast<int>(i) - 2);
    return h;
}

RatMatrix build_H2(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix h(n, n);
    for (unsigned i = 1; i <= n; ++i)
        for (unsigned j = i; j <= n; ++j)
            h.at(i - 1, j - 1) = Rational::pow(t, static_cast<int>(j) - 1) * inv_factorial(j - i);
    return h;
}

RatMatrix build_H2_prime(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix h(n, n);
    for (unsigned i = 1; i <= n; ++i) {
        for (unsigned j = i; j <= n; ++j) {
            if (j == 1) continue;  // entry is the constant 1
            h.at(i - 1, j - 1) = Rational(static_cast<std::int64_t>(j) - 1) *
                                 Rational::pow(t, static_cast<int>(j) - 2) * inv_factorial(j - i);
        }
    }
    return h;
}

RatMatrix build_Q(unsigned n) {
    check_order(n);
    RatMatrix q(n, n);
    for (unsigned i = 2; i <= n; ++i) q.at(i - 1, i - 2) = Rational(1);
    return q;
}

RatMatrix build_D(unsigned n) {
    check_order(n);
    RatMatrix d(n, n);
    d.at(n - 1, n - 1) = Rational(1);
    return d;
}

RatMatrix build_H0(unsigned n) {
    check_order(n);
    RatMatrix h(n, n);
    for (unsigned i = 1; i <= n; ++i)
        for (unsigned j = 1; j <= n; ++j)
            h.at(i - 1, j - 1) =
                Rational(BigInt(1), BigInt::factorial(n - i) * BigInt::factorial(n - j));
    return h;
}

RatMatrix build_H_flow(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix h(n, n);
    for (unsigned i = 1; i <= n; ++i) {
        for (unsigned j = i; j <= n; ++j) {
            Rational v = Rational::pow(t, static_cast<int>(j - i)) * inv_factorial(j - i);
            if (parity_sign(j - i) < 0) v = -v;
            h.at(i - 1, j - 1) = v;
        }
    }
    return h;
}

RatMatrix build_K_closed(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix k(n, n);
    for (unsigned i = 1; i <= n; ++i) {
        for (unsigned j = 1; j <= n; ++j) {
            Rational v = Rational::pow(t, static_cast<int>(2 * n - i - j)) *
                         inv_factorial(2 * n + 1 - i - j);
            if (parity_sign(n - j) < 0) v = -v;
            k.at(i - 1, j - 1) = v;
        }
    }
    return k;
}

RatMatrix build_H2T_inverse_closed(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix p(n, n);
    for (unsigned l = 1; l <= n; ++l) {
        for (unsigned j = 1; j <= l; ++j) {
            Rational v = inv_factorial(l - j) / Rational::pow(t, static_cast<int>(j) - 1);
            if (parity_sign(l - j) < 0) v = -v;
            p.at(l - 1, j - 1) = v;
        }
    }
    return p;
}

RatMatrix build_T1(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix M = build_M(n);
    RatMatrix H1 = build_H1(n, t), H1p = build_H1_prime(n, t);
    RatMatrix H2 = build_H2(n, t), D = build_D(n);
    Rational two_n_minus_1(2 * static_cast<std::int64_t>(n) - 1);
    Rational t_pow = Rational::pow(t, 2 - 2 * static_cast<int>(n));
    RatMatrix MH1 = M * H1;
    return (H1.transpose() * MH1).scaled(two_n_minus_1) -
           (H1p.transpose() * MH1).scaled(t * Rational(2)) -
           (H1.transpose() * M * H2 * D * H2.transpose() * MH1).scaled(t_pow);
}

RatMatrix build_T2(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix M = build_M(n);
    RatMatrix H1 = build_H1(n, t), H1p = build_H1_prime(n, t);
    RatMatrix H2 = build_H2(n, t), H2p = build_H2_prime(n, t);
    RatMatrix Q = build_Q(n), H0 = build_H0(n);
    Rational one_minus_2n(1 - 2 * static_cast<std::int64_t>(n));
    RatMatrix MH1 = M * H1;
    RatMatrix H2T = H2.transpose();
    return (H2T * MH1).scaled(one_minus_2n) +
           (H2p.transpose() * MH1 + H2T * M * H1p).scaled(t) -
           (Q * H2T * MH1).scaled(t) + H2T * M * H0 * MH1;
}

RatMatrix build_T3(unsigned n, const Rational& t) {
    check_order(n);
    RatMatrix M = build_M(n);
    RatMatrix H2 = build_H2(n, t), H2p = build_H2_prime(n, t);
    RatMatrix Q = build_Q(n), D = build_D(n);
    Rational two_n_minus_1(2 * static_cast<std::int64_t>(n) - 1);
    Rational t_pow = Rational::pow(t, 2 - 2 * static_cast<int>(n));
    RatMatrix H2T = H2.transpose();
    RatMatrix MH2 = M * H2;
    return (H2T * MH2).scaled(two_n_minus_1) - (H2p.transpose() * MH2).scaled(t * Rational(2)) +
           (Q * H2T * MH2).scaled(t * Rational(2)) -
           (H2T * MH2 * D * H2T * MH2).scaled(t_pow);
}

}  // namespace msdflow
