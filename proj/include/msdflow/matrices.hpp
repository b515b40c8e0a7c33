#pragma once

#include "msdflow/rat_matrix.hpp"

namespace msdflow {

// Combinatorial matrices behind the mean-squared-derivative cost of order n,
// all in exact rational arithmetic. Every n x n matrix here acts blockwise on
// R^{dn} (each scalar entry stands for entry * I_d); the d-fold structure is
// applied by the evaluators and never materialized.

inline constexpr unsigned kMaxOrder = 64;

void check_order(unsigned n);

// A_{k+1,i} = k! * C(n+i-1, k), rows k = 0..n-1, columns i = 1..n.
RatMatrix build_A(unsigned n);

// B_{ki} = (-1)^{n-k} (n+i-1)!/(k+i-n-1)!  when k+i >= n+1, else 0.
RatMatrix build_B(unsigned n);

// Closed-form inverse of B:
// (B^{-1})_{ki} = (-1)^{k-1} / ((n+k-1)! (n+1-k-i)!)  when k+i <= n+1, else 0.
RatMatrix build_B_inverse_closed(unsigned n);

struct LUFactors {
    RatMatrix L, U, Linv, Uinv;
};

// Closed-form LU factorization A = L U together with the closed-form
// inverses, so A^{-1} = Uinv * Linv.
LUFactors build_LU(unsigned n);

// M = B A^{-1}, assembled exactly as B * Uinv * Linv.
RatMatrix build_M(unsigned n);

// Closed form for M^{-1} = A B^{-1}:
// (M^{-1})_{ij} = 1 / ((2n+1-i-j) (n-i)! (n-j)!).
RatMatrix build_M_inverse_closed(unsigned n);

// H1(t) = diag(1, t, ..., t^{n-1}) and its t-derivative.
RatMatrix build_H1(unsigned n, const Rational& t);
RatMatrix build_H1_prime(unsigned n, const Rational& t);

// (H2)_{ij} = t^{j-1}/(j-i)!  for j >= i, else 0, and its t-derivative.
RatMatrix build_H2(unsigned n, const Rational& t);
RatMatrix build_H2_prime(unsigned n, const Rational& t);

// Down-shift Q (Q_{i,i-1} = 1) and last-slot selector D = diag(0,...,0,1).
RatMatrix build_Q(unsigned n);
RatMatrix build_D(unsigned n);

// (H0)_{ij} = 1/((n-i)!(n-j)!), the t-free factor of H2 D H2^T.
RatMatrix build_H0(unsigned n);

// H with H2 H = H1: H_{ij} = (-1)^{j-i} t^{j-i}/(j-i)!  for j >= i, else 0.
RatMatrix build_H_flow(unsigned n, const Rational& t);

// K = t^{2n-2} (H2^T M H1)^{-1} in closed form:
// K_{ij} = (-1)^{n-j} t^{2n-i-j} / (2n+1-i-j)!.
RatMatrix build_K_closed(unsigned n, const Rational& t);

// Closed form for (H2^T)^{-1}: P_{lj} = (-1)^{l-j} / ((l-j)! t^{j-1}) for l >= j.
RatMatrix build_H2T_inverse_closed(unsigned n, const Rational& t);

// The three matrices whose vanishing / anti-symmetry proves the PDE for the
// cost function:
//   T1 = (2n-1) H1^T M H1 - 2t (H1')^T M H1 - t^{2-2n} H1^T M H2 D H2^T M H1
//   T2 = (1-2n) H2^T M H1 + t((H2')^T M H1 + H2^T M H1') - t Q H2^T M H1
//        + H2^T M H0 M H1
//   T3 = (2n-1) H2^T M H2 - 2t (H2')^T M H2 + 2t Q H2^T M H2
//        - t^{2-2n} H2^T M H2 D H2^T M H2
RatMatrix build_T1(unsigned n, const Rational& t);
RatMatrix build_T2(unsigned n, const Rational& t);
RatMatrix build_T3(unsigned n, const Rational& t);

}  // namespace msdflow
