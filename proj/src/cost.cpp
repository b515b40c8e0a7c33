#include "msdflow/cost.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace msdflow {

namespace {

double factorial_d(unsigned k) {
    double r = 1.0;
    for (unsigned i = 2; i <= k; ++i) r *= i;
    return r;
}

}  // namespace

BoundaryState::BoundaryState(unsigned n_, unsigned d_, std::vector<double> c)
    : n(n_), d(d_), coords(std::move(c)) {
    validate();
}

void BoundaryState::validate() const {
    if (n < 1 || d < 1) throw std::invalid_argument("BoundaryState: n and d must be >= 1");
    if (coords.size() != static_cast<std::size_t>(n) * d)
        throw std::invalid_argument("BoundaryState: coordinate count != n*d");
    for (double v : coords)
        if (!std::isfinite(v)) throw std::invalid_argument("BoundaryState: non-finite entry");
}

CostEvaluator::CostEvaluator(unsigned n, unsigned d) : n_(n), d_(d) {
    check_order(n);
    if (d < 1) throw std::invalid_argument("CostEvaluator: d must be >= 1");
    RatMatrix M = build_M(n);
    M_.resize(static_cast<std::size_t>(n) * n);
    Ms_.resize(M_.size());
    for (unsigned i = 0; i < n; ++i) {
        for (unsigned j = 0; j < n; ++j) {
            M_[i * n + j] = M.at(i, j).to_double();
            Ms_[i * n + j] = ((M.at(i, j) + M.at(j, i)) * Rational(1, 2)).to_double();
        }
    }
    RatMatrix Msym(n, n);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j)
            Msym.at(i, j) = (M.at(i, j) + M.at(j, i)) * Rational(1, 2);
    det_Ms_ = Msym.determinant().to_double();

    Eigen::MatrixXd ms(n, n);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j) ms(i, j) = Ms_[i * n + j];
    Eigen::LLT<Eigen::MatrixXd> llt(ms);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("CostEvaluator: symmetric part of M is not positive definite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ms);
    lambda_min_ = es.eigenvalues().minCoeff();
}

void CostEvaluator::check_t(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("CostEvaluator: t must be positive");
}

void CostEvaluator::check_state(const std::vector<double>& v) const {
    if (v.size() != state_size())
        throw std::invalid_argument("CostEvaluator: state dimension mismatch");
}

std::vector<double> CostEvaluator::apply_block(const std::vector<double>& S,
                                               const std::vector<double>& v) const {
    std::vector<double> w(state_size(), 0.0);
    for (unsigned i = 0; i < n_; ++i)
        for (unsigned j = 0; j < n_; ++j) {
            double s = S[i * n_ + j];
            if (s == 0.0) continue;
            for (unsigned c = 0; c < d_; ++c) w[i * d_ + c] += s * v[j * d_ + c];
        }
    return w;
}

std::vector<double> CostEvaluator::apply_block_transposed(const std::vector<double>& S,
                                                          const std::vector<double>& v) const {
    std::vector<double> w(state_size(), 0.0);
    for (unsigned i = 0; i < n_; ++i)
        for (unsigned j = 0; j < n_; ++j) {
            double s = S[j * n_ + i];
            if (s == 0.0) continue;
            for (unsigned c = 0; c < d_; ++c) w[i * d_ + c] += s * v[j * d_ + c];
        }
    return w;
}

std::vector<double> CostEvaluator::h1_apply(double t, const std::vector<double>& v,
                                            bool derivative) const {
    std::vector<double> w(state_size());
    for (unsigned i = 0; i < n_; ++i) {
        double s = derivative ? (i == 0 ? 0.0 : i * std::pow(t, static_cast<int>(i) - 1))
                              : std::pow(t, static_cast<int>(i));
        for (unsigned c = 0; c < d_; ++c) w[i * d_ + c] = s * v[i * d_ + c];
    }
    return w;
}

std::vector<double> CostEvaluator::h2_apply(double t, const std::vector<double>& v,
                                            bool derivative, bool transposed) const {
    std::vector<double> w(state_size(), 0.0);
    for (unsigned i = 1; i <= n_; ++i) {
        for (unsigned j = i; j <= n_; ++j) {
            double s;
            if (!derivative) {
                s = std::pow(t, static_cast<int>(j) - 1) / factorial_d(j - i);
            } else {
                s = (j == 1) ? 0.0
                             : (j - 1) * std::pow(t, static_cast<int>(j) - 2) / factorial_d(j - i);
            }
            unsigned row = transposed ? j : i;
            unsigned col = transposed ? i : j;
            for (unsigned c = 0; c < d_; ++c)
                w[(row - 1) * d_ + c] += s * v[(col - 1) * d_ + c];
        }
    }
    return w;
}

std::vector<double> CostEvaluator::assemble_b(double t, const std::vector<double>& x,
                                              const std::vector<double>& y) const {
    check_t(t);
    check_state(x);
    check_state(y);
    std::vector<double> h1y = h1_apply(t, y, false);
    std::vector<double> h2x = h2_apply(t, x, false, false);
    for (std::size_t i = 0; i < h1y.size(); ++i) h1y[i] -= h2x[i];
    return h1y;
}

std::vector<double> CostEvaluator::freeflow(double t, const std::vector<double>& x) const {
    check_t(t);
    check_state(x);
    // y_i = sum_{j>=i} t^{j-i}/(j-i)! x_j = t^{1-i} (H2 x)_i
    std::vector<double> h2x = h2_apply(t, x, false, false);
    for (unsigned i = 0; i < n_; ++i) {
        double s = std::pow(t, -static_cast<int>(i));
        for (unsigned c = 0; c < d_; ++c) h2x[i * d_ + c] *= s;
    }
    return h2x;
}

double CostEvaluator::cost(double t, const std::vector<double>& x,
                           const std::vector<double>& y) const {
    std::vector<double> b = assemble_b(t, x, y);
    std::vector<double> mb = apply_block(M_, b);
    double q = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) q += b[i] * mb[i];
    return std::pow(t, 2 - 2 * static_cast<int>(n_)) * q;
}

std::vector<double> CostEvaluator::cost_grad_x(double t, const std::vector<double>& x,
                                               const std::vector<double>& y) const {
    std::vector<double> b = assemble_b(t, x, y);
    std::vector<double> mb = apply_block(M_, b);
    std::vector<double> g = h2_apply(t, mb, false, true);
    double s = -2.0 * std::pow(t, 2 - 2 * static_cast<int>(n_));
    for (double& v : g) v *= s;
    return g;
}

std::vector<double> CostEvaluator::cost_grad_y(double t, const std::vector<double>& x,
                                               const std::vector<double>& y) const {
    std::vector<double> b = assemble_b(t, x, y);
    std::vector<double> mb = apply_block(M_, b);
    std::vector<double> g = h1_apply(t, mb, false);
    double s = 2.0 * std::pow(t, 2 - 2 * static_cast<int>(n_));
    for (double& v : g) v *= s;
    return g;
}

double CostEvaluator::cost_dt(double t, const std::vector<double>& x,
                              const std::vector<double>& y) const {
    std::vector<double> b = assemble_b(t, x, y);
    std::vector<double> mb = apply_block(M_, b);
    // d/dt b = H1'(t) y - H2'(t) x
    std::vector<double> bt = h1_apply(t, y, true);
    std::vector<double> h2px = h2_apply(t, x, true, false);
    for (std::size_t i = 0; i < bt.size(); ++i) bt[i] -= h2px[i];
    double quad = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        quad += b[i] * mb[i];
        cross += bt[i] * mb[i];
    }
    int e = 2 - 2 * static_cast<int>(n_);
    return e * std::pow(t, e - 1) * quad + 2.0 * std::pow(t, e) * cross;
}

double CostEvaluator::cost_laplacian_xn(double t) const {
    check_t(t);
    // (H2^T M H2)_{nn} with the n-th column of H2 being t^{n-1}/(n-i)!.
    std::vector<double> col(n_);
    for (unsigned i = 1; i <= n_; ++i)
        col[i - 1] = std::pow(t, static_cast<int>(n_) - 1) / factorial_d(n_ - i);
    double q = 0.0;
    for (unsigned i = 0; i < n_; ++i)
        for (unsigned j = 0; j < n_; ++j) q += col[i] * M_[i * n_ + j] * col[j];
    return 2.0 * std::pow(t, 2 - 2 * static_cast<int>(n_)) * d_ * q;
}

double CostEvaluator::cost_transport_term(double t, const std::vector<double>& x,
                                          const std::vector<double>& y) const {
    std::vector<double> g = cost_grad_x(t, x, y);
    double s = 0.0;
    for (unsigned i = 2; i <= n_; ++i)
        for (unsigned c = 0; c < d_; ++c)
            s += x[(i - 1) * d_ + c] * g[(i - 2) * d_ + c];
    return s;
}

double CostEvaluator::verify_cost_pde(double t, const std::vector<double>& x,
                                      const std::vector<double>& y) const {
    double c = cost(t, x, y);
    double dt = cost_dt(t, x, y);
    double transport = cost_transport_term(t, x, y);
    std::vector<double> g = cost_grad_x(t, x, y);
    double gn2 = 0.0;
    for (unsigned cdim = 0; cdim < d_; ++cdim) {
        double v = g[(n_ - 1) * d_ + cdim];
        gn2 += v * v;
    }
    double lap = cost_laplacian_xn(t);
    double rhs = c / t + transport - gn2 / (4.0 * t) + lap -
                 2.0 * d_ * static_cast<double>(n_) * n_;
    return dt - rhs;
}

double CostEvaluator::comparability_constant(double t_max) const {
    if (!(t_max > 0.0)) throw std::invalid_argument("comparability_constant: t_max must be positive");
    // |y-x|^2 <= 2(||Tbar||^2 ||Ms^{-1/2}||^2 C + |w|^2) with w = t W(t) x,
    // following the proof of the quadratic comparability bound.
    double s = std::max(1.0, t_max);
    double tbar2 = std::pow(s, 2 * (static_cast<int>(n_) - 1));
    double term1 = tbar2 / lambda_min_;
    double cw2 = 0.0;
    for (unsigned k = 1; k <= n_; ++k) {
        for (unsigned j = k + 1; j <= n_; ++j) {
            double e = std::pow(s, static_cast<int>(j - k) - 1) / factorial_d(j - k);
            cw2 += e * e;
        }
    }
    return 2.0 * std::max(term1, std::max(cw2, 1.0));
}

}  // namespace msdflow
