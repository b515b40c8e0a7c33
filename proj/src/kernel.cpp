#include "msdflow/kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msdflow/parallel.hpp"
#include "msdflow/quadrature.hpp"

namespace msdflow {

namespace {

Eigen::MatrixXd h2_matrix(unsigned n, double t) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (unsigned i = 1; i <= n; ++i) {
        double f = 1.0;
        for (unsigned j = i; j <= n; ++j) {
            if (j > i) f *= (j - i);
            h(i - 1, j - 1) = std::pow(t, static_cast<int>(j) - 1) / f;
        }
    }
    return h;
}

Eigen::MatrixXd h1_matrix(unsigned n, double t) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (unsigned i = 0; i < n; ++i) h(i, i) = std::pow(t, static_cast<int>(i));
    return h;
}

}  // namespace

Kernel::Kernel(unsigned n, unsigned d) : eval_(std::make_shared<CostEvaluator>(n, d)) {
    beta_ = beta_constant(n, d);
    if (static_cast<std::size_t>(n) * d <= 3) {
        double mass = normalization_integral(1.0, std::vector<double>(n * d, 0.0), 20);
        if (std::abs(mass - 1.0) > 1e-8)
            throw std::runtime_error("Kernel: normalization check failed at build time");
    }
}

double Kernel::beta_constant(unsigned n, unsigned d) {
    check_order(n);
    if (d < 1) throw std::invalid_argument("beta_constant: d must be >= 1");
    RatMatrix M = build_M(n);
    RatMatrix Ms(n, n);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j) Ms.at(i, j) = (M.at(i, j) + M.at(j, i)) * Rational(1, 2);
    double det = Ms.determinant().to_double();
    if (!(det > 0.0)) throw std::runtime_error("beta_constant: symmetric part of M not PD");
    return std::pow(det / std::pow(4.0 * M_PI, static_cast<double>(n)), d / 2.0);
}

double Kernel::phi(double t, const std::vector<double>& x, const std::vector<double>& y) const {
    if (!(t > 0.0)) throw std::invalid_argument("Kernel: t must be positive");
    double c = eval_->cost(t, x, y);
    unsigned n = order(), d = dim();
    double alpha = 0.5 * static_cast<double>(n) * n * d;
    return beta_ * std::pow(t, -alpha) * std::exp(-c / (4.0 * t));
}

double Kernel::normalization_integral(double t, const std::vector<double>& y,
                                      unsigned nodes_per_axis) const {
    if (!(t > 0.0)) throw std::invalid_argument("Kernel: t must be positive");
    unsigned n = order(), d = dim();
    std::size_t dn = static_cast<std::size_t>(n) * d;
    if (dn > 4) throw std::invalid_argument("normalization_integral: n*d too large for quadrature");

    Eigen::MatrixXd m(n, n);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j) m(i, j) = eval_->M_flat()[i * n + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    Eigen::MatrixXd rot = es.eigenvectors();
    Eigen::VectorXd lam = es.eigenvalues();

    Eigen::MatrixXd h2 = h2_matrix(n, t);
    Eigen::MatrixXd h2inv = h2.inverse();
    Eigen::MatrixXd h1 = h1_matrix(n, t);

    double cquad = 0.25 * std::pow(t, 1 - 2 * static_cast<int>(n));
    GaussHermiteRule rule = gauss_hermite(nodes_per_axis);

    // Per scalar axis (block i, component c): v = s / sqrt(cquad*lam_i).
    std::vector<double> scale(n);
    double jac = std::pow(h2.determinant(), -static_cast<double>(d));
    for (unsigned i = 0; i < n; ++i) {
        scale[i] = 1.0 / std::sqrt(cquad * lam(i));
        jac *= std::pow(scale[i], static_cast<double>(d));
    }

    std::vector<double> h1y(dn);
    {
        std::vector<double> tmp = y;
        for (unsigned i = 0; i < n; ++i)
            for (unsigned c = 0; c < d; ++c)
                h1y[i * d + c] = h1(i, i) * tmp[i * d + c];
    }

    std::size_t total = 1;
    for (std::size_t k = 0; k < dn; ++k) total *= nodes_per_axis;
    std::vector<double> x(dn), u(dn), v(dn);
    double integral = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double wprod = 1.0, s2 = 0.0;
        for (std::size_t k = 0; k < dn; ++k) {
            unsigned ik = static_cast<unsigned>(rem % nodes_per_axis);
            rem /= nodes_per_axis;
            double s = rule.nodes[ik];
            wprod *= rule.weights[ik];
            s2 += s * s;
            std::size_t block = k / d;
            v[k] = s * scale[block];
        }
        // u = h1y + (rot ⊗ I_d) v ; x = (h2inv ⊗ I_d) u
        for (unsigned i = 0; i < n; ++i) {
            for (unsigned c = 0; c < d; ++c) {
                double acc = 0.0;
                for (unsigned j = 0; j < n; ++j) acc += rot(i, j) * v[j * d + c];
                u[i * d + c] = h1y[i * d + c] + acc;
            }
        }
        for (unsigned i = 0; i < n; ++i) {
            for (unsigned c = 0; c < d; ++c) {
                double acc = 0.0;
                for (unsigned j = 0; j < n; ++j) acc += h2inv(i, j) * u[j * d + c];
                x[i * d + c] = acc;
            }
        }
        integral += wprod * phi(t, x, y) * std::exp(s2);
    }
    return integral * jac;
}

double Kernel::pde_residual(double t, const std::vector<double>& x, const std::vector<double>& y,
                            double fd_step) const {
    if (!(t > 0.0)) throw std::invalid_argument("Kernel: t must be positive");
    if (!(fd_step > 0.0)) throw std::invalid_argument("Kernel: fd_step must be positive");
    if (t < 10.0 * fd_step)
        throw std::invalid_argument("Kernel: t too small for stable differencing");
    unsigned n = order(), d = dim();

    double dt = fd_step * t;
    double dphidt = (phi(t + dt, x, y) - phi(t - dt, x, y)) / (2.0 * dt);

    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::abs(v));
    double dx = fd_step * (1.0 + xmax);

    std::vector<double> xp = x, xm = x;
    double transport = 0.0;
    for (unsigned i = 2; i <= n; ++i) {
        for (unsigned c = 0; c < d; ++c) {
            std::size_t idx = static_cast<std::size_t>(i - 2) * d + c;
            xp[idx] = x[idx] + dx;
            xm[idx] = x[idx] - dx;
            double grad = (phi(t, xp, y) - phi(t, xm, y)) / (2.0 * dx);
            xp[idx] = x[idx];
            xm[idx] = x[idx];
            transport += x[static_cast<std::size_t>(i - 1) * d + c] * grad;
        }
    }

    double phi0 = phi(t, x, y);
    double laplacian = 0.0;
    for (unsigned c = 0; c < d; ++c) {
        std::size_t idx = static_cast<std::size_t>(n - 1) * d + c;
        xp[idx] = x[idx] + dx;
        xm[idx] = x[idx] - dx;
        laplacian += (phi(t, xp, y) - 2.0 * phi0 + phi(t, xm, y)) / (dx * dx);
        xp[idx] = x[idx];
        xm[idx] = x[idx];
    }

    double residual = dphidt - transport - laplacian;
    double alpha = 0.5 * static_cast<double>(n) * n * d;
    double ref = std::max(std::abs(dphidt), beta_ * std::pow(t, -alpha - 1.0));
    return residual / ref;
}

std::vector<DiracLimitRow> Kernel::dirac_limit_check(
    const std::vector<double>& y, const std::vector<double>& t_sequence,
    const std::function<double(const std::vector<double>&)>& test_function,
    double box_halfwidth) const {
    unsigned n = order(), d = dim();
    std::size_t dn = static_cast<std::size_t>(n) * d;
    if (dn > 3)
        throw std::invalid_argument("dirac_limit_check: n*d too large for box quadrature");
    double phi_at_y = test_function(y);

    RatMatrix Minv = build_M_inverse_closed(n);
    std::vector<DiracLimitRow> rows;
    for (double t : t_sequence) {
        if (!(t > 0.0)) throw std::invalid_argument("dirac_limit_check: t must be positive");
        Eigen::MatrixXd h2 = h2_matrix(n, t);
        Eigen::MatrixXd h2inv = h2.inverse();
        Eigen::MatrixXd h1 = h1_matrix(n, t);
        Eigen::MatrixXd minv(n, n);
        for (unsigned i = 0; i < n; ++i)
            for (unsigned j = 0; j < n; ++j) minv(i, j) = Minv.at(i, j).to_double();
        // Covariance of x under the Gaussian factor: 2 t^{2n-1} H2^{-1} M^{-1} H2^{-T}
        Eigen::MatrixXd cov =
            2.0 * std::pow(t, 2 * static_cast<int>(n) - 1) * h2inv * minv * h2inv.transpose();
        Eigen::VectorXd ycol(n);
        std::vector<double> lo(dn), hi(dn);
        for (unsigned c = 0; c < d; ++c) {
            for (unsigned i = 0; i < n; ++i) ycol(i) = y[i * d + c];
            Eigen::VectorXd mean = h2inv * (h1 * ycol);
            for (unsigned i = 0; i < n; ++i) {
                double sigma = std::sqrt(std::max(cov(i, i), 0.0));
                double half = 10.0 * sigma + box_halfwidth;
                lo[i * d + c] = mean(i) - half;
                hi[i * d + c] = mean(i) + half;
            }
        }
        auto integrand = [&](const std::vector<double>& x) {
            return phi(t, x, y) * test_function(x);
        };
        BoxQuadratureResult q = adaptive_trapezoid_box(integrand, lo, hi, 1e-8, 16, 9);
        rows.push_back({t, q.value, std::abs(q.value - phi_at_y), q.converged});
    }
    return rows;
}

EvolveResult Kernel::evolve_by_kernel(const GridMeasure& rho0, double t,
                                      unsigned subsamples) const {
    if (!(t > 0.0)) throw std::invalid_argument("evolve_by_kernel: t must be positive");
    if (rho0.grid.dims() == 0)
        throw std::invalid_argument("evolve_by_kernel: source measure needs a tensor grid");
    unsigned n = order(), d = dim();
    std::size_t dims = rho0.dim;
    std::size_t npts = rho0.size();
    double vol = rho0.cell_volume();

    if (subsamples == 0) {
        // kernel standard deviations per block from the x-covariance
        // 2 t^{2n-1} H2^{-1} M^{-1} H2^{-T}; resolve the narrowest against
        // the coarsest cell
        Eigen::MatrixXd h2inv = h2_matrix(n, t).inverse();
        RatMatrix Minv = build_M_inverse_closed(n);
        Eigen::MatrixXd minv(n, n);
        for (unsigned i = 0; i < n; ++i)
            for (unsigned j = 0; j < n; ++j) minv(i, j) = Minv.at(i, j).to_double();
        Eigen::MatrixXd cov =
            2.0 * std::pow(t, 2 * static_cast<int>(n) - 1) * h2inv * minv * h2inv.transpose();
        double ratio = 1.0;
        for (unsigned i = 0; i < n; ++i) {
            double sigma = std::sqrt(std::max(cov(i, i), 1e-300));
            for (unsigned c = 0; c < d; ++c) {
                std::size_t axis = static_cast<std::size_t>(i) * d + c;
                ratio = std::max(ratio, rho0.grid.spacing(axis) / sigma);
            }
        }
        subsamples = static_cast<unsigned>(std::clamp(std::ceil(0.75 * ratio), 1.0, 5.0));
    }

    // Gauss-Legendre points on [-1/2, 1/2] per axis
    std::vector<double> sub_pos, sub_wt;
    switch (subsamples) {
        case 1: sub_pos = {0.0}; sub_wt = {1.0}; break;
        case 2: sub_pos = {-0.2886751345948129, 0.2886751345948129}; sub_wt = {0.5, 0.5}; break;
        case 3:
            sub_pos = {-0.3872983346207417, 0.0, 0.3872983346207417};
            sub_wt = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
            break;
        case 4:
            sub_pos = {-0.4305681557970262, -0.1699905217924281, 0.1699905217924281,
                       0.4305681557970262};
            sub_wt = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                      0.1739274225687269};
            break;
        default:
            sub_pos = {-0.4530899229693320, -0.2692346550528415, 0.0, 0.2692346550528415,
                       0.4530899229693320};
            sub_wt = {0.1184634425280945, 0.2393143352496832, 0.2844444444444444,
                      0.2393143352496832, 0.1184634425280945};
            break;
    }
    std::size_t sub_total = 1;
    for (std::size_t k = 0; k < dims; ++k) sub_total *= sub_pos.size();

    GridMeasure out = rho0;
    parallel_for(npts, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> xi(dims), yj(dims);
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t k = 0; k < dims; ++k) xi[k] = rho0.points[i * dims + k];
            double rho = 0.0;
            for (std::size_t j = 0; j < npts; ++j) {
                double w = rho0.weights[j];
                if (w == 0.0) continue;
                double cell_avg = 0.0;
                for (std::size_t s = 0; s < sub_total; ++s) {
                    std::size_t rem = s;
                    double swt = 1.0;
                    for (std::size_t k = 0; k < dims; ++k) {
                        std::size_t sk = rem % sub_pos.size();
                        rem /= sub_pos.size();
                        yj[k] = rho0.points[j * dims + k] + sub_pos[sk] * rho0.grid.spacing(k);
                        swt *= sub_wt[sk];
                    }
                    // adjoint pairing: source point in the first slot
                    cell_avg += swt * phi(t, yj, xi);
                }
                rho += w * cell_avg;
            }
            out.weights[i] = rho * vol;
        }
    });
    double mass = 0.0;
    for (double w : out.weights) mass += w;
    EvolveResult res;
    res.mass_error = std::abs(mass - 1.0);
    if (res.mass_error > 0.01)
        throw std::runtime_error("evolve_by_kernel: output grid too coarse (mass error > 1%)");
    for (double& w : out.weights) w /= mass;
    res.measure = std::move(out);
    return res;
}

}  // namespace msdflow
