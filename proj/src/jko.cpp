#include "msdflow/jko.hpp"

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

// ---------------------------------------------------------------------------
// PotentialSpec
// ---------------------------------------------------------------------------

PotentialSpec PotentialSpec::zero() { return PotentialSpec(); }

PotentialSpec PotentialSpec::quadratic(double a) {
    if (a < 0.0) throw std::invalid_argument("PotentialSpec: quadratic coefficient must be >= 0");
    PotentialSpec v;
    v.kind_ = Kind::quadratic;
    v.coeffs_ = {a};
    v.name_ = "quadratic";
    return v;
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> coeffs) {
    PotentialSpec v;
    v.kind_ = Kind::polynomial;
    v.coeffs_ = std::move(coeffs);
    v.name_ = "polynomial";
    return v;
}

double PotentialSpec::value(double xn) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::quadratic: return 0.5 * coeffs_[0] * xn * xn;
        case Kind::polynomial: {
            double acc = 0.0;
            for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * xn + coeffs_[k];
            return acc;
        }
    }
    return 0.0;
}

double PotentialSpec::grad(double xn) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::quadratic: return coeffs_[0] * xn;
        case Kind::polynomial: {
            double acc = 0.0;
            for (std::size_t k = coeffs_.size(); k-- > 1;)
                acc = acc * xn + coeffs_[k] * static_cast<double>(k);
            return acc;
        }
    }
    return 0.0;
}

bool PotentialSpec::is_standard_quadratic() const {
    return kind_ == Kind::quadratic && coeffs_.size() == 1 && coeffs_[0] == 1.0;
}

double PotentialSpec::validate_on(const std::vector<double>& xn_samples) const {
    double lip = 0.0;
    for (double x : xn_samples) {
        if (value(x) < -1e-12)
            throw std::invalid_argument("PotentialSpec: V must be nonnegative on the grid");
    }
    std::vector<double> s = xn_samples;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 1; i < s.size(); ++i) {
        double dx = s[i] - s[i - 1];
        if (dx <= 0.0) continue;
        lip = std::max(lip, std::abs(grad(s[i]) - grad(s[i - 1])) / dx);
    }
    return lip;
}

// ---------------------------------------------------------------------------
// Free energy
// ---------------------------------------------------------------------------

FreeEnergy free_energy(const GridMeasure& rho, const PotentialSpec& V) {
    double vol = rho.cell_volume();
    if (!(vol > 0.0)) throw std::invalid_argument("free_energy: zero-volume cells");
    FreeEnergy fe;
    double log_vol = std::log(vol);
    for (std::size_t j = 0; j < rho.size(); ++j) {
        double w = rho.weights[j];
        double xn = rho.points[j * rho.dim + (rho.dim - 1)];
        fe.potential += V.value(xn) * w;
        if (w > 0.0) {
            double wlog = w * (std::log(w) - log_vol);
            fe.entropy += wlog;
            if (wlog > 0.0) fe.positive_entropy += wlog;
        }
    }
    fe.total = fe.potential + fe.entropy;
    return fe;
}

// ---------------------------------------------------------------------------
// Proximal Sinkhorn scaling for one minimizing-movement step
// ---------------------------------------------------------------------------

namespace {

struct ProxState {
    std::vector<double> f, g;       // scaled duals
    std::vector<double> sigma;      // eps_t * log colsum of exp((f - Ct)/eps_t)
    std::vector<double> col_cost;   // sum_i exp((f_i - Ct_ij)/eps_t) * Ct_ij, shifted
    std::vector<double> col_shift;  // the per-column max used for the shift
    std::vector<double> w;
};

// Column pass: per column j compute max_i a_ij, sum_i e^{a_ij - mx} and the
// cost-weighted sum, where a_ij = (f_i - Ct_ij)/eps_t. Row-chunk parallel.
void fused_column_pass(const std::vector<double>& Ct, std::size_t N,
                       const std::vector<double>& f, double eps_t, ProxState& st) {
    st.col_shift.assign(N, kNegInf);
    unsigned workers = std::max(1u, thread_count());
    std::vector<std::vector<double>> local_max(workers, std::vector<double>(N, kNegInf));
    std::vector<std::size_t> bounds;
    {
        std::size_t chunk = (N + workers - 1) / workers;
        for (unsigned wkr = 0; wkr <= workers; ++wkr) bounds.push_back(std::min(N, wkr * chunk));
    }
    auto pass_max = [&](unsigned wkr) {
        auto& mx = local_max[wkr];
        for (std::size_t i = bounds[wkr]; i < bounds[wkr + 1]; ++i) {
            if (f[i] == kNegInf) continue;
            const double* ci = Ct.data() + i * N;
            for (std::size_t j = 0; j < N; ++j) {
                double a = (f[i] - ci[j]) / eps_t;
                if (a > mx[j]) mx[j] = a;
            }
        }
    };
    parallel_for(workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t wkr = lo; wkr < hi; ++wkr) pass_max(static_cast<unsigned>(wkr));
    });
    for (unsigned wkr = 0; wkr < workers; ++wkr)
        for (std::size_t j = 0; j < N; ++j)
            st.col_shift[j] = std::max(st.col_shift[j], local_max[wkr][j]);

    std::vector<std::vector<double>> local_sum(workers, std::vector<double>(N, 0.0));
    std::vector<std::vector<double>> local_cost(workers, std::vector<double>(N, 0.0));
    auto pass_sum = [&](unsigned wkr) {
        auto& sm = local_sum[wkr];
        auto& cs = local_cost[wkr];
        for (std::size_t i = bounds[wkr]; i < bounds[wkr + 1]; ++i) {
            if (f[i] == kNegInf) continue;
            const double* ci = Ct.data() + i * N;
            for (std::size_t j = 0; j < N; ++j) {
                double e = std::exp((f[i] - ci[j]) / eps_t - st.col_shift[j]);
                sm[j] += e;
                cs[j] += e * ci[j];
            }
        }
    };
    parallel_for(workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t wkr = lo; wkr < hi; ++wkr) pass_sum(static_cast<unsigned>(wkr));
    });
    st.sigma.assign(N, kNegInf);
    st.col_cost.assign(N, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
        double sum = 0.0, cost = 0.0;
        for (unsigned wkr = 0; wkr < workers; ++wkr) {
            sum += local_sum[wkr][j];
            cost += local_cost[wkr][j];
        }
        if (st.col_shift[j] != kNegInf && sum > 0.0) {
            st.sigma[j] = eps_t * (st.col_shift[j] + std::log(sum));
            st.col_cost[j] = cost;
        }
    }
}

void row_update(const std::vector<double>& Ct, std::size_t N, const std::vector<double>& logp,
                const std::vector<double>& g, double eps_t, std::vector<double>& f) {
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            if (logp[i] == kNegInf) {
                f[i] = kNegInf;
                continue;
            }
            const double* ci = Ct.data() + i * N;
            double mx = kNegInf;
            for (std::size_t j = 0; j < N; ++j) {
                if (g[j] == kNegInf) continue;
                double a = (g[j] - ci[j]) / eps_t;
                if (a > mx) mx = a;
            }
            double s = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                if (g[j] == kNegInf) continue;
                s += std::exp((g[j] - ci[j]) / eps_t - mx);
            }
            f[i] = eps_t * (logp[i] - (mx + std::log(s)));
        }
    });
}

}  // namespace

JkoStepResult jko_step_on_cost(const std::vector<double>& C, const GridMeasure& rho_prev,
                               double h, const PotentialSpec& V, const JkoConfig& config,
                               bool materialize_plan, const std::vector<double>* warm_f,
                               const std::vector<double>* warm_g) {
    std::size_t N = rho_prev.size();
    double vol = rho_prev.cell_volume();
    if (!(vol > 0.0)) throw std::invalid_argument("jko_step: measure needs a tensor grid");
    if (!(h > 0.0)) throw std::invalid_argument("jko_step: h must be positive");
    if (!(config.epsilon > 0.0)) throw std::invalid_argument("jko_step: epsilon must be positive");

    std::vector<double> Ct(C.size());
    for (std::size_t k = 0; k < C.size(); ++k) Ct[k] = C[k] / (2.0 * h);
    double eps_target = config.epsilon / (2.0 * h);

    // The inner problem regularizes the plan against the reference
    // rho_prev x vol (KL of the plan relative to "stay where you are,
    // uniformly over cells"), which keeps the regularization neutral for
    // near-diagonal plans; the raw plan entropy would reward spreading with
    // a log(N) scale amplified by 1/2h.
    std::vector<double> logp(N), Vg(N);
    for (std::size_t i = 0; i < N; ++i) {
        logp[i] = rho_prev.weights[i] > 0.0 ? std::log(rho_prev.weights[i]) : kNegInf;
        Vg[i] = V.value(rho_prev.points[i * rho_prev.dim + (rho_prev.dim - 1)]);
    }
    double log_vol = std::log(vol);

    ProxState st;
    bool warm = warm_f && warm_g && warm_f->size() == N && warm_g->size() == N;
    st.f = warm ? *warm_f : std::vector<double>(N, 0.0);
    st.g = warm ? *warm_g : std::vector<double>(N, 0.0);
    st.w.assign(N, 0.0);

    // f-hat carries the source weights into the shared kernel sweeps:
    // pi_ij = vol * exp((fhat_i + g_j - Ct_ij)/eps)
    std::vector<double> fhat(N);
    auto refresh_fhat = [&](double eps_t) {
        for (std::size_t i = 0; i < N; ++i)
            fhat[i] = logp[i] == kNegInf ? kNegInf : st.f[i] + eps_t * logp[i];
    };

    std::vector<double> schedule;
    if (!warm && config.epsilon_scaling) {
        for (double e = 10.0 * eps_target; e > eps_target * 1.0001; e *= 0.5) schedule.push_back(e);
    }
    schedule.push_back(eps_target);

    int sweeps = 0;
    double J_prev = std::numeric_limits<double>::infinity();
    double J_best = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
        double eps_t = schedule[stage];
        bool final_stage = stage + 1 == schedule.size();
        int budget = final_stage ? std::max(16, config.max_sweeps - sweeps)
                                 : std::max(8, config.max_sweeps / (6 * static_cast<int>(schedule.size())));
        for (int it = 0; it < budget; ++it) {
            // row projection: sum_j vol e^{(f_i + g_j - Ct)/eps} = 1
            row_update(Ct, N, logp, st.g, eps_t, st.f);
            for (std::size_t i = 0; i < N; ++i)
                if (st.f[i] != kNegInf) st.f[i] = st.f[i] - eps_t * (logp[i] + log_vol);
            refresh_fhat(eps_t);
            fused_column_pass(Ct, N, fhat, eps_t, st);
            double J = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                if (st.sigma[j] == kNegInf) {
                    st.g[j] = kNegInf;
                    st.w[j] = 0.0;
                    continue;
                }
                // sigma_j = eps * log sum_i p_i e^{(f_i - Ct_ij)/eps}
                st.g[j] = -(eps_t * (Vg[j] + 1.0) + st.sigma[j]) / (eps_t + 1.0);
                double logw = log_vol + (st.g[j] + st.sigma[j]) / eps_t;
                double wj = std::exp(logw);
                st.w[j] = wj;
                J += vol * std::exp(st.g[j] / eps_t + st.col_shift[j]) * st.col_cost[j];
                J += Vg[j] * wj + wj * (logw - log_vol);
            }
            ++sweeps;
            if (final_stage) {
                double gap = std::abs(J - J_prev);
                if (it > 0 && gap <= config.objective_rel_tol * std::max(1.0, std::abs(J))) {
                    converged = true;
                    break;
                }
                if (J > J_best + 5.0 * std::max(1.0, std::abs(J_best)) && it > 200)
                    throw std::runtime_error(
                        "jko_step: objective diverging (h may be too large for convexity)");
            }
            J_prev = J;
            J_best = std::min(J_best, J);
        }
        if (final_stage && !converged)
            throw std::runtime_error("jko_step: optimizer did not converge within sweep budget");
    }

    // Final cleanup: one row projection so the plan marginals match rho_prev
    // exactly, then read the new weights off the columns.
    row_update(Ct, N, logp, st.g, eps_target, st.f);
    for (std::size_t i = 0; i < N; ++i)
        if (st.f[i] != kNegInf) st.f[i] = st.f[i] - eps_target * (logp[i] + log_vol);
    refresh_fhat(eps_target);
    fused_column_pass(Ct, N, fhat, eps_target, st);
    double plan_cost_scaled = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        if (st.sigma[j] == kNegInf || st.g[j] == kNegInf) {
            st.w[j] = 0.0;
            continue;
        }
        st.w[j] = vol * std::exp((st.g[j] + st.sigma[j]) / eps_target);
        plan_cost_scaled += vol * std::exp(st.g[j] / eps_target + st.col_shift[j]) * st.col_cost[j];
    }

    JkoStepResult res;
    res.rho_next = rho_prev;
    res.rho_next.weights = st.w;
    double mass = std::accumulate(st.w.begin(), st.w.end(), 0.0);
    if (!(mass > 0.0)) throw std::runtime_error("jko_step: zero mass after update");
    for (double& w : res.rho_next.weights) w /= mass;

    res.plan.rows = N;
    res.plan.cols = N;
    res.plan.method = TransportPlan::Method::entropic;
    res.plan.epsilon = config.epsilon;
    res.plan.iterations = sweeps;
    res.plan.converged = converged;
    res.plan.cost_value = 2.0 * h * plan_cost_scaled;
    res.plan.potential_source = st.f;
    res.plan.potential_target = st.g;
    if (materialize_plan) {
        res.plan.matrix.assign(N * N, 0.0);
        double viol = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (fhat[i] == kNegInf) continue;
            const double* ci = Ct.data() + i * N;
            double row_sum = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                if (st.g[j] == kNegInf) continue;
                double pij = vol * std::exp((fhat[i] + st.g[j] - ci[j]) / eps_target);
                res.plan.matrix[i * N + j] = pij;
                row_sum += pij;
            }
            viol += std::abs(row_sum - rho_prev.weights[i]);
        }
        res.plan.marginal_violation = viol;
    }

    FreeEnergy fe = free_energy(res.rho_next, V);
    res.record.free_energy_total = fe.total;
    res.record.free_energy_potential = fe.potential;
    res.record.free_energy_entropy = fe.entropy;
    res.record.positive_entropy = fe.positive_entropy;
    // The recorded W_h is the best available Monge-Kantorovich value between
    // the iterates. On the line the step cost is |x-y|^2, so the monotone
    // coupling evaluates it exactly; otherwise keep the entropic plan cost.
    if (rho_prev.dim == 1) {
        res.record.transport_cost = wasserstein2_euclidean(rho_prev, res.rho_next);
    } else {
        res.record.transport_cost = res.plan.cost_value;
    }
    res.record.second_moment = res.rho_next.second_moment();
    res.record.inner_sweeps = sweeps;
    res.record.marginal_violation = res.plan.marginal_violation;
    return res;
}

JkoStepResult jko_step(const CostEvaluator& eval, const GridMeasure& rho_prev, double h,
                       const PotentialSpec& V, const JkoConfig& config, bool materialize_plan,
                       const std::vector<double>* warm_f, const std::vector<double>* warm_g) {
    std::vector<double> C = cost_matrix(eval, h, rho_prev, rho_prev);
    return jko_step_on_cost(C, rho_prev, h, V, config, materialize_plan, warm_f, warm_g);
}

// ---------------------------------------------------------------------------
// Scheme driver
// ---------------------------------------------------------------------------

const GridMeasure& SchemeState::interpolate(double t) const {
    if (t < -1e-12) throw std::invalid_argument("interpolate: negative time");
    if (t <= 1e-15) return densities.front();
    double kf = std::ceil(t / h - 1e-9);
    std::size_t k = static_cast<std::size_t>(kf);
    if (k < 1) k = 1;
    if (k >= densities.size())
        throw std::invalid_argument("interpolate: time beyond the final step");
    return densities[k];
}

SchemeState run_scheme(const CostEvaluator& eval, const GridMeasure& rho0, double h, double T,
                       const PotentialSpec& V, const JkoConfig& config) {
    if (!(T > 0.0)) throw std::invalid_argument("run_scheme: T must be positive");
    rho0.validate(1e-9);
    {
        std::vector<double> xn(rho0.size());
        for (std::size_t j = 0; j < rho0.size(); ++j)
            xn[j] = rho0.points[j * rho0.dim + (rho0.dim - 1)];
        V.validate_on(xn);
    }
    FreeEnergy fe0 = free_energy(rho0, V);
    if (!std::isfinite(fe0.total))
        throw std::invalid_argument("run_scheme: initial free energy not finite");

    unsigned K = static_cast<unsigned>(std::ceil(T / h - 1e-12));
    if (K == 0) K = 1;

    SchemeState state;
    state.h = h;
    state.T = T;
    state.steps = K;
    state.densities.push_back(rho0);
    StepRecord rec0;
    rec0.free_energy_total = fe0.total;
    rec0.free_energy_potential = fe0.potential;
    rec0.free_energy_entropy = fe0.entropy;
    rec0.positive_entropy = fe0.positive_entropy;
    rec0.second_moment = rho0.second_moment();
    state.records.push_back(rec0);

    std::vector<double> C = cost_matrix(eval, h, rho0, rho0);
    std::vector<double> warm_f, warm_g;
    auto guard = [](const std::vector<double>& history, double value, const char* what,
                    unsigned step) {
        if (history.size() < 4) return;
        std::vector<double> sorted = history;
        std::sort(sorted.begin(), sorted.end());
        double median = sorted[sorted.size() / 2];
        if (value > 10.0 * std::max(median, 1e-8))
            throw std::runtime_error(std::string("run_scheme: monitor blowup (") + what +
                                     ") at step " + std::to_string(step));
    };
    std::vector<double> m2_hist{rec0.second_moment}, s_hist{rec0.positive_entropy}, w_hist;
    for (unsigned k = 1; k <= K; ++k) {
        JkoStepResult step;
        try {
            step = jko_step_on_cost(C, state.densities.back(), h, V, config,
                                    /*materialize_plan=*/false,
                                    warm_f.empty() ? nullptr : &warm_f,
                                    warm_g.empty() ? nullptr : &warm_g);
        } catch (const std::exception& e) {
            throw std::runtime_error("run_scheme: step " + std::to_string(k) + " failed: " +
                                     e.what());
        }
        warm_f = step.plan.potential_source;
        warm_g = step.plan.potential_target;
        guard(m2_hist, step.record.second_moment, "second moment", k);
        guard(s_hist, step.record.positive_entropy, "positive entropy", k);
        guard(w_hist, step.record.transport_cost, "step transport cost", k);
        m2_hist.push_back(step.record.second_moment);
        s_hist.push_back(step.record.positive_entropy);
        w_hist.push_back(step.record.transport_cost);
        state.densities.push_back(std::move(step.rho_next));
        state.records.push_back(step.record);
    }
    return state;
}

// ---------------------------------------------------------------------------
// Smooth bumps and the Euler-Lagrange residual
// ---------------------------------------------------------------------------

namespace {

double bump1(double u) {
    double q = 1.0 - u * u;
    if (q <= 0.0) return 0.0;
    return std::exp(1.0 - 1.0 / q);
}

double bump1_d(double u) {
    double q = 1.0 - u * u;
    if (q <= 0.0) return 0.0;
    double g = -2.0 * u / (q * q);
    return bump1(u) * g;
}

double bump1_dd(double u) {
    double q = 1.0 - u * u;
    if (q <= 0.0) return 0.0;
    double g = -2.0 * u / (q * q);
    double gp = -2.0 / (q * q) - 8.0 * u * u / (q * q * q);
    return bump1(u) * (g * g + gp);
}

}  // namespace

SmoothBump::SmoothBump(std::vector<double> center, std::vector<double> radius)
    : center_(std::move(center)), radius_(std::move(radius)) {
    if (center_.size() != radius_.size() || center_.empty())
        throw std::invalid_argument("SmoothBump: center/radius mismatch");
    for (double r : radius_)
        if (!(r > 0.0)) throw std::invalid_argument("SmoothBump: radius must be positive");
}

double SmoothBump::value(const std::vector<double>& x) const {
    double v = 1.0;
    for (std::size_t k = 0; k < center_.size(); ++k) {
        v *= bump1((x[k] - center_[k]) / radius_[k]);
        if (v == 0.0) return 0.0;
    }
    return v;
}

double SmoothBump::partial(const std::vector<double>& x, std::size_t axis) const {
    double v = 1.0;
    for (std::size_t k = 0; k < center_.size(); ++k) {
        double u = (x[k] - center_[k]) / radius_[k];
        v *= (k == axis) ? bump1_d(u) / radius_[k] : bump1(u);
        if (v == 0.0) return 0.0;
    }
    return v;
}

double SmoothBump::second_partial(const std::vector<double>& x, std::size_t axis) const {
    double v = 1.0;
    for (std::size_t k = 0; k < center_.size(); ++k) {
        double u = (x[k] - center_[k]) / radius_[k];
        v *= (k == axis) ? bump1_dd(u) / (radius_[k] * radius_[k]) : bump1(u);
        if (v == 0.0) return 0.0;
    }
    return v;
}

double euler_lagrange_residual(const CostEvaluator& eval, const GridMeasure& rho_prev,
                               const GridMeasure& rho_next, const TransportPlan& plan, double h,
                               const PotentialSpec& V, const SmoothBump& phi) {
    unsigned n = eval.order(), d = eval.dim();
    if (d != 1) throw std::invalid_argument("euler_lagrange_residual: d must be 1");
    std::size_t dim = rho_prev.dim;
    if (dim != n) throw std::invalid_argument("euler_lagrange_residual: dimension mismatch");
    if (plan.matrix.empty())
        throw std::invalid_argument("euler_lagrange_residual: plan not materialized");
    // phi must vanish near the grid boundary
    for (std::size_t k = 0; k < dim; ++k) {
        double margin = rho_prev.grid.spacing(k);
        if (phi.center()[k] - phi.radius()[k] <= rho_prev.grid.lo[k] + margin ||
            phi.center()[k] + phi.radius()[k] >= rho_prev.grid.hi[k] - margin)
            throw std::invalid_argument("euler_lagrange_residual: phi support touches boundary");
    }

    std::size_t N = rho_prev.size();
    std::vector<double> xi(dim), yj(dim);
    // gradient of phi at every target point (reused across the plan rows)
    std::vector<double> grad_phi(N * dim);
    std::vector<char> inside(N, 0);
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < dim; ++k) yj[k] = rho_next.points[j * dim + k];
        double val = phi.value(yj);
        if (val == 0.0) {
            bool any = false;
            for (std::size_t k = 0; k < dim; ++k) {
                grad_phi[j * dim + k] = phi.partial(yj, k);
                if (grad_phi[j * dim + k] != 0.0) any = true;
            }
            inside[j] = any;
        } else {
            inside[j] = 1;
            for (std::size_t k = 0; k < dim; ++k) grad_phi[j * dim + k] = phi.partial(yj, k);
        }
    }

    double term_plan = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double* row = plan.matrix.data() + i * N;
        for (std::size_t k = 0; k < dim; ++k) xi[k] = rho_prev.points[i * dim + k];
        for (std::size_t j = 0; j < N; ++j) {
            if (!inside[j] || row[j] == 0.0) continue;
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k)
                dot += (rho_next.points[j * dim + k] - xi[k]) * grad_phi[j * dim + k];
            term_plan += row[j] * dot;
        }
    }
    term_plan /= h;

    double term_transport = 0.0, term_potential = 0.0, term_laplace = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        double w = rho_next.weights[j];
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < dim; ++k) yj[k] = rho_next.points[j * dim + k];
        for (unsigned i = 2; i <= n; ++i)
            term_transport += w * yj[i - 1] * phi.partial(yj, i - 2);
        term_potential += w * V.grad(yj[dim - 1]) * phi.partial(yj, dim - 1);
        term_laplace += w * phi.second_partial(yj, dim - 1);
    }
    return term_plan - term_transport + term_potential - term_laplace;
}

// ---------------------------------------------------------------------------
// Convergence report and equicontinuity monitor
// ---------------------------------------------------------------------------

bool ConvergenceReport::monotone_decreasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].l1_error < rows[i - 1].l1_error)) return false;
    return !rows.empty();
}

ConvergenceReport convergence_report(const CostEvaluator& eval, const GridMeasure& rho0,
                                     const PotentialSpec& V, double T,
                                     const std::vector<double>& h_list, SchemeReference reference,
                                     const JkoConfig& config) {
    GridMeasure ref;
    if (reference == SchemeReference::kernel_evolution) {
        if (!V.is_zero())
            throw std::invalid_argument(
                "convergence_report: kernel reference requires V == 0");
        Kernel kernel(eval.order(), eval.dim());
        ref = kernel.evolve_by_kernel(rho0, T).measure;
    } else {
        if (eval.order() != 1 || eval.dim() != 1 || !V.is_standard_quadratic())
            throw std::invalid_argument(
                "convergence_report: analytic OU reference requires n=1, d=1, V=|x|^2/2");
        double mu = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < rho0.size(); ++j) {
            mu += rho0.weights[j] * rho0.points[j];
            m2 += rho0.weights[j] * rho0.points[j] * rho0.points[j];
        }
        double var = m2 - mu * mu;
        double muT = mu * std::exp(-T);
        double varT = 1.0 + (var - 1.0) * std::exp(-2.0 * T);
        ref = GridMeasure::gaussian_on_grid(rho0.grid, {muT}, {varT});
    }

    ConvergenceReport report;
    report.reference = reference;
    for (double h : h_list) {
        JkoConfig cfg = config;
        SchemeState state = run_scheme(eval, rho0, h, T, V, cfg);
        ConvergenceRow row;
        row.h = h;
        row.l1_error = state.interpolate(T).l1_distance(ref);
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < state.records.size(); ++k) {
            row.step_cost_sum += state.records[k].transport_cost;
            double slack = state.records[k].free_energy_total +
                           state.records[k].transport_cost / (2.0 * h) -
                           state.records[k - 1].free_energy_total;
            worst = std::max(worst, slack);
        }
        row.worst_dissipation_slack = worst;
        row.energy_dissipation_ok = worst <= 1e-7;
        if (!report.rows.empty() && report.rows.back().l1_error > 0.0 && row.l1_error > 0.0)
            row.observed_order =
                std::log2(report.rows.back().l1_error / row.l1_error) /
                std::log2(report.rows.back().h / row.h);
        report.rows.push_back(row);
    }
    return report;
}

namespace {

GridMeasure coarsen_measure(const GridMeasure& mu, std::size_t cap) {
    if (mu.size() <= cap || mu.grid.dims() == 0) return mu;
    std::size_t dims = mu.grid.dims();
    std::vector<unsigned> factor(dims, 1), coarse_cells(dims);
    double per_axis = std::pow(static_cast<double>(cap), 1.0 / dims);
    for (std::size_t k = 0; k < dims; ++k) {
        factor[k] = static_cast<unsigned>(
            std::ceil(mu.grid.cells[k] / std::max(1.0, std::floor(per_axis))));
        factor[k] = std::max(1u, factor[k]);
        coarse_cells[k] = (mu.grid.cells[k] + factor[k] - 1) / factor[k];
    }
    std::size_t m = 1;
    for (std::size_t k = 0; k < dims; ++k) m *= coarse_cells[k];
    std::vector<double> w(m, 0.0), centroid(m * dims, 0.0);
    for (std::size_t flat = 0; flat < mu.size(); ++flat) {
        std::size_t rem = flat, macro = 0, stride = 1;
        for (std::size_t k = 0; k < dims; ++k) {
            unsigned ik = static_cast<unsigned>(rem % mu.grid.cells[k]);
            rem /= mu.grid.cells[k];
            macro += (ik / factor[k]) * stride;
            stride *= coarse_cells[k];
        }
        double wt = mu.weights[flat];
        w[macro] += wt;
        for (std::size_t k = 0; k < dims; ++k)
            centroid[macro * dims + k] += wt * mu.points[flat * dims + k];
    }
    std::vector<double> pts;
    std::vector<double> wts;
    for (std::size_t c = 0; c < m; ++c) {
        if (w[c] <= 0.0) continue;
        wts.push_back(w[c]);
        for (std::size_t k = 0; k < dims; ++k) pts.push_back(centroid[c * dims + k] / w[c]);
    }
    return GridMeasure::from_points(dims, std::move(pts), std::move(wts));
}

}  // namespace

EquicontinuityTable equicontinuity_monitor(const SchemeState& state, std::size_t coarse_cap) {
    EquicontinuityTable table;
    std::size_t K = state.densities.size() - 1;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < K; ++k) pairs.push_back({k, k + 1});
    if (K >= 2) {
        pairs.push_back({0, K / 2});
        pairs.push_back({0, K});
        pairs.push_back({K / 2, K});
    }
    std::vector<double> ratios;
    for (auto [k1, k2] : pairs) {
        if (k1 == k2) continue;
        GridMeasure a = state.densities[k1];
        GridMeasure b = state.densities[k2];
        if (a.dim > 1) {
            a = coarsen_measure(a, coarse_cap);
            b = coarsen_measure(b, coarse_cap);
        }
        EquicontinuityRow row;
        row.t1 = k1 * state.h;
        row.t2 = k2 * state.h;
        row.w2_squared = wasserstein2_euclidean(a, b);
        row.ratio = row.w2_squared / (std::abs(row.t2 - row.t1) + state.h);
        ratios.push_back(row.ratio);
        table.rows.push_back(row);
    }
    if (!ratios.empty()) {
        std::vector<double> sorted = ratios;
        std::sort(sorted.begin(), sorted.end());
        table.median_ratio = sorted[sorted.size() / 2];
        table.max_ratio = sorted.back();
    }
    return table;
}

}  // namespace msdflow
