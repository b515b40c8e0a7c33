// msdflow command line: verification suites, kernel evaluation, scheme runs.
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "msdflow/identities.hpp"
#include "msdflow/jko.hpp"
#include "msdflow/kernel.hpp"
#include "msdflow/parallel.hpp"
#include "msdflow/transport.hpp"

using json = nlohmann::ordered_json;
using namespace msdflow;

namespace {

std::vector<double> parse_vector(const std::string& csv) {
    std::vector<double> v;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            v.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) v.push_back(std::stod(cur));
    return v;
}

void emit(const json& j, const std::string& out_dir, const std::string& filename) {
    std::string text = j.dump(2);
    if (out_dir.empty()) {
        std::cout << text << "\n";
    } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir + "/" + filename);
        f << text << "\n";
        std::cout << "wrote " << out_dir + "/" + filename << "\n";
    }
}

int cmd_identities(unsigned n_max, bool self_test_corrupt, const std::string& out_dir) {
    json report;
    report["command"] = "identities";
    report["n_max"] = n_max;
    report["self_test_corrupt"] = self_test_corrupt;
    bool all_passed = true;
    bool corruption_detected = false;
    json orders = json::array();
    for (unsigned n = 1; n <= n_max; ++n) {
        IdentityReport rep = identity_suite(n, self_test_corrupt);
        json checks = json::array();
        for (const auto& c : rep.checks) {
            json jc;
            jc["name"] = c.name;
            jc["passed"] = c.passed;
            if (!c.detail.empty()) jc["detail"] = c.detail;
            checks.push_back(jc);
            all_passed = all_passed && c.passed;
            corruption_detected = corruption_detected || !c.passed;
        }
        json jo;
        jo["n"] = n;
        jo["all_passed"] = rep.all_passed();
        jo["checks"] = checks;
        orders.push_back(jo);
    }
    report["orders"] = orders;
    report["all_passed"] = all_passed;
    bool ok = self_test_corrupt ? corruption_detected : all_passed;
    if (self_test_corrupt) report["corruption_detected"] = corruption_detected;
    report["result"] = ok ? "pass" : "fail";
    emit(report, out_dir, "identities.json");
    return ok ? 0 : 1;
}

int cmd_cost(unsigned n, unsigned d, double t, const std::string& xs, const std::string& ys,
             const std::string& out_dir) {
    CostEvaluator eval(n, d);
    std::vector<double> x = parse_vector(xs), y = parse_vector(ys);
    json out;
    out["command"] = "cost";
    out["n"] = n;
    out["d"] = d;
    out["t"] = t;
    out["x"] = x;
    out["y"] = y;
    out["cost"] = eval.cost(t, x, y);
    out["grad_x"] = eval.cost_grad_x(t, x, y);
    out["grad_y"] = eval.cost_grad_y(t, x, y);
    out["cost_dt"] = eval.cost_dt(t, x, y);
    out["laplacian_xn"] = eval.cost_laplacian_xn(t);
    out["transport_term"] = eval.cost_transport_term(t, x, y);
    out["pde_residual"] = eval.verify_cost_pde(t, x, y);
    emit(out, out_dir, "cost.json");
    return 0;
}

int cmd_kernel(unsigned n, unsigned d, double t, const std::string& xs, const std::string& ys,
               bool normalize_check, bool dirac_check, const std::string& out_dir) {
    Kernel kernel(n, d);
    std::vector<double> x = parse_vector(xs), y = parse_vector(ys);
    json out;
    out["command"] = "kernel";
    out["n"] = n;
    out["d"] = d;
    out["t"] = t;
    out["beta"] = kernel.beta();
    out["phi"] = kernel.phi(t, x, y);
    out["pde_residual"] = kernel.pde_residual(t, x, y, 1e-4);
    if (normalize_check) {
        out["normalization"] = kernel.normalization_integral(t, y, 24);
    }
    if (dirac_check) {
        std::vector<double> yv = y;
        auto rows = kernel.dirac_limit_check(
            yv, {0.4, 0.2, 0.1, 0.05, 0.01},
            [&](const std::vector<double>& p) {
                double s = 0.0;
                for (std::size_t k = 0; k < p.size(); ++k)
                    s += (p[k] - yv[k]) * (p[k] - yv[k]);
                return std::exp(-s);
            });
        json table = json::array();
        for (const auto& r : rows) {
            json jr;
            jr["t"] = r.t;
            jr["value"] = r.value;
            jr["error"] = r.error;
            jr["quadrature_converged"] = r.quadrature_converged;
            table.push_back(jr);
        }
        out["dirac_table"] = table;
    }
    emit(out, out_dir, "kernel.json");
    return 0;
}

void write_density_csv(const std::string& path, const GridMeasure& rho) {
    std::ofstream f(path);
    double vol = rho.cell_volume();
    for (std::size_t k = 0; k < rho.dim; ++k) f << "x" << (k + 1) << ",";
    f << "density\n";
    char buf[64];
    for (std::size_t i = 0; i < rho.size(); ++i) {
        for (std::size_t k = 0; k < rho.dim; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,", rho.points[i * rho.dim + k]);
            f << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", vol > 0 ? rho.weights[i] / vol : rho.weights[i]);
        f << buf;
    }
}

int cmd_jko(const std::string& config_path, const std::string& out_dir) {
    std::ifstream cf(config_path);
    if (!cf) {
        std::cerr << "config file not found: " << config_path << "\n";
        return 2;
    }
    json cfg;
    try {
        cf >> cfg;
    } catch (const std::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return 2;
    }

    unsigned n = 1;
    PotentialSpec V = PotentialSpec::zero();
    TensorGrid grid;
    GridMeasure rho0;
    double T = 0.0;
    std::vector<double> h_list;
    JkoConfig jcfg;
    std::string reference = "none";
    try {
        n = cfg.at("n").get<unsigned>();
        unsigned d = cfg.value("d", 1u);
        if (d != 1) throw std::invalid_argument("the scheme runs d = 1");
        T = cfg.at("T").get<double>();
        if (cfg.contains("h_list"))
            h_list = cfg.at("h_list").get<std::vector<double>>();
        else
            h_list = {cfg.at("h").get<double>()};
        auto g = cfg.at("grid");
        grid = TensorGrid(g.at("lo").get<std::vector<double>>(),
                          g.at("hi").get<std::vector<double>>(),
                          g.at("cells").get<std::vector<unsigned>>());
        if (grid.dims() != n) throw std::invalid_argument("grid dims must equal n (d = 1)");
        auto r0 = cfg.at("rho0");
        rho0 = GridMeasure::gaussian_on_grid(grid, r0.at("mean").get<std::vector<double>>(),
                                             r0.at("variance").get<std::vector<double>>());
        if (cfg.contains("potential")) {
            auto p = cfg.at("potential");
            std::string type = p.at("type").get<std::string>();
            if (type == "zero")
                V = PotentialSpec::zero();
            else if (type == "quadratic")
                V = PotentialSpec::quadratic(p.value("a", 1.0));
            else if (type == "polynomial")
                V = PotentialSpec::polynomial(p.at("coeffs").get<std::vector<double>>());
            else
                throw std::invalid_argument("unknown potential type: " + type);
        }
        jcfg.epsilon = cfg.value("epsilon", 1e-2);
        jcfg.marginal_tol = cfg.value("marginal_tol", 1e-8);
        jcfg.max_sweeps = cfg.value("max_sweeps", 4000);
        reference = cfg.value("reference", std::string("none"));
    } catch (const std::exception& e) {
        std::cerr << "config validation error: " << e.what() << "\n";
        return 2;
    }

    CostEvaluator eval(n, 1);
    json summary;
    summary["command"] = "jko";
    summary["config"] = cfg;

    std::optional<GridMeasure> ref;
    if (reference == "kernel") {
        if (!V.is_zero()) {
            summary["reference_note"] = "kernel reference requires V == 0; skipped";
        } else {
            Kernel kernel(n, 1);
            ref = kernel.evolve_by_kernel(rho0, T).measure;
        }
    } else if (reference == "ou") {
        if (n != 1 || !V.is_standard_quadratic()) {
            summary["reference_note"] = "analytic OU reference requires n=1, V=|x|^2/2; skipped";
        } else {
            double mu = 0.0, m2 = 0.0;
            for (std::size_t j = 0; j < rho0.size(); ++j) {
                mu += rho0.weights[j] * rho0.points[j];
                m2 += rho0.weights[j] * rho0.points[j] * rho0.points[j];
            }
            double var = m2 - mu * mu;
            ref = GridMeasure::gaussian_on_grid(
                grid, {mu * std::exp(-T)}, {1.0 + (var - 1.0) * std::exp(-2.0 * T)});
        }
    } else if (reference != "none") {
        std::cerr << "unknown reference: " << reference << "\n";
        return 2;
    }

    std::vector<double> save_times = cfg.value("save_times", std::vector<double>{T});
    json runs = json::array();
    // epsilon_scale_h, when set, chooses epsilon = scale * h per run
    double eps_scale = cfg.value("epsilon_scale_h", 0.0);
    try {
        for (double h : h_list) {
            if (eps_scale > 0.0) jcfg.epsilon = eps_scale * h;
            SchemeState st = run_scheme(eval, rho0, h, T, V, jcfg);
            json jr;
            jr["h"] = h;
            json recs = json::array();
            for (std::size_t k = 0; k < st.records.size(); ++k) {
                const StepRecord& r = st.records[k];
                json rec;
                rec["k"] = k;
                rec["free_energy"] = r.free_energy_total;
                rec["potential_part"] = r.free_energy_potential;
                rec["entropy_part"] = r.free_energy_entropy;
                rec["positive_entropy"] = r.positive_entropy;
                rec["transport_cost"] = r.transport_cost;
                rec["second_moment"] = r.second_moment;
                rec["inner_sweeps"] = r.inner_sweeps;
                recs.push_back(rec);
            }
            jr["records"] = recs;
            if (ref) jr["l1_error_at_T"] = st.interpolate(T).l1_distance(*ref);
            if (cfg.value("equicontinuity", false)) {
                EquicontinuityTable tab = equicontinuity_monitor(st);
                jr["equicontinuity_max_ratio"] = tab.max_ratio;
                jr["equicontinuity_median_ratio"] = tab.median_ratio;
            }
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                for (double ts : save_times) {
                    const GridMeasure& rho = st.interpolate(ts);
                    char name[128];
                    std::snprintf(name, sizeof name, "%s/density_h%g_t%g.csv", out_dir.c_str(), h,
                                  ts);
                    write_density_csv(name, rho);
                }
            }
            runs.push_back(jr);
        }
    } catch (const std::exception& e) {
        summary["error"] = e.what();
        summary["runs"] = runs;
        emit(summary, out_dir, "jko_summary.json");
        std::cerr << "scheme run failed: " << e.what() << "\n";
        return 1;
    }
    summary["runs"] = runs;

    if (ref && runs.size() >= 2) {
        json conv = json::array();
        double prev_err = 0.0, prev_h = 0.0;
        bool monotone = true;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            double err = runs[i]["l1_error_at_T"].get<double>();
            double h = runs[i]["h"].get<double>();
            json row;
            row["h"] = h;
            row["l1_error"] = err;
            if (i > 0) {
                row["observed_order"] = std::log2(prev_err / err) / std::log2(prev_h / h);
                monotone = monotone && err < prev_err;
            }
            conv.push_back(row);
            prev_err = err;
            prev_h = h;
        }
        summary["convergence_table"] = conv;
        summary["errors_decrease_monotonically"] = monotone;
    }
    emit(summary, out_dir, "jko_summary.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-squared-derivative cost, degenerate Kolmogorov kernels, and the "
                 "minimizing-movement scheme"};
    app.require_subcommand(1);

    unsigned seed = 0;
    std::string out_dir;
    unsigned threads = 0;
    app.add_option("--seed", seed, "seed for any sampled diagnostics (reports are deterministic)");
    app.add_option("--out-dir", out_dir, "write reports under this directory instead of stdout");
    app.add_option("--threads", threads,
                   "worker threads (default: hardware; env MSDFLOW_THREADS overrides)");

    auto* ident = app.add_subcommand("identities", "exact-arithmetic identity suite");
    unsigned n_max = 6;
    bool corrupt = false;
    ident->add_option("--n-max", n_max, "largest order to verify")->check(CLI::Range(1, 12));
    ident->add_flag("--self-test-corrupt", corrupt,
                    "inject a fault and require the suite to detect it");

    auto* cost = app.add_subcommand("cost", "evaluate the cost and its closed-form derivatives");
    unsigned cn = 2, cd = 1;
    double ct = 1.0;
    std::string cx, cy;
    cost->add_option("--n", cn, "derivative order")->required();
    cost->add_option("--d", cd, "spatial dimension");
    cost->add_option("--t", ct, "time horizon (> 0)")->required();
    cost->add_option("--x", cx, "comma-separated initial state, n*d entries")->required();
    cost->add_option("--y", cy, "comma-separated final state, n*d entries")->required();

    auto* kern = app.add_subcommand("kernel", "evaluate the fundamental solution");
    unsigned kn = 2, kd = 1;
    double kt = 1.0;
    std::string kx, ky;
    bool knorm = false, kdirac = false;
    kern->add_option("--n", kn, "derivative order")->required();
    kern->add_option("--d", kd, "spatial dimension");
    kern->add_option("--t", kt, "time (> 0)")->required();
    kern->add_option("--x", kx, "comma-separated x, n*d entries")->required();
    kern->add_option("--y", ky, "comma-separated y, n*d entries")->required();
    kern->add_flag("--normalize-check", knorm, "verify int Phi dx = 1 by quadrature");
    kern->add_flag("--dirac-check", kdirac, "run the small-time Dirac sweep");

    auto* jko = app.add_subcommand("jko", "run the minimizing-movement scheme from a config");
    std::string config_path;
    jko->add_option("--config", config_path, "JSON configuration file")->required();

    for (auto* sub : {ident, cost, kern, jko}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (threads) set_thread_count(threads);
    (void)seed;

    try {
        if (*ident) return cmd_identities(n_max, corrupt, out_dir);
        if (*cost) return cmd_cost(cn, cd, ct, cx, cy, out_dir);
        if (*kern) return cmd_kernel(kn, kd, kt, kx, ky, knorm, kdirac, out_dir);
        if (*jko) return cmd_jko(config_path, out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
