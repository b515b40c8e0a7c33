#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msdflow/identities.hpp"
#include "msdflow/jko.hpp"
#include "msdflow/kernel.hpp"
#include "msdflow/parallel.hpp"
#include "msdflow/transport.hpp"

namespace py = pybind11;
using namespace msdflow;

namespace {

py::array_t<double> plan_to_array(const TransportPlan& plan) {
    py::array_t<double> a({plan.rows, plan.cols});
    std::copy(plan.matrix.begin(), plan.matrix.end(), a.mutable_data());
    return a;
}

std::vector<double> flatten(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "mean-squared-derivative cost, degenerate Kolmogorov kernels, and the "
              "minimizing-movement scheme";

    m.def("set_thread_count", &set_thread_count, py::arg("n"));

    m.def(
        "identity_suite",
        [](unsigned n, bool corrupt) {
            IdentityReport rep = identity_suite(n, corrupt);
            std::vector<std::tuple<std::string, bool, std::string>> out;
            for (const auto& c : rep.checks) out.emplace_back(c.name, c.passed, c.detail);
            return out;
        },
        py::arg("n"), py::arg("corrupt_for_selftest") = false,
        "Exact rational verification of every closed-form matrix identity at order n; "
        "returns (name, passed, detail) triples.");

    py::class_<CostEvaluator>(m, "CostEvaluator")
        .def(py::init<unsigned, unsigned>(), py::arg("n"), py::arg("d") = 1)
        .def_property_readonly("n", &CostEvaluator::order)
        .def_property_readonly("d", &CostEvaluator::dim)
        .def("cost", &CostEvaluator::cost, py::arg("t"), py::arg("x"), py::arg("y"))
        .def("grad_x", &CostEvaluator::cost_grad_x, py::arg("t"), py::arg("x"), py::arg("y"))
        .def("grad_y", &CostEvaluator::cost_grad_y, py::arg("t"), py::arg("x"), py::arg("y"))
        .def("cost_dt", &CostEvaluator::cost_dt, py::arg("t"), py::arg("x"), py::arg("y"))
        .def("laplacian_xn", &CostEvaluator::cost_laplacian_xn, py::arg("t"))
        .def("transport_term", &CostEvaluator::cost_transport_term, py::arg("t"), py::arg("x"),
             py::arg("y"))
        .def("pde_residual", &CostEvaluator::verify_cost_pde, py::arg("t"), py::arg("x"),
             py::arg("y"))
        .def("freeflow", &CostEvaluator::freeflow, py::arg("t"), py::arg("x"))
        .def("comparability_constant", &CostEvaluator::comparability_constant, py::arg("t_max"));

    py::class_<Kernel>(m, "Kernel")
        .def(py::init<unsigned, unsigned>(), py::arg("n"), py::arg("d") = 1)
        .def_property_readonly("beta", &Kernel::beta)
        .def("phi", &Kernel::phi, py::arg("t"), py::arg("x"), py::arg("y"))
        .def("normalization_integral", &Kernel::normalization_integral, py::arg("t"),
             py::arg("y"), py::arg("nodes_per_axis") = 16)
        .def("pde_residual", &Kernel::pde_residual, py::arg("t"), py::arg("x"), py::arg("y"),
             py::arg("fd_step") = 1e-4)
        .def(
            "evolve_by_kernel",
            [](const Kernel& k, const GridMeasure& rho0, double t, unsigned subsamples) {
                EvolveResult res = k.evolve_by_kernel(rho0, t, subsamples);
                return py::make_tuple(res.measure, res.mass_error);
            },
            py::arg("rho0"), py::arg("t"), py::arg("subsamples") = 0);

    m.def("beta_constant", &Kernel::beta_constant, py::arg("n"), py::arg("d"));

    py::class_<TensorGrid>(m, "TensorGrid")
        .def(py::init<std::vector<double>, std::vector<double>, std::vector<unsigned>>(),
             py::arg("lo"), py::arg("hi"), py::arg("cells"))
        .def_property_readonly("cell_volume", &TensorGrid::cell_volume)
        .def_property_readonly("num_points", &TensorGrid::num_points);

    py::class_<GridMeasure>(m, "GridMeasure")
        .def_static("gaussian_on_grid", &GridMeasure::gaussian_on_grid, py::arg("grid"),
                    py::arg("mean"), py::arg("variance"))
        .def_static(
            "from_points",
            [](std::size_t dim, const py::array_t<double>& pts, const py::array_t<double>& wts) {
                return GridMeasure::from_points(
                    dim, flatten(py::array_t<double, py::array::c_style | py::array::forcecast>(pts)),
                    flatten(py::array_t<double, py::array::c_style | py::array::forcecast>(wts)));
            },
            py::arg("dim"), py::arg("points"), py::arg("weights"))
        .def_property_readonly("weights",
                               [](const GridMeasure& g) {
                                   return py::array_t<double>(g.weights.size(), g.weights.data());
                               })
        .def_property_readonly("points",
                               [](const GridMeasure& g) {
                                   py::array_t<double> a({g.size(), g.dim});
                                   std::copy(g.points.begin(), g.points.end(), a.mutable_data());
                                   return a;
                               })
        .def("second_moment", &GridMeasure::second_moment)
        .def("l1_distance", &GridMeasure::l1_distance, py::arg("other"));

    py::class_<PotentialSpec>(m, "PotentialSpec")
        .def_static("zero", &PotentialSpec::zero)
        .def_static("quadratic", &PotentialSpec::quadratic, py::arg("a"))
        .def_static("polynomial", &PotentialSpec::polynomial, py::arg("coeffs"))
        .def("value", &PotentialSpec::value, py::arg("xn"))
        .def("grad", &PotentialSpec::grad, py::arg("xn"));

    py::class_<JkoConfig>(m, "JkoConfig")
        .def(py::init<>())
        .def_readwrite("epsilon", &JkoConfig::epsilon)
        .def_readwrite("marginal_tol", &JkoConfig::marginal_tol)
        .def_readwrite("objective_rel_tol", &JkoConfig::objective_rel_tol)
        .def_readwrite("max_sweeps", &JkoConfig::max_sweeps);

    py::class_<StepRecord>(m, "StepRecord")
        .def_readonly("free_energy", &StepRecord::free_energy_total)
        .def_readonly("potential_part", &StepRecord::free_energy_potential)
        .def_readonly("entropy_part", &StepRecord::free_energy_entropy)
        .def_readonly("positive_entropy", &StepRecord::positive_entropy)
        .def_readonly("transport_cost", &StepRecord::transport_cost)
        .def_readonly("second_moment", &StepRecord::second_moment)
        .def_readonly("inner_sweeps", &StepRecord::inner_sweeps);

    py::class_<SchemeState>(m, "SchemeState")
        .def_readonly("h", &SchemeState::h)
        .def_readonly("T", &SchemeState::T)
        .def_readonly("steps", &SchemeState::steps)
        .def_readonly("densities", &SchemeState::densities)
        .def_readonly("records", &SchemeState::records)
        .def("interpolate", &SchemeState::interpolate, py::arg("t"),
             py::return_value_policy::reference_internal);

    m.def(
        "free_energy",
        [](const GridMeasure& rho, const PotentialSpec& V) {
            FreeEnergy fe = free_energy(rho, V);
            return py::make_tuple(fe.total, fe.potential, fe.entropy, fe.positive_entropy);
        },
        py::arg("rho"), py::arg("V"),
        "Returns (total, potential part, entropy part, positive entropy part).");

    m.def("run_scheme", &run_scheme, py::arg("eval"), py::arg("rho0"), py::arg("h"), py::arg("T"),
          py::arg("V"), py::arg("config"));

    m.def(
        "solve_exact",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& C,
           const std::vector<double>& p, const std::vector<double>& q) {
            TransportPlan plan = solve_exact(flatten(C), p, q);
            return py::make_tuple(plan_to_array(plan), plan.cost_value);
        },
        py::arg("cost"), py::arg("p"), py::arg("q"),
        "Exact transportation LP; returns (plan, cost).");

    m.def(
        "solve_entropic",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& C,
           const std::vector<double>& p, const std::vector<double>& q, double epsilon,
           int max_iters, double tol) {
            SinkhornOptions opt;
            opt.epsilon = epsilon;
            opt.max_iters = max_iters;
            opt.tol = tol;
            TransportPlan plan = solve_entropic(flatten(C), p, q, opt);
            return py::make_tuple(plan_to_array(plan), plan.cost_value, plan.converged,
                                  plan.marginal_violation);
        },
        py::arg("cost"), py::arg("p"), py::arg("q"), py::arg("epsilon"),
        py::arg("max_iters") = 20000, py::arg("tol") = 1e-9,
        "Log-domain Sinkhorn; returns (plan, cost, converged, marginal_violation).");

    m.def("wasserstein2_euclidean", &wasserstein2_euclidean, py::arg("source"), py::arg("target"));

    m.attr("__version__") = "0.1.0";
}
