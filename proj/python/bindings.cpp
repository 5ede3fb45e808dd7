#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "stein/core.hpp"
#include "stein/coupling.hpp"
#include "stein/ctmc.hpp"
#include "stein/error.hpp"
#include "stein/interchange.hpp"
#include "stein/interpolator.hpp"
#include "stein/io.hpp"
#include "stein/metrics.hpp"
#include "stein/mm1.hpp"

namespace py = pybind11;
using namespace stein;

namespace {

GridFunction line_function(const std::vector<double>& values, double delta, Index lower) {
    if (values.empty()) throw ArgumentError("grid values must not be empty");
    return GridFunction(LatticeSpec::line(delta, lower, lower + static_cast<Index>(values.size()) - 1), values);
}

std::vector<double> to_vector(const GridFunction& f) { return {f.values().begin(), f.values().end()}; }

py::dict estimate_dict(const CouplingEstimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["stderr"] = e.stderr_;
    d["replications"] = e.replications;
    d["overruns"] = e.overruns;
    if (e.tau_mean) d["tau_mean"] = *e.tau_mean;
    if (e.tau_stderr) d["tau_stderr"] = *e.tau_stderr;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lattice interpolation, CTMC Poisson solvers and M/M/1 Stein-factor tools.";
    m.attr("__version__") = stein::version();

    auto base = py::register_exception<Error>(m, "SteinError", PyExc_RuntimeError);
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<IndexRangeError>(m, "IndexRangeError", base.ptr());
    py::register_exception<UndefinedDerivativeError>(m, "UndefinedDerivativeError", base.ptr());
    py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());

    m.def("weight", &weight, py::arg("i"), py::arg("t"), "J_i(t), the interpolation weight of node k+i.");
    m.def(
        "weight_coefficients",
        [] {
            std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> rows;
            for (const auto& row : WeightTable::standard().exact()) {
                auto& r = rows.emplace_back();
                for (const auto& c : row) r.emplace_back(c.num(), c.den());
            }
            return rows;
        },
        "Exact (numerator, denominator) coefficients of t^0..t^7 for J_0..J_4.");
    m.def(
        "interpolate",
        [](const std::vector<double>& values, double delta, double x, int deriv, Index lower) {
            return Interpolant(line_function(values, delta, lower)).derivative_1d(x, deriv);
        },
        py::arg("values"), py::arg("delta"), py::arg("x"), py::arg("deriv") = 0, py::arg("lower") = 0,
        "d^deriv/dx^deriv of the spline of the grid values f(delta*(lower+i)) at x.");

    m.def(
        "sample_dlip",
        [](Index n, double delta, std::uint64_t seed) { return to_vector(sample_dlip(LatticeSpec::line(delta, 0, n), seed)); },
        py::arg("n"), py::arg("delta"), py::arg("seed"), "Random h on {0..n} with |Delta h| <= delta.");
    m.def(
        "sample_dlip_higher",
        [](Index n, double delta, int max_order, std::uint64_t seed) {
            return to_vector(sample_dlip_higher(LatticeSpec::line(delta, 0, n), max_order, seed));
        },
        py::arg("n"), py::arg("delta"), py::arg("max_order"), py::arg("seed"));

    m.def(
        "birth_death_poisson",
        [](double lambda, double mu, double delta, const std::vector<double>& h) {
            return to_vector(birth_death_poisson(lambda, mu, delta, line_function(h, delta, 0)).f);
        },
        py::arg("lam"), py::arg("mu"), py::arg("delta"), py::arg("h"), "Closed-form M/M/1 Poisson solution, f(0) = 0.");
    m.def(
        "solve_poisson_mm1",
        [](double lambda, double mu, double delta, const std::vector<double>& h) {
            const auto kernel = mm1_kernel(lambda, mu, delta, static_cast<Index>(h.size()) - 1);
            return to_vector(solve_poisson(kernel, line_function(h, delta, 0)).f);
        },
        py::arg("lam"), py::arg("mu"), py::arg("delta"), py::arg("h"), "Direct sparse solve of the M/M/1 Poisson equation.");
    m.def(
        "poisson_via_integral_mm1",
        [](double lambda, double mu, double delta, const std::vector<double>& h, double horizon, int steps) {
            const auto kernel = mm1_kernel(lambda, mu, delta, static_cast<Index>(h.size()) - 1);
            const auto sol = poisson_via_integral(kernel, line_function(h, delta, 0), horizon, steps);
            py::dict d;
            d["f"] = to_vector(sol.f);
            d["tail_estimate"] = sol.tail_estimate;
            d["truncation_warning"] = sol.truncation_warning;
            return d;
        },
        py::arg("lam"), py::arg("mu"), py::arg("delta"), py::arg("h"), py::arg("horizon") = 500.0,
        py::arg("steps") = 200);

    m.def("geometric_mean", [](double l, double mu, double d) { return geometric_mean(Mm1Params(l, mu, d)); },
          py::arg("lam"), py::arg("mu"), py::arg("delta"));
    m.def("rbm_stationary_mean", [](double l, double mu, double d) { return rbm_stationary_mean(Mm1Params(l, mu, d)); },
          py::arg("lam"), py::arg("mu"), py::arg("delta"));
    m.def(
        "stein_factor_bound",
        [](double l, double mu, double d, int a, Index k) { return stein_factor_bound(Mm1Params(l, mu, d), a, k); },
        py::arg("lam"), py::arg("mu"), py::arg("delta"), py::arg("order"), py::arg("k"));
    m.def("daly_bound", [](double l, double mu, double d) { return daly_bound(Mm1Params(l, mu, d)); }, py::arg("lam"),
          py::arg("mu"), py::arg("delta"));
    m.def("convergence_gap", [](double l, double mu, double d) { return convergence_gap(Mm1Params(l, mu, d)); },
          py::arg("lam"), py::arg("mu"), py::arg("delta"), "W1 distance between X and its exponential limit.");
    m.def(
        "convergence_sweep",
        [](const std::vector<double>& rhos) {
            const auto s = convergence_sweep(rhos);
            py::list rows;
            for (const auto& r : s.rows) {
                py::dict d;
                d["rho"] = r.rho;
                d["delta"] = r.delta;
                d["gap"] = r.gap;
                d["bound_rhs"] = r.bound_rhs;
                rows.append(d);
            }
            py::dict out;
            out["rows"] = rows;
            out["fitted_C"] = s.fitted_c;
            out["slope"] = s.slope;
            return out;
        },
        py::arg("rhos"));
    m.def(
        "wasserstein_exponential",
        [](double m1, double m2) {
            return wasserstein1(DistributionHandle::exponential(m1), DistributionHandle::exponential(m2));
        },
        py::arg("mean1"), py::arg("mean2"));

    m.def(
        "mm1_interchange",
        [](double lambda, double mu, double delta, const std::vector<double>& f, double x) {
            const auto r = mm1_interchange_report(lambda, mu, delta, line_function(f, delta, 0), x);
            py::dict d;
            d["lhs"] = r.lhs;
            d["main_term"] = r.main_term;
            d["epsilon"] = r.epsilon;
            d["residual"] = r.residual;
            return d;
        },
        py::arg("lam"), py::arg("mu"), py::arg("delta"), py::arg("f"), py::arg("x"));

    m.def(
        "estimate_coupling_time",
        [](double lambda, double mu, Index k, std::size_t reps, std::uint64_t seed) {
            CouplingEstimate e;
            {
                py::gil_scoped_release release;
                e = estimate_coupling_time(Mm1Params(lambda, mu, 1.0), k, reps, seed);
            }
            return estimate_dict(e);
        },
        py::arg("lam"), py::arg("mu"), py::arg("k"), py::arg("reps"), py::arg("seed"));
    m.def(
        "estimate_delta",
        [](double lambda, double mu, double delta, const std::vector<double>& h, Index k, int order, std::size_t reps,
           std::uint64_t seed) {
            const auto hf = line_function(h, delta, 0);
            CouplingEstimate e;
            {
                py::gil_scoped_release release;
                e = estimate_delta(Mm1Params(lambda, mu, delta), hf, k, order, reps, seed);
            }
            return estimate_dict(e);
        },
        py::arg("lam"), py::arg("mu"), py::arg("delta"), py::arg("h"), py::arg("k"), py::arg("order"),
        py::arg("reps"), py::arg("seed"));
}
