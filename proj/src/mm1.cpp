#include "stein/mm1.hpp"

#include <cmath>
#include <string>

#include "stein/error.hpp"
#include "stein/interchange.hpp"
#include "stein/io.hpp"
#include "stein/metrics.hpp"
#include "stein/parallel.hpp"
#include "stein/quadrature.hpp"

namespace stein {

Mm1Params::Mm1Params(double lambda_, double mu_, double delta_) : lambda(lambda_), mu(mu_), delta(delta_) {}

void Mm1Params::validate() const {
    if (!(lambda > 0.0) || !(mu > 0.0) || !(delta > 0.0))
        throw ArgumentError("M/M/1 parameters need lambda > 0, mu > 0, delta > 0");
    if (!(rho() < 1.0)) throw StabilityError("M/M/1 requires rho = lambda/mu < 1 (got " + std::to_string(rho()) + ")");
}

double geometric_stationary(const Mm1Params& p, Index n) {
    p.validate();
    if (n < 0) throw ArgumentError("state index must be non-negative");
    return (1.0 - p.rho()) * std::pow(p.rho(), static_cast<double>(n));
}

double geometric_mean(const Mm1Params& p) {
    p.validate();
    return p.delta * p.rho() / (1.0 - p.rho());
}

double rbm_stationary_mean(const Mm1Params& p) {
    p.validate();
    return p.delta * (p.lambda + p.mu) / (2.0 * (p.mu - p.lambda));
}

Index truncation_level(double rho, double tol) {
    if (!(rho > 0.0 && rho < 1.0) || !(tol > 0.0 && tol < 1.0)) throw ArgumentError("truncation_level needs 0 < rho, tol < 1");
    auto n = static_cast<Index>(std::ceil(std::log(tol) / std::log(rho))) - 1;
    n = std::max<Index>(n, 0);
    while (std::pow(rho, static_cast<double>(n + 1)) >= tol) ++n;
    return n;
}

double stein_factor_bound(const Mm1Params& p, int a, Index k) {
    p.validate();
    if (a < 1 || a > 3) throw ArgumentError("Stein-factor order must be 1, 2 or 3");
    if (k < 0) throw ArgumentError("state index must be non-negative");
    const double gap = p.mu - p.lambda;
    return std::pow(p.delta, a) * static_cast<double>(k + 1) / gap + std::pow(p.delta, a - 1) / gap;
}

double first_order_bound(const Mm1Params& p, Index k) {
    p.validate();
    return p.delta * static_cast<double>(k + 1) / (p.mu - p.lambda);
}

double daly_bound(const Mm1Params& p) {
    p.validate();
    return 2.0 * p.delta / p.lambda;
}

PoissonSolution mm1_poisson(const Mm1Params& p, const GridFunction& h) {
    p.validate();
    return birth_death_poisson(p.lambda, p.mu, p.delta, h);
}

SteinFactorReport stein_factor_report(const Mm1Params& p, const GridFunction& h, int order, Index k_max, double slack) {
    p.validate();
    if (order < 1 || order > 3) throw ArgumentError("Stein-factor order must be 1, 2 or 3");
    if (k_max < 0 || k_max + order > h.spec().upper.at(0))
        throw ArgumentError("k_max + order must not exceed the box end");
    const auto sol = mm1_poisson(p, h);
    SteinFactorReport r;
    r.order = order;
    if (order == 3) r.daly = daly_bound(p);
    auto exceeds = [slack](double v, double b) { return v > b + slack * std::max(1.0, b); };
    for (Index k = 0; k <= k_max; ++k) {
        const double v = std::abs(sol.diff(order, k));
        const double b = stein_factor_bound(p, order, k);
        r.exact.push_back(v);
        r.bound.push_back(b);
        bool bad = exceeds(v, b);
        if (order == 1) {
            const double b1 = first_order_bound(p, k);
            r.first_order.push_back(b1);
            bad = bad || exceeds(v, b1);
        }
        if (bad) ++r.violations;
        if (order == 3 && exceeds(v, r.daly)) ++r.daly_violations;
        r.max_ratio = std::max(r.max_ratio, v / b);
    }
    return r;
}

double third_order_identity_residual(const Mm1Params& p, const GridFunction& h) {
    p.validate();
    if (h.spec().upper.at(0) < 5) throw ArgumentError("third-order identity needs a box of at least {0..5}");
    const auto sol = mm1_poisson(p, h);
    const double lhs = sol.diff(2, 0) - sol.diff(1, 0);
    const double rhs = (p.lambda + p.mu) / p.mu * sol.diff(3, 0) - forward_difference_1d(h, 3, 0) / p.mu -
                       p.lambda / p.mu * sol.diff(3, 1);
    return std::abs(lhs - rhs);
}

Index decomposition_box(const Mm1Params& p) {
    const double m = rbm_stationary_mean(p);
    const auto cover = static_cast<Index>(std::ceil(40.0 * m / p.delta)) + 8;
    return std::max(cover, truncation_level(p.rho()));
}

namespace {

// int_0^1 (1-s)^2/2 F'''(y + sign*s*delta) ds, split where the argument crosses a knot.
double taylor_remainder(const Interpolant& F, double y, double sign) {
    const double delta = F.delta();
    const auto loc = F.locate(y);
    double split = 0.0;
    if (sign > 0) {
        split = 1.0 - loc.t;
    } else {
        split = loc.on_knot ? 0.0 : loc.t;
    }
    auto g = [&](double s) {
        const double w = (1.0 - s) * (1.0 - s) / 2.0;
        return w * F.derivative_1d(y + sign * s * delta, 3);
    };
    double total = 0.0;
    if (split > 0.0) total += gauss_legendre(g, 0.0, split);
    if (split < 1.0) total += gauss_legendre(g, split, 1.0);
    return total;
}

}  // namespace

ErrorDecomposition error_decomposition(const Mm1Params& p, const GridFunction& h) {
    p.validate();
    const auto& spec = h.spec();
    if (spec.dim != 1 || spec.lower[0] != 0) throw ArgumentError("error_decomposition needs h on a box {0..N}");
    const Index need = decomposition_box(p);
    if (spec.upper[0] < need)
        throw ArgumentError("box {0.." + std::to_string(spec.upper[0]) + "} too small; need N >= " + std::to_string(need));
    const auto sol = mm1_poisson(p, h);
    const Interpolant F(extend_hat(sol.f));
    const Interpolant Ah(h);
    const double m = rbm_stationary_mean(p);
    const double d3 = p.delta * p.delta * p.delta;

    const auto up = exponential_expectation([&](double y) { return taylor_remainder(F, y, 1.0); }, m, p.delta);
    const auto down = exponential_expectation([&](double y) { return taylor_remainder(F, y, -1.0); }, m, p.delta);
    const auto eah = exponential_expectation([&](double y) { return Ah.evaluate_1d(y); }, m, p.delta);

    ErrorDecomposition d;
    d.lambda_term = p.lambda * d3 * up.value;
    d.mu_term = -p.mu * d3 * down.value;
    d.boundary_term = -F.derivative_1d(0.0, 1) * p.delta * (p.mu - p.lambda);
    d.sum = d.lambda_term + d.mu_term + d.boundary_term;
    d.gap = sol.mean_h - eah.value;
    d.quadrature_error = p.lambda * d3 * up.error + p.mu * d3 * down.error + eah.error;
    return d;
}

SmoothTest polynomial_test(std::vector<double> coeffs) {
    SmoothTest t;
    auto deriv = [](const std::vector<double>& c) {
        std::vector<double> out;
        for (std::size_t i = 1; i < c.size(); ++i) out.push_back(c[i] * static_cast<double>(i));
        return out;
    };
    auto horner = [](std::vector<double> c) {
        return [c = std::move(c)](double x) {
            double r = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
            return r;
        };
    };
    const auto c1 = deriv(coeffs);
    t.d1 = horner(c1);
    t.d2 = horner(deriv(c1));
    t.cell = 0.0;
    return t;
}

SmoothTest interpolant_test(const Interpolant& itp) {
    SmoothTest t;
    t.d1 = [&itp](double x) { return itp.derivative_1d(x, 1); };
    t.d2 = [&itp](double x) { return itp.derivative_1d(x, 2); };
    t.cell = itp.delta();
    return t;
}

double rbmbar_residual(const Mm1Params& p, const SmoothTest& f) {
    p.validate();
    const double m = rbm_stationary_mean(p);
    const double cell = f.cell > 0.0 ? f.cell : m;
    const double a = p.delta * (p.lambda - p.mu);
    const double b = 0.5 * p.delta * p.delta * (p.lambda + p.mu);
    const auto e = exponential_expectation([&](double y) { return a * f.d1(y) + b * f.d2(y); }, m, cell, 1e-12);
    return std::abs(e.value + f.d1(0.0) * p.delta * (p.mu - p.lambda));
}

double convergence_gap(const Mm1Params& p) {
    p.validate();
    return wasserstein1(DistributionHandle::geometric(p.rho(), p.delta),
                        DistributionHandle::exponential(rbm_stationary_mean(p)));
}

SweepResult convergence_sweep(const std::vector<double>& rhos) {
    if (rhos.empty()) throw ArgumentError("convergence sweep needs at least one rho");
    SweepResult s;
    s.rows.resize(rhos.size());
    parallel_for(rhos.size(), [&](std::size_t i) {
        const double rho = rhos[i];
        if (!(rho > 0.0 && rho < 1.0)) throw StabilityError("sweep rho values must lie in (0, 1)");
        const Mm1Params p(rho, 1.0, 1.0 - rho);
        SweepRow& r = s.rows[i];
        r.rho = rho;
        r.delta = p.delta;
        r.gap = convergence_gap(p);
        r.bound_rhs = p.delta * (1.0 + 1.0 / rho);
        r.mean_x = geometric_mean(p);
        r.mean_y = rbm_stationary_mean(p);
    });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(s.rows.size());
    for (const auto& r : s.rows) {
        s.fitted_c = std::max(s.fitted_c, r.gap / r.bound_rhs);
        const double x = std::log(r.delta);
        const double y = std::log(r.gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    s.slope = (s.rows.size() > 1 && den > 0.0) ? (n * sxy - sx * sy) / den : std::nan("");
    return s;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : sweep.rows) rows.push_back({r.rho, r.delta, r.gap, r.bound_rhs, sweep.fitted_c, sweep.slope});
    write_csv(out, {"rho", "delta", "gap", "bound_rhs", "fitted_C", "slope"}, rows);
}

void to_json(nlohmann::json& j, const SweepResult& sweep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : sweep.rows) {
        rows.push_back({{"rho", r.rho},
                        {"delta", r.delta},
                        {"gap", r.gap},
                        {"bound_rhs", r.bound_rhs},
                        {"mean_x", r.mean_x},
                        {"mean_y", r.mean_y}});
    }
    j = nlohmann::json{{"rows", rows}, {"fitted_C", sweep.fitted_c}, {"slope", sweep.slope}};
}

void to_json(nlohmann::json& j, const SteinFactorReport& r) {
    j = nlohmann::json{{"order", r.order},     {"exact", r.exact},           {"bound", r.bound},
                       {"violations", r.violations}, {"max_ratio", r.max_ratio}};
    if (!r.first_order.empty()) j["first_order_bound"] = r.first_order;
    if (r.order == 3) {
        j["daly_bound"] = r.daly;
        j["daly_violations"] = r.daly_violations;
    }
}

void to_json(nlohmann::json& j, const ErrorDecomposition& d) {
    j = nlohmann::json{{"lambda_term", d.lambda_term}, {"mu_term", d.mu_term},
                       {"boundary_term", d.boundary_term}, {"sum", d.sum},
                       {"gap", d.gap},                   {"quadrature_error", d.quadrature_error}};
}

}  // namespace stein
