// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "stein/core.hpp"
#include "stein/coupling.hpp"
#include "stein/ctmc.hpp"
#include "stein/interchange.hpp"
#include "stein/interpolator.hpp"
#include "stein/mm1.hpp"

using namespace stein;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.ok = false;
        o.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_limit > 0.0 && secs >= time_limit) {
        o.ok = false;
        o.detail << " over the " << time_limit << " s limit";
    }
    if (!o.ok) ++failures;
    std::cout << (o.ok ? "PASS" : "FAIL") << " " << id << " " << name << ":" << o.detail.str() << " ["
              << secs << " s]" << std::endl;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void rate_reproduction(Outcome& o) {
    const auto s = convergence_sweep({0.5, 0.8, 0.9, 0.95, 0.99});
    bool bounded = true;
    for (const auto& r : s.rows) bounded = bounded && r.gap <= s.fitted_c * r.bound_rhs * (1 + 1e-12);
    o.ok = bounded && s.slope >= 0.8 && s.slope <= 1.2;
    o.detail << " slope=" << s.slope << " fitted_C=" << s.fitted_c << " bound_holds=" << bounded;
}

void interpolator_suite(Outcome& o) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double d = 0.2;
    const auto line = LatticeSpec::line(d, 0, 50);

    double knot = 0.0;
    const auto f = sample_dlip(line, 1);
    const Interpolant itp(f);
    for (Index k = 0; k + 4 <= 50; ++k) knot = std::max(knot, rel_err(itp.evaluate_1d(d * static_cast<double>(k)), f.at(k)));

    double pou = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double t = u(rng);
        double s = 0.0;
        for (int i = 0; i < 5; ++i) s += weight(i, t);
        pou = std::max(pou, std::abs(s - 1.0));
    }

    double repro = 0.0;
    for (int deg = 0; deg <= 3; ++deg) {
        const Interpolant m(GridFunction::from_points_1d(line, [deg](double x) { return std::pow(x, deg); }));
        for (int n = 0; n < 200; ++n) {
            const double x = m.domain_hi(0) * u(rng);
            repro = std::max(repro, rel_err(m.evaluate_1d(x), std::pow(x, deg)));
        }
    }
    const LatticeSpec square(0.5, {0, 0}, {12, 12});
    for (int a = 0; a <= 3; ++a) {
        for (int b = 0; b <= 3; ++b) {
            const Interpolant m(GridFunction::from_indices(square, [&](std::span<const Index> k) {
                return std::pow(0.5 * static_cast<double>(k[0]), a) * std::pow(0.5 * static_cast<double>(k[1]), b);
            }));
            for (int n = 0; n < 20; ++n) {
                const double x[2] = {4.0 * u(rng), 4.0 * u(rng)};
                repro = std::max(repro, rel_err(m.evaluate_nd(x), std::pow(x[0], a) * std::pow(x[1], b)));
            }
        }
    }

    double glue = 0.0;
    for (Index k = 1; k + 4 <= 50; ++k)
        for (int a = 0; a <= 3; ++a) glue = std::max(glue, rel_err(itp.piece_1d(k - 1, 1.0, a), itp.piece_1d(k, 0.0, a)));
    const Interpolant g2(sample_dlip(square, 3));
    for (Index k0 = 1; k0 + 4 <= 12; ++k0) {
        for (int n = 0; n < 8; ++n) {
            const Index k1 = n;
            const double s = u(rng);
            for (int a0 = 0; a0 <= 3; ++a0) {
                for (int a1 = 0; a1 <= 3; ++a1) {
                    const Index kl[2] = {k0 - 1, k1}, kr[2] = {k0, k1};
                    const double tl[2] = {1.0, s}, tr[2] = {0.0, s};
                    const MultiIndex a({a0, a1});
                    glue = std::max(glue, rel_err(g2.piece(kl, tl, a), g2.piece(kr, tr, a)));
                }
            }
        }
    }

    double quartic = 0.0;
    const Interpolant q(GridFunction::from_points_1d(line, [](double x) { return x * x * x * x; }));
    for (int n = 0; n < 200; ++n) {
        const double x = q.domain_hi(0) * u(rng);
        quartic = std::max(quartic, std::abs(q.evaluate_1d(x) - x * x * x * x));
    }
    o.ok = knot <= 1e-12 && pou <= 1e-12 && repro <= 1e-9 && glue <= 1e-9 && quartic > 1e-9;
    o.detail << " knot=" << knot << " unity=" << pou << " reproduction=" << repro << " gluing=" << glue
             << " quartic_deviation=" << quartic;
}

void interchange_identity(Outcome& o) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double d = 0.5;

    double affine = 0.0;
    const RateKernel k1(LatticeSpec::line(d, 0, 40), {Jump{{1}, AffineRate{1.0, {0.5}}}, Jump{{-1}, AffineRate{0.5, {0.3}}},
                                                     Jump{{2}, ConstantRate{0.2}}});
    for (int n = 0; n < 100; ++n) {
        const auto f = sample_dlip(k1.spec(), static_cast<std::uint64_t>(n));
        const double x = d * (1.0 + 33.0 * u(rng));
        affine = std::max(affine, std::abs(interchange_report(k1, f, std::span<const double>(&x, 1)).residual));
    }

    double mm1 = 0.0;
    const auto spec = LatticeSpec::line(d, 0, 40);
    for (int n = 0; n < 100; ++n) {
        const auto f = sample_dlip(spec, 500 + static_cast<std::uint64_t>(n));
        const double x = n < 30 ? d * u(rng) : d * 34.0 * u(rng);  // includes the band [0, delta)
        mm1 = std::max(mm1, std::abs(mm1_interchange_report(1.0, 2.0, d, f, x).residual));
    }

    double product = 0.0;
    const RateKernel k2(LatticeSpec(d, {0, 0}, {20, 20}),
                        {Jump{{1, 0}, AffineRate{1.0, {0.0, 0.1}}}, Jump{{-1, 0}, AffineRate{0.5, {0.2, 0.0}}},
                         Jump{{0, 1}, AffineRate{0.8, {0.05, 0.0}}}, Jump{{0, -1}, AffineRate{0.6, {0.0, 0.3}}}});
    for (int n = 0; n < 100; ++n) {
        const auto f = sample_dlip(k2.spec(), 900 + static_cast<std::uint64_t>(n % 10));
        const double x[2] = {d * (1.0 + 14.0 * u(rng)), d * (1.0 + 14.0 * u(rng))};
        product = std::max(product, std::abs(interchange_report(k2, f, x).residual));
    }

    double eps_const = 0.0;
    const RateKernel kc(LatticeSpec::line(d, 0, 40), {Jump{{1}, ConstantRate{1.0}}, Jump{{-1}, ConstantRate{2.0}}});
    const RateKernel mmk = mm1_kernel(1.0, 2.0, d, 40);
    for (int n = 0; n < 100; ++n) {
        const auto f = sample_dlip(kc.spec(), static_cast<std::uint64_t>(n));
        const double x = d * (1.0 + 33.0 * u(rng));
        eps_const = std::max(eps_const, std::abs(epsilon_1d(kc, f, x)));
        eps_const = std::max(eps_const, std::abs(epsilon_1d(mmk, f, x)));  // interior of the M/M/1 kernel
    }
    o.ok = affine <= 1e-10 && mm1 <= 1e-10 && product <= 1e-10 && eps_const <= 1e-12;
    o.detail << " affine=" << affine << " mm1=" << mm1 << " product2d=" << product << " eps_constant=" << eps_const;
}

double max_diff(const PoissonSolution& a, const PoissonSolution& b) {
    double m = 0.0;
    for (int order = 1; order <= 3; ++order)
        for (Index k = 0; k + order <= a.spec.upper[0]; ++k) m = std::max(m, std::abs(a.diff(order, k) - b.diff(order, k)));
    return m;
}

void poisson_cross_validation(Outcome& o) {
    const Mm1Params p(1.0, 2.0, 1.0);
    const auto kernel = mm1_kernel(p.lambda, p.mu, p.delta, truncation_level(p.rho()));
    double closed = 0.0, integral = 0.0, residual = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto h = sample_dlip(kernel.spec(), s);
        const auto direct = solve_poisson(kernel, h);
        closed = std::max(closed, max_diff(direct, birth_death_poisson(p.lambda, p.mu, p.delta, h)));
        integral = std::max(integral, max_diff(direct, poisson_via_integral(kernel, h, 500.0, 200)));
        residual = std::max(residual, poisson_residual(kernel, direct, h));
    }
    o.ok = closed <= 1e-9 && integral <= 1e-6 && residual <= 1e-10;
    o.detail << " direct_vs_closed=" << closed << " integral_vs_direct=" << integral << " residual=" << residual;
}

void stein_factors(Outcome& o) {
    const Mm1Params p(1.0, 2.0, 1.0);
    const Index kmax = 50;
    const auto spec = LatticeSpec::line(p.delta, 0, kmax + truncation_level(p.rho()) + 10);
    std::size_t violations = 0, daly = 0;
    double identity = 0.0;
    for (int order = 1; order <= 3; ++order) {
        for (std::uint64_t s = 0; s < 200; ++s)
            violations += stein_factor_report(p, sample_dlip_higher(spec, order, s), order, kmax).violations;
    }
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto h = sample_dlip(spec, s);
        const auto sol = mm1_poisson(p, h);
        for (Index k = 0; k <= kmax; ++k) daly += std::abs(sol.diff(3, k)) > daly_bound(p) * (1 + 1e-12);
        identity = std::max(identity, third_order_identity_residual(p, h));
    }
    o.ok = violations == 0 && daly == 0 && identity <= 1e-10;
    o.detail << " bound_violations=" << violations << " daly_violations=" << daly << " identity_residual=" << identity;
}

void coupling_mc(Outcome& o) {
    const Mm1Params p(1.0, 2.0, 1.0);
    const auto tau = estimate_coupling_time(p, 3, 10000, 31);
    const double z_tau = (tau.mean - 4.0) / tau.stderr_;
    o.ok = std::abs(z_tau) <= 3.0;
    o.detail << " tau=" << tau.mean << " z=" << z_tau;
    const auto spec = LatticeSpec::line(1.0, 0, truncation_level(p.rho()) + 400);
    for (int order = 1; order <= 3; ++order) {
        const auto h = sample_dlip_higher(spec, order, 70 + static_cast<std::uint64_t>(order));
        const auto exact = mm1_poisson(p, h);
        for (Index k : {0, 5}) {
            const auto e = estimate_delta(p, h, k, order, 10000, 300 + static_cast<std::uint64_t>(10 * order + k));
            const double z = (e.mean - exact.diff(order, k)) / e.stderr_;
            o.ok = o.ok && std::abs(z) <= 3.0;
            o.detail << " z[" << order << "," << k << "]=" << z;
        }
    }
}

void tightness(Outcome& o) {
    double worst = 0.0;
    bool bounded = true;
    for (double rho : {0.5, 0.8, 0.9, 0.95, 0.99}) {
        const Mm1Params p(rho, 1.0, 1.0 - rho);
        const auto h =
            GridFunction::from_points_1d(LatticeSpec::line(p.delta, 0, truncation_level(rho) + 10), [](double x) { return x; });
        const auto sol = mm1_poisson(p, h);
        worst = std::max(worst, std::abs(p.lambda * sol.diff(1, 0) - p.delta * rho / (1.0 - rho)));
        bounded = bounded && geometric_mean(p) <= 1.0 && rbm_stationary_mean(p) <= 1.0;
    }
    o.ok = worst <= 1e-10 && bounded;
    o.detail << " max_identity_error=" << worst << " means_bounded=" << bounded;
}

void misalignment(Outcome& o) {
    const Mm1Params p(1.0, 2.0, 1.0);
    const auto r = rbm_misalignment_demo(p, 0.1, 0.2, 0.0, 1000, 41);
    const double z = (r.window_mean - r.window_expected) / r.window_stderr;
    o.ok = r.fraction_ok >= 0.99 && std::abs(z) <= 3.0;
    o.detail << " fraction=" << r.fraction_ok << " window_mean=" << r.window_mean << " expected=" << r.window_expected
             << " z=" << z;
}

}  // namespace

int main() {
    criterion(1, "rate reproduction", 10.0, rate_reproduction);
    criterion(2, "interpolator suite", 0.0, interpolator_suite);
    criterion(3, "interchange identity", 0.0, interchange_identity);
    criterion(4, "Poisson solver cross-validation", 0.0, poisson_cross_validation);
    criterion(5, "Stein-factor bounds", 30.0, stein_factors);
    criterion(6, "coupling Monte Carlo", 0.0, coupling_mc);
    criterion(7, "tightness", 0.0, tightness);
    criterion(8, "misalignment demo", 60.0, misalignment);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
