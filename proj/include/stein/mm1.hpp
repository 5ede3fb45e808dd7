#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "stein/core.hpp"
#include "stein/ctmc.hpp"
#include "stein/interpolator.hpp"

namespace stein {

struct Mm1Params {
    double lambda = 1.0;
    double mu = 2.0;
    double delta = 1.0;

    Mm1Params() = default;
    Mm1Params(double lambda, double mu, double delta);

    double rho() const { return lambda / mu; }
    /// Throws ArgumentError on non-positive inputs and StabilityError when rho >= 1.
    void validate() const;
};

/// (1 - rho) rho^n.
double geometric_stationary(const Mm1Params& p, Index n);
/// E X = delta rho / (1 - rho).
double geometric_mean(const Mm1Params& p);
/// E Y = delta (lambda + mu) / (2 (mu - lambda)).
double rbm_stationary_mean(const Mm1Params& p);

/// Smallest N with rho^(N+1) < tol.
Index truncation_level(double rho, double tol = 1e-14);

/// delta^a (k+1)/(mu-lambda) + delta^(a-1)/(mu-lambda).
double stein_factor_bound(const Mm1Params& p, int a, Index k);
/// delta (k+1)/(mu-lambda), the standalone first-order bound.
double first_order_bound(const Mm1Params& p, Index k);
/// 2 delta / lambda.
double daly_bound(const Mm1Params& p);

/// Closed-form Poisson solution for h on {0..N}.
PoissonSolution mm1_poisson(const Mm1Params& p, const GridFunction& h);

struct SteinFactorReport {
    int order = 1;
    std::vector<double> exact;       // |D^a f_h(delta k)|, k = 0..k_max
    std::vector<double> bound;       // stein_factor_bound(a, k)
    std::vector<double> first_order; // first_order_bound(k), order 1 only
    double daly = 0.0;               // order 3 only
    std::size_t violations = 0;      // against bound (and first_order / daly where present)
    std::size_t daly_violations = 0;
    double max_ratio = 0.0;          // max exact / bound
};

/// Checks k = 0..k_max; requires k_max + order <= N.
SteinFactorReport stein_factor_report(const Mm1Params& p, const GridFunction& h, int order, Index k_max,
                                      double slack = 1e-12);

/// |D^2 f(0) - D f(0) - ((lambda+mu)/mu D^3 f(0) - D^3 h(0)/mu - (lambda/mu) D^3 f(delta))|.
double third_order_identity_residual(const Mm1Params& p, const GridFunction& h);

struct ErrorDecomposition {
    double lambda_term = 0.0;  // lambda delta^3 E int_0^1 (1-s)^2/2 (A fhat)'''(Y + s delta) ds
    double mu_term = 0.0;      // -mu delta^3 E int_0^1 (1-s)^2/2 (A fhat)'''(Y - s delta) ds
    double boundary_term = 0.0;  // -(A f)'(0) delta (mu - lambda)
    double sum = 0.0;
    double gap = 0.0;          // E h(X) - E A h(Y)
    double quadrature_error = 0.0;
};

/// Box needed so that the spline of f_h covers 40 means of Y plus the stencil.
Index decomposition_box(const Mm1Params& p);

/// Taylor-remainder decomposition of E h(X) - E A h(Y) for h on {0..N}.
ErrorDecomposition error_decomposition(const Mm1Params& p, const GridFunction& h);

/// f' and f'' of a test function for the RBM stationary identity.
struct SmoothTest {
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    double cell = 1.0;  // quadrature cell width (spline spacing)
};
SmoothTest polynomial_test(std::vector<double> coeffs);
SmoothTest interpolant_test(const Interpolant& itp);

/// |E(delta(lambda-mu) f'(Y) + delta^2 (lambda+mu)/2 f''(Y)) + f'(0) delta (mu-lambda)|.
double rbmbar_residual(const Mm1Params& p, const SmoothTest& f);

/// W1 distance between the delta-scaled geometric law and its exponential limit.
double convergence_gap(const Mm1Params& p);

struct SweepRow {
    double rho = 0.0;
    double delta = 0.0;
    double gap = 0.0;
    double bound_rhs = 0.0;  // delta (1 + 1/rho)
    double mean_x = 0.0;
    double mean_y = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double fitted_c = 0.0;  // max gap / bound_rhs
    double slope = 0.0;     // least-squares slope of log gap on log delta
};

/// mu = 1, lambda = rho, delta = 1 - rho for each rho.
SweepResult convergence_sweep(const std::vector<double>& rhos);

/// Columns rho, delta, gap, bound_rhs, fitted_C, slope.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void to_json(nlohmann::json& j, const SweepResult& sweep);
void to_json(nlohmann::json& j, const SteinFactorReport& r);
void to_json(nlohmann::json& j, const ErrorDecomposition& d);

}  // namespace stein
