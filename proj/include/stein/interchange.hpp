#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "stein/ctmc.hpp"
#include "stein/interpolator.hpp"

namespace stein {

// All functions here use the raw rate expressions beta_l(delta*k) on the
// infinite lattice; only f is restricted to its box. Stencils that leave
// f's box raise DomainError.

/// A(G_X f)(x): interpolate k -> G_X f(delta*k).
double a_gx(const RateKernel& kernel, const GridFunction& f, std::span<const double> x);
double a_gx(const RateKernel& kernel, const GridFunction& f, double x);

/// A beta_l(x).
double interpolated_rate(const RateKernel& kernel, std::size_t jump, std::span<const double> x,
                         const WeightTable& table = WeightTable::standard());

/// sum_l A beta_l(x) (A f(x + delta*l) - A f(x)).
double interchanged_main(const RateKernel& kernel, const GridFunction& f, std::span<const double> x);
double interchanged_main(const RateKernel& kernel, const GridFunction& f, double x);

/// One-dimensional error in telescoped form:
///   sum_l sum_i J_i(t) (beta_l(k+i) - A beta_l(x))
///         * ( 1(l>0) sum_{j<i} sum_{m=0}^{l-1}  D^2 f(k+m+j)
///           - 1(l<0) sum_{j<i} sum_{m=l}^{-1}   D^2 f(k+m+j) ).
double epsilon_1d(const RateKernel& kernel, const GridFunction& f, double x);

/// d-dimensional error with product weights and the increment bracket
///   f(k+l+i) - f(k+i) - (f(k+l) - f(k)).
double epsilon_nd(const RateKernel& kernel, const GridFunction& f, std::span<const double> x);

/// f on {0..N} extended to {-1..N} with f(-delta) = f(0).
GridFunction extend_hat(const GridFunction& f);

/// lambda (A fhat(x+delta) - A fhat(x)) + mu (A fhat(x-delta) - A fhat(x)), x >= 0.
double mm1_boundary_interchange(double lambda, double mu, double delta, const GridFunction& f, double x);

struct InterchangeReport {
    std::vector<double> x;
    double lhs = 0.0;
    double main_term = 0.0;
    double epsilon = 0.0;
    double residual = 0.0;
};

/// lhs = a_gx, main = interchanged_main, epsilon from the closed form
/// (epsilon_1d when d = 1, epsilon_nd otherwise).
InterchangeReport interchange_report(const RateKernel& kernel, const GridFunction& f, std::span<const double> x);

/// M/M/1 on {0..N}: lhs = A G_X f(x), main = mm1_boundary_interchange, epsilon
/// from the constant-rate kernel acting on fhat (identically zero).
InterchangeReport mm1_interchange_report(double lambda, double mu, double delta, const GridFunction& f, double x);

void to_json(nlohmann::json& j, const InterchangeReport& r);

}  // namespace stein
