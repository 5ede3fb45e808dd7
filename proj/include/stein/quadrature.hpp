#pragma once

#include <functional>
#include <vector>

namespace stein {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    double l1 = 0.0;     // integral of |f|
};

/// Fixed 7-point Gauss-Legendre on [a, b]; exact for polynomials of degree <= 13.
double gauss_legendre(const std::function<double(double)>& f, double a, double b);

/// Adaptive 15-point Gauss-Kronrod on [a, b], bisecting at most `max_depth` times.
QuadratureResult gauss_kronrod(const std::function<double(double)>& f, double a, double b, double rel_tol,
                               unsigned max_depth = 15);

/// E f(Y) for Y ~ Exp(mean), truncated at `cutoff_means` means. The range is
/// split into cells of width `cell` (use the lattice spacing so that spline
/// knots fall on cell edges). Throws ToleranceError when the summed error
/// estimate exceeds rel_tol * E|f(Y)| + abs_floor. Each cell is refined only a
/// few times: f is expected to be smooth inside a cell, and deeper bisection
/// only chases rounding noise. Points in `breaks` (kinks of f)
/// become extra cell edges.
QuadratureResult exponential_expectation(const std::function<double(double)>& f, double mean, double cell,
                                         double rel_tol = 1e-8, double cutoff_means = 40.0,
                                         double abs_floor = 1e-14, const std::vector<double>& breaks = {});

}  // namespace stein
