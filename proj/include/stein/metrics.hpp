#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "stein/core.hpp"

namespace stein {

/// Finite pmf on delta*{lower, lower+1, ...}.
struct LatticeLaw {
    double delta = 1.0;
    Index lower = 0;
    std::vector<double> probs;
};
/// (1 - rho) rho^n at delta*n, n >= 0.
struct GeometricLaw {
    double rho = 0.5;
    double delta = 1.0;
};
struct ExponentialLaw {
    double mean = 1.0;
};

class DistributionHandle {
public:
    using Law = std::variant<LatticeLaw, GeometricLaw, ExponentialLaw>;

    static DistributionHandle lattice(double delta, Index lower, std::vector<double> probs);
    static DistributionHandle geometric(double rho, double delta);
    static DistributionHandle exponential(double mean);

    const Law& law() const { return law_; }
    bool is_continuous() const { return std::holds_alternative<ExponentialLaw>(law_); }
    std::string kind() const;

    double cdf(double t) const;
    double mean() const;
    /// Point beyond which the survival function is below 1e-17.
    double tail_point() const;
    /// Upper bound on the integral of the survival function beyond t.
    double tail_integral(double t) const;

private:
    explicit DistributionHandle(Law law);
    Law law_;
};

/// Integral of |F_u - F_v|, computed in closed form on each lattice cell.
/// Throws ToleranceError when the truncated tail exceeds tol relative to the result.
double wasserstein1(const DistributionHandle& u, const DistributionHandle& v, double tol = 1e-10);

struct LipschitzTest {
    std::function<double(double)> fn;
    double lipschitz = 1.0;  // sup |h*'|
    std::string label = "custom";
    std::vector<double> kinks;  // points where h* is not smooth
};

struct LipschitzGap {
    double lhs = 0.0;       // |E h*(U) - E h*(V)|
    double rhs_main = 0.0;  // |E h(U) - E A h(V)|, h = h* on the lattice
    double delta = 0.0;
    double c_hat = 0.0;     // max(0, (lhs - rhs_main) / (delta * lipschitz))
};

/// U a lattice or geometric law, V exponential. A h is the degree-7 spline of
/// h* restricted to a lattice box covering both laws.
LipschitzGap lipschitz_gap(const DistributionHandle& u, const DistributionHandle& v, const LipschitzTest& hstar);

}  // namespace stein
