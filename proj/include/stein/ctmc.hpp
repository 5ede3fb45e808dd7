#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stein/core.hpp"

namespace stein {

// Rate expressions understood by the JSON kernel config.
struct ConstantRate {
    double c = 0.0;
};
/// c0 + sum_j slope_j * k_j on the integer lattice index.
struct AffineRate {
    double c0 = 0.0;
    std::vector<double> slope;
};
/// c while k_axis >= min_index, else 0 (e.g. mu * 1(k > 0)).
struct GatedRate {
    double c = 0.0;
    int axis = 0;
    Index min_index = 0;
};
/// Arbitrary rate function; not serializable.
struct CustomRate {
    std::function<double(std::span<const Index>)> fn;
    std::string label = "custom";
};

using RateExpr = std::variant<ConstantRate, AffineRate, GatedRate, CustomRate>;

double evaluate_rate(const RateExpr& expr, std::span<const Index> k);

struct Jump {
    Point offset;
    RateExpr rate;
};

/// Transition-rate map beta_l(delta*k) with finite jump support on a
/// truncation box. Jumps that would leave the box are dropped (rate 0).
class RateKernel {
public:
    RateKernel(LatticeSpec spec, std::vector<Jump> jumps);

    const LatticeSpec& spec() const { return spec_; }
    const std::vector<Jump>& jumps() const { return jumps_; }
    std::size_t num_jumps() const { return jumps_.size(); }

    /// Raw rate beta_l(delta*k) from the expression, no truncation applied.
    double raw_rate(std::size_t jump, std::span<const Index> k) const;
    /// Rate after the boundary policy: 0 when k + offset leaves the box.
    /// Throws IndexRangeError when k itself is outside the box.
    double rate(std::size_t jump, std::span<const Index> k) const;
    double total_rate(std::span<const Index> k) const;
    double max_total_rate() const;

    /// Number of (state, jump) pairs with positive raw rate dropped by the box.
    std::size_t dropped_transitions() const { return dropped_; }

private:
    LatticeSpec spec_;
    std::vector<Jump> jumps_;
    std::size_t dropped_ = 0;
};

/// M/M/1 customer count: +1 at rate lambda, -1 at rate mu * 1(k > 0), box {0..n}.
RateKernel mm1_kernel(double lambda, double mu, double delta, Index n);

void to_json(nlohmann::json& j, const RateKernel& kernel);
/// {"lattice": {...}, "jumps": [{"offset": [..], "rate": {"type": "constant"|"affine"|"gated", ...}}]}
RateKernel rate_kernel_from_json(const nlohmann::json& j);

struct StationaryDistribution {
    LatticeSpec spec;
    std::vector<double> probs;

    double expectation(const GridFunction& h) const;
    double prob(std::span<const Index> k) const { return probs[spec.linear_index(k)]; }
};

struct PoissonSolution {
    LatticeSpec spec;
    GridFunction f;
    double mean_h = 0.0;       // E h(X) under the truncated stationary law
    Point anchor;              // lattice point where f = 0
    bool truncation_warning = false;
    double tail_estimate = 0.0;  // integral solver only: max |E_k h(X(T)) - E h(X)|
    std::string method;

    double diff(int order, Index k) const { return forward_difference_1d(f, order, k); }
};

/// sum_l beta_l(delta*k) (f(delta(k+l)) - f(delta*k)) with the kernel's boundary policy.
double generator_apply(const RateKernel& kernel, const GridFunction& f, std::span<const Index> k);
double generator_apply(const RateKernel& kernel, const GridFunction& f, Index k);
/// G_X f on every point of the kernel box.
GridFunction generator_grid(const RateKernel& kernel, const GridFunction& f);

/// Global balance pi Q = 0 on the box.
StationaryDistribution stationary(const RateKernel& kernel);

/// Solves G_X f = E h(X) - h with f(anchor) = 0 (anchor = origin when in the box).
PoissonSolution solve_poisson(const RateKernel& kernel, const GridFunction& h);

/// Closed-form M/M/1 solution via the tail sums of the geometric law on h's box.
PoissonSolution birth_death_poisson(double lambda, double mu, double delta, const GridFunction& h);

struct IntegralSolverOptions {
    double warn_tolerance = 1e-10;
};

/// g(k) = int_0^T (E_k h(X(t)) - E h(X)) dt by uniformization, integrated exactly
/// on each cell of a geometric time grid with `steps` cells; normalized so g(anchor) = 0.
PoissonSolution poisson_via_integral(const RateKernel& kernel, const GridFunction& h, double horizon, int steps,
                                     const IntegralSolverOptions& options = {});

/// max_k |G_X f(k) - (E h - h(k))| over the box.
double poisson_residual(const RateKernel& kernel, const PoissonSolution& sol, const GridFunction& h);

}  // namespace stein
