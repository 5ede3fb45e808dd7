#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "stein/core.hpp"
#include "stein/mm1.hpp"
#include "stein/random.hpp"

namespace stein {

/// Levels in units of delta, lowest system first: levels[i] = x^(i) / delta.
template <std::size_t N>
struct JointChainState {
    std::array<Index, N> levels{};
    double time = 0.0;
};

template <std::size_t N>
struct JointTrajectory {
    std::vector<JointChainState<N>> states;  // state after each event, starting with the initial one
    std::vector<int> transitions;            // table row (1-based) that fired, one per event
    double coupling_time = 0.0;              // first time the top system meets system 0 (all gaps closed)
    bool coupled = false;
    bool overran = false;                    // simulation continued past `horizon` to reach coupling
};

/// Joint chain (X^(1), X^(0)) from (k0 + 1, k0), run until coupling
/// (extended past `horizon` if needed, flagged as overran).
JointTrajectory<2> simulate_pair(const Mm1Params& p, Index k0, double horizon, std::uint64_t seed);

/// Joint quadruple chain from (k0, k0+1, k0+2, k0+3), run until all four coincide.
JointTrajectory<4> simulate_quadruple(const Mm1Params& p, Index k0, double horizon, std::uint64_t seed);

struct CouplingEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t replications = 0;
    std::size_t overruns = 0;
    std::optional<double> tau_mean;
    std::optional<double> tau_stderr;
};

/// Monte-Carlo estimate of D^order f_h(delta k) from the time integral up to
/// the coupling time. Orders 2 and 3 add the run from 0 (common random numbers).
CouplingEstimate estimate_delta(const Mm1Params& p, const GridFunction& h, Index k, int order, std::size_t reps,
                                std::uint64_t seed, double horizon = 1e3);

/// Monte-Carlo mean coupling time started from (k+1, k); compare with (k+1)/(mu-lambda).
CouplingEstimate estimate_coupling_time(const Mm1Params& p, Index k, std::size_t reps, std::uint64_t seed,
                                        double horizon = 1e3);

struct MisalignmentReport {
    double eps = 0.0;
    double x0 = 0.0;
    double dt = 0.0;
    double slack = 0.0;
    std::size_t replications = 0;
    std::size_t resampled = 0;          // replications whose window was not observed within the horizon
    std::size_t window_ok = 0;          // D3 <= -eps/4 + slack on the whole window
    double fraction_ok = 0.0;
    double window_mean = 0.0;           // E(gamma2 - gamma1)
    double window_stderr = 0.0;
    double window_expected = 0.0;       // eps / (2 delta (mu - lambda))
    double r0_at_gamma1 = 0.0;          // mean R^(0)(gamma1)
    double r0_at_gamma2 = 0.0;          // mean R^(0)(gamma2)
    double max_d3_plus_r0 = 0.0;        // max |D3 + R^(0)| before the hitting step of gamma2
};

/// Four RBMs sharing one Brownian path, started eps apart from x0, Euler steps
/// of size dt (dt <= 0 picks eps^2/100) with the running-infimum reflection.
MisalignmentReport rbm_misalignment_demo(const Mm1Params& p, double eps, double x0, double dt, std::size_t reps,
                                         std::uint64_t seed, double horizon = 1e3);

void to_json(nlohmann::json& j, const CouplingEstimate& e);
void to_json(nlohmann::json& j, const MisalignmentReport& r);

}  // namespace stein
