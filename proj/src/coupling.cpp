#include "stein/coupling.hpp"

#include <cmath>
#include <random>
#include <string>

#include "stein/error.hpp"
#include "stein/parallel.hpp"

namespace stein {

namespace {

constexpr std::uint64_t kMaxEvents = 100'000'000;

template <std::size_t N>
void check_order(const JointChainState<N>& s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (s.levels[i] < 0) throw Error("joint chain left the state space");
        if (i > 0) {
            const Index gap = s.levels[i] - s.levels[i - 1];
            if (gap != 0 && gap != 1) throw Error("joint chain ordering invariant violated");
        }
    }
}

// One event of the joint chain: row 1 is the shared arrival; row r >= 2 is a
// service that removes one customer from every system j >= r - 2, allowed only
// when r - 2 is the lowest system with a customer.
template <std::size_t N>
int step(const Mm1Params& p, JointChainState<N>& s, Engine& eng, double& dt_out) {
    std::size_t lowest = N;
    for (std::size_t j = 0; j < N; ++j) {
        if (s.levels[j] > 0) {
            lowest = j;
            break;
        }
    }
    const double service = lowest < N ? p.mu : 0.0;
    const double total = p.lambda + service;
    if (total <= 0.0) throw SamplingError("joint chain is absorbed with zero total rate");
    std::exponential_distribution<double> clock(total);
    dt_out = clock(eng);
    s.time += dt_out;
    std::uniform_real_distribution<double> u(0.0, total);
    if (u(eng) < p.lambda) {
        for (auto& x : s.levels) ++x;
        return 1;
    }
    for (std::size_t j = lowest; j < N; ++j) --s.levels[j];
    return static_cast<int>(lowest) + 2;
}

template <std::size_t N>
bool all_equal(const JointChainState<N>& s) {
    return s.levels[N - 1] == s.levels[0];
}

template <std::size_t N>
JointTrajectory<N> simulate_joint(const Mm1Params& p, Index k0, double horizon, std::uint64_t seed) {
    if (!(p.lambda >= 0.0) || !(p.mu > 0.0) || !(p.delta > 0.0)) throw ArgumentError("invalid M/M/1 parameters");
    if (k0 < 0) throw ArgumentError("initial level must be non-negative");
    Engine eng = make_engine(seed, 0);
    JointTrajectory<N> tr;
    JointChainState<N> s;
    for (std::size_t i = 0; i < N; ++i) s.levels[i] = k0 + static_cast<Index>(i);
    tr.states.push_back(s);
    double dt = 0.0;
    for (std::uint64_t n = 0; !all_equal(s); ++n) {
        if (n >= kMaxEvents) throw SamplingError("joint chain did not couple within the event budget");
        tr.transitions.push_back(step(p, s, eng, dt));
        check_order(s);
        tr.states.push_back(s);
    }
    tr.coupled = true;
    tr.coupling_time = s.time;
    tr.overran = s.time > horizon;
    return tr;
}

struct RunResult {
    double integral = 0.0;
    double tau = 0.0;
};

// int_0^tau D^j h(X0(t)) dt for the pair started at (k+1, k); empty dh integrates 0.
RunResult integrate_pair(const Mm1Params& p, const std::vector<double>& dh, Index k, Engine& eng) {
    JointChainState<2> s;
    s.levels = {k, k + 1};
    RunResult r;
    double dt = 0.0;
    for (std::uint64_t n = 0; s.levels[1] != s.levels[0]; ++n) {
        if (n >= kMaxEvents) throw SamplingError("pair did not couple within the event budget");
        const Index x0 = s.levels[0];
        double value = 0.0;
        if (!dh.empty()) {
            if (x0 >= static_cast<Index>(dh.size()))
                throw SamplingError("chain reached level " + std::to_string(x0) + " beyond the test-function box");
            value = dh[static_cast<std::size_t>(x0)];
        }
        step(p, s, eng, dt);
        check_order(s);
        r.integral += value * dt;
    }
    r.tau = s.time;
    return r;
}

std::vector<double> difference_table(const GridFunction& h, int order) {
    const auto& spec = h.spec();
    if (spec.dim != 1 || spec.lower[0] != 0) throw ArgumentError("coupling estimators need h on a box {0..N}");
    std::vector<double> out;
    for (Index x = 0; x + order <= spec.upper[0]; ++x) out.push_back(forward_difference_1d(h, order, x));
    return out;
}

struct Moments {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    const double n = static_cast<double>(v.size());
    for (double x : v) m.mean += x;
    m.mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return m;
}

}  // namespace

JointTrajectory<2> simulate_pair(const Mm1Params& p, Index k0, double horizon, std::uint64_t seed) {
    return simulate_joint<2>(p, k0, horizon, seed);
}

JointTrajectory<4> simulate_quadruple(const Mm1Params& p, Index k0, double horizon, std::uint64_t seed) {
    return simulate_joint<4>(p, k0, horizon, seed);
}

CouplingEstimate estimate_delta(const Mm1Params& p, const GridFunction& h, Index k, int order, std::size_t reps,
                                std::uint64_t seed, double horizon) {
    p.validate();
    if (order < 1 || order > 3) throw ArgumentError("order must be 1, 2 or 3");
    if (reps < 2) throw ArgumentError("need at least two replications");
    if (k < 0) throw ArgumentError("state index must be non-negative");
    const auto dh_k = difference_table(h, order);
    const auto dh_0 = order > 1 ? difference_table(h, order - 1) : std::vector<double>{};
    std::vector<double> sample(reps), tau(reps);
    std::vector<char> over(reps, 0);
    parallel_for(reps, [&](std::size_t i) {
        Engine eng = make_engine(seed, i);
        Engine from_zero = eng;
        const auto main = integrate_pair(p, dh_k, k, eng);
        double v = main.integral;
        if (order > 1) v += integrate_pair(p, dh_0, 0, from_zero).integral;
        sample[i] = v;
        tau[i] = main.tau;
        over[i] = main.tau > horizon;
    });
    const auto m = moments(sample);
    const auto t = moments(tau);
    CouplingEstimate e;
    e.mean = m.mean;
    e.stderr_ = m.stderr_;
    e.replications = reps;
    for (char o : over) e.overruns += static_cast<std::size_t>(o);
    e.tau_mean = t.mean;
    e.tau_stderr = t.stderr_;
    return e;
}

CouplingEstimate estimate_coupling_time(const Mm1Params& p, Index k, std::size_t reps, std::uint64_t seed,
                                        double horizon) {
    p.validate();
    if (reps < 2) throw ArgumentError("need at least two replications");
    if (k < 0) throw ArgumentError("state index must be non-negative");
    std::vector<double> tau(reps);
    std::vector<char> over(reps, 0);
    const std::vector<double> none;
    parallel_for(reps, [&](std::size_t i) {
        Engine eng = make_engine(seed, i);
        tau[i] = integrate_pair(p, none, k, eng).tau;
        over[i] = tau[i] > horizon;
    });
    const auto t = moments(tau);
    CouplingEstimate e;
    e.mean = t.mean;
    e.stderr_ = t.stderr_;
    e.replications = reps;
    for (char o : over) e.overruns += static_cast<std::size_t>(o);
    e.tau_mean = t.mean;
    e.tau_stderr = t.stderr_;
    return e;
}

MisalignmentReport rbm_misalignment_demo(const Mm1Params& p, double eps, double x0, double dt, std::size_t reps,
                                         std::uint64_t seed, double horizon) {
    p.validate();
    if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
    if (!(x0 > eps)) throw ArgumentError("x0 must exceed eps");
    if (reps < 2) throw ArgumentError("need at least two replications");
    if (dt <= 0.0) dt = eps * eps / 100.0;
    const double drift = p.delta * (p.lambda - p.mu);
    const double sigma = p.delta * std::sqrt(p.lambda + p.mu);
    const double sdt = std::sqrt(dt);

    MisalignmentReport rep;
    rep.eps = eps;
    rep.x0 = x0;
    rep.dt = dt;
    rep.slack = 3.0 * sdt * sigma;
    rep.replications = reps;
    rep.window_expected = eps / (2.0 * p.delta * (p.mu - p.lambda));

    struct Rep {
        double window = 0.0;
        double r0_g1 = 0.0;
        double r0_g2 = 0.0;
        double max_dev = 0.0;
        bool ok = true;
        std::size_t resampled = 0;
    };
    std::vector<Rep> out(reps);
    parallel_for(reps, [&](std::size_t i) {
        Rep& r = out[i];
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt > 1000) throw SamplingError("misalignment window never observed; increase the horizon");
            Engine eng = make_engine(seed, i | (attempt << 40));
            std::normal_distribution<double> normal(0.0, 1.0);
            double z = x0;  // free path x0 + drift t + sigma W(t)
            double running_min = z;
            double t = 0.0;
            double g1 = -1.0;
            bool ok = true;
            double max_dev = 0.0;
            bool done = false;
            while (t <= horizon) {
                t += dt;
                z += drift * dt + sigma * sdt * normal(eng);
                running_min = std::min(running_min, z);
                std::array<double, 4> y{};
                std::array<double, 4> refl{};
                for (int k = 0; k < 4; ++k) {
                    refl[k] = std::max(0.0, -(running_min + k * eps));
                    y[k] = z + k * eps + refl[k];
                }
                if (g1 < 0.0 && y[1] <= 0.75 * eps) {
                    g1 = t;
                    r.r0_g1 = refl[0];
                }
                if (g1 >= 0.0) {
                    const double d3 = y[3] - 3.0 * y[2] + 3.0 * y[1] - y[0];
                    ok = ok && d3 <= -0.25 * eps + rep.slack;
                    if (y[1] <= 0.25 * eps) {
                        r.window = t - g1;
                        r.r0_g2 = refl[0];
                        done = true;
                        break;
                    }
                    // The hitting step may overshoot below -eps; earlier steps have R1 = R2 = R3 = 0.
                    max_dev = std::max(max_dev, std::abs(d3 + refl[0]));
                }
            }
            if (done) {
                r.ok = ok;
                r.max_dev = max_dev;
                break;
            }
            ++r.resampled;
        }
    });
    std::vector<double> windows(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const Rep& r = out[i];
        windows[i] = r.window;
        rep.window_ok += r.ok ? 1 : 0;
        rep.resampled += r.resampled;
        rep.r0_at_gamma1 += r.r0_g1 / static_cast<double>(reps);
        rep.r0_at_gamma2 += r.r0_g2 / static_cast<double>(reps);
        rep.max_d3_plus_r0 = std::max(rep.max_d3_plus_r0, r.max_dev);
    }
    const auto m = moments(windows);
    rep.window_mean = m.mean;
    rep.window_stderr = m.stderr_;
    rep.fraction_ok = static_cast<double>(rep.window_ok) / static_cast<double>(reps);
    return rep;
}

void to_json(nlohmann::json& j, const CouplingEstimate& e) {
    j = nlohmann::json{{"mean", e.mean},
                       {"stderr", e.stderr_},
                       {"replications", e.replications},
                       {"overruns", e.overruns}};
    if (e.tau_mean) j["tau_mean"] = *e.tau_mean;
    if (e.tau_stderr) j["tau_stderr"] = *e.tau_stderr;
}

void to_json(nlohmann::json& j, const MisalignmentReport& r) {
    j = nlohmann::json{{"eps", r.eps},
                       {"x0", r.x0},
                       {"dt", r.dt},
                       {"slack", r.slack},
                       {"replications", r.replications},
                       {"resampled", r.resampled},
                       {"window_ok", r.window_ok},
                       {"fraction_ok", r.fraction_ok},
                       {"window_mean", r.window_mean},
                       {"window_stderr", r.window_stderr},
                       {"window_expected", r.window_expected},
                       {"r0_at_gamma1", r.r0_at_gamma1},
                       {"r0_at_gamma2", r.r0_at_gamma2},
                       {"max_d3_plus_r0", r.max_d3_plus_r0}};
}

}  // namespace stein
