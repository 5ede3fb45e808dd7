#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "stein/core.hpp"
#include "stein/coupling.hpp"
#include "stein/error.hpp"
#include "stein/mm1.hpp"

using namespace stein;

namespace {

double z_score(double estimate, double exact, double se) { return se > 0.0 ? (estimate - exact) / se : 0.0; }

}  // namespace

TEST_CASE("pair keeps a gap of at most one and couples") {
    const Mm1Params p(1.0, 2.0, 1.0);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto tr = simulate_pair(p, 3, 1e3, seed);
        REQUIRE(tr.coupled);
        CHECK(tr.states.front().levels[0] == 3);
        CHECK(tr.states.front().levels[1] == 4);
        Index prev_gap = 1;
        for (const auto& s : tr.states) {
            const Index gap = s.levels[1] - s.levels[0];
            CHECK((gap == 0 || gap == 1));
            CHECK(gap <= prev_gap);
            prev_gap = gap;
        }
        CHECK(tr.states.back().levels[0] == tr.states.back().levels[1]);
        CHECK(tr.transitions.back() == 3);  // the extra customer leaves while system 0 is empty
        CHECK(tr.coupling_time == tr.states.back().time);
    }
}

TEST_CASE("pure death couples after k0 + 1 services") {
    const Mm1Params p(0.0, 1.5, 1.0);
    for (Index k0 : {0, 1, 6}) {
        const auto tr = simulate_pair(p, k0, 1e3, 4);
        CHECK(tr.transitions.size() == static_cast<std::size_t>(k0 + 1));
        CHECK(std::none_of(tr.transitions.begin(), tr.transitions.end(), [](int r) { return r == 1; }));
    }
}

TEST_CASE("quadruple ordering and the gated last service") {
    const Mm1Params p(1.0, 2.0, 1.0);
    std::size_t row5 = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto tr = simulate_quadruple(p, 2, 1e3, seed);
        for (std::size_t i = 0; i < 4; ++i) CHECK(tr.states.front().levels[i] == 2 + static_cast<Index>(i));
        std::array<Index, 3> prev{1, 1, 1};
        for (std::size_t e = 0; e < tr.states.size(); ++e) {
            const auto& s = tr.states[e];
            for (std::size_t i = 0; i < 3; ++i) {
                const Index gap = s.levels[i + 1] - s.levels[i];
                CHECK((gap == 0 || gap == 1));
                CHECK(gap <= prev[i]);
                prev[i] = gap;
            }
            if (e + 1 < tr.states.size() && tr.transitions[e] == 5) {
                ++row5;
                CHECK(s.levels[2] == 0);
                CHECK(s.levels[3] > 0);
            }
        }
        CHECK(tr.states.back().levels[0] == tr.states.back().levels[3]);
    }
    CHECK(row5 > 0);
}

TEST_CASE("inter-event times are exponential with the state's total rate") {
    // First event from (k0+1, k0) with k0 > 0: total rate lambda + mu.
    const Mm1Params p(1.0, 2.0, 1.0);
    const int bins = 20;
    const int n = 10000;
    std::vector<int> counts(bins, 0);
    for (int i = 0; i < n; ++i) {
        const auto tr = simulate_pair(p, 5, 1e3, static_cast<std::uint64_t>(i));
        const double dt = tr.states[1].time - tr.states[0].time;
        const double u = 1.0 - std::exp(-(p.lambda + p.mu) * dt);
        ++counts[std::min(bins - 1, static_cast<int>(u * bins))];
    }
    double chi2 = 0.0;
    const double expected = static_cast<double>(n) / bins;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    MESSAGE("chi-square: " << chi2);
    CHECK(chi2 < 36.19);  // 1% critical value, 19 degrees of freedom
}

TEST_CASE("mean coupling time matches Dynkin's formula") {
    const Mm1Params p(1.0, 2.0, 1.0);
    for (Index k : {0, 3, 10}) {
        const auto e = estimate_coupling_time(p, k, 10000, 17);
        const double exact = static_cast<double>(k + 1) / (p.mu - p.lambda);
        CHECK(std::abs(z_score(e.mean, exact, e.stderr_)) <= 3.0);
        CHECK(e.replications == 10000);
    }
}

TEST_CASE("finite-difference estimates against the exact solver") {
    const Mm1Params p(1.0, 2.0, 1.0);
    const auto spec = LatticeSpec::line(1.0, 0, truncation_level(0.5) + 400);
    SUBCASE("constant h") {
        const auto e = estimate_delta(p, GridFunction::constant(spec, 2.0), 3, 1, 100, 1);
        CHECK(e.mean == 0.0);
        CHECK(e.stderr_ == 0.0);
    }
    SUBCASE("identity, first order at 0") {
        const auto h = GridFunction::from_points_1d(spec, [](double x) { return x; });
        const auto e = estimate_delta(p, h, 0, 1, 10000, 5);
        CHECK(std::abs(z_score(e.mean, 1.0, e.stderr_)) <= 3.0);
    }
    SUBCASE("random h, orders 1 to 3") {
        for (int order = 1; order <= 3; ++order) {
            const auto h = sample_dlip_higher(spec, order, 40 + static_cast<std::uint64_t>(order));
            const auto exact = mm1_poisson(p, h);
            for (Index k : {0, 5}) {
                const auto e = estimate_delta(p, h, k, order, 10000, 100 + static_cast<std::uint64_t>(order));
                CHECK(std::abs(z_score(e.mean, exact.diff(order, k), e.stderr_)) <= 3.0);
            }
        }
    }
    SUBCASE("arguments") {
        const auto h = GridFunction::constant(spec, 0.0);
        CHECK_THROWS_AS(estimate_delta(p, h, 0, 4, 10, 1), ArgumentError);
        CHECK_THROWS_AS(estimate_delta(p, h, 0, 1, 1, 1), ArgumentError);
        CHECK_THROWS_AS(estimate_delta(p, GridFunction::constant(LatticeSpec::line(1.0, 1, 9), 0.0), 0, 1, 10, 1),
                        ArgumentError);
    }
}

TEST_CASE("estimates are reproducible") {
    const Mm1Params p(1.0, 2.0, 1.0);
    const auto spec = LatticeSpec::line(1.0, 0, 500);
    const auto h = sample_dlip(spec, 3);
    const auto a = estimate_delta(p, h, 2, 2, 500, 9);
    const auto b = estimate_delta(p, h, 2, 2, 500, 9);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("misaligned reflected Brownian motions") {
    const Mm1Params p(1.0, 2.0, 1.0);
    const double eps = 0.1;
    const auto r = rbm_misalignment_demo(p, eps, 0.2, 0.0, 300, 21);
    CHECK(r.dt == doctest::Approx(eps * eps / 100.0));
    CHECK(r.fraction_ok >= 0.99);
    CHECK(std::abs(z_score(r.window_mean, r.window_expected, r.window_stderr)) <= 3.0);
    CHECK(r.window_expected == doctest::Approx(0.05));
    CHECK(r.max_d3_plus_r0 <= 1e-12);
    CHECK(std::abs(r.r0_at_gamma1 - eps / 4.0) <= r.slack);
    CHECK(std::abs(r.r0_at_gamma2 - 3.0 * eps / 4.0) <= r.slack);
    CHECK_THROWS_AS(rbm_misalignment_demo(p, eps, 0.05, 0.0, 10, 1), ArgumentError);
}
