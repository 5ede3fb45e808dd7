#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "stein/core.hpp"
#include "stein/error.hpp"
#include "stein/interpolator.hpp"
#include "stein/rational.hpp"

using namespace stein;

namespace {

Rational rpow(Rational t, int e) {
    Rational r(1);
    for (int i = 0; i < e; ++i) r = r * t;
    return r;
}

Rational binom(int n, int i) {
    std::int64_t c = 1;
    for (int j = 0; j < i; ++j) c = c * (n - j) / (j + 1);
    return Rational(c);
}

// Weight of node i evaluated from the forward-difference form of the piece
// polynomial with f = indicator of node i, using exact arithmetic.
Rational oracle_weight(int node, Rational t) {
    auto diff = [&](int n) {
        // D^n e_node(0) = (-1)^{n-node} C(n, node) when node <= n.
        if (node > n) return Rational(0);
        return ((n - node) % 2 ? Rational(-1) : Rational(1)) * binom(n, node);
    };
    const Rational f0 = node == 0 ? Rational(1) : Rational(0);
    const Rational d1 = diff(1), d2 = diff(2), d3 = diff(3), d4 = diff(4);
    Rational p = f0;
    p += t * (d1 - d2 / Rational(2) + d3 / Rational(3));
    p += rpow(t, 2) / Rational(2) * (d2 - d3);
    p += rpow(t, 3) / Rational(6) * d3;
    const Rational q = Rational(-23, 3) * rpow(t, 4) + Rational(41, 2) * rpow(t, 5) + Rational(-55, 3) * rpow(t, 6) +
                       Rational(11, 2) * rpow(t, 7);
    p += q * d4;
    return p;
}

Rational table_weight(int node, Rational t) {
    Rational s(0);
    for (int p = 0; p < WeightTable::kCoeffs; ++p) s += WeightTable::standard().exact_coeff(node, p) * rpow(t, p);
    return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("weight table matches the forward-difference form exactly") {
    for (int node = 0; node < 5; ++node) {
        for (int num = 0; num <= 8; ++num) {
            const Rational t(num, 8);
            CHECK(table_weight(node, t) == oracle_weight(node, t));
        }
    }
    CHECK(oracle_weight(0, Rational(1, 2)) == Rational(59, 256));
    CHECK(table_weight(0, Rational(1, 2)) == Rational(59, 256));
    CHECK(weight(0, 0.5) == 0.23046875);
}

TEST_CASE("weights at the knot and errors") {
    CHECK(weight(0, 0.0) == 1.0);
    for (int i = 1; i < 5; ++i) CHECK(weight(i, 0.0) == 0.0);
    CHECK_THROWS_AS(weight(5, 0.1), ArgumentError);
    CHECK_THROWS_AS(weight(-1, 0.1), ArgumentError);
}

TEST_CASE("partition of unity at random points") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double t = u(rng);
        double s = 0.0;
        for (int i = 0; i < 5; ++i) s += weight(i, t);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("interpolation at knots and constants") {
    const auto spec = LatticeSpec::line(0.3, -4, 30);
    const auto f = sample_dlip(spec, 8);
    const Interpolant itp(f);
    for (Index k = -4; k <= 26; ++k) CHECK(rel(itp.evaluate_1d(0.3 * static_cast<double>(k)), f.at(k)) <= 1e-12);
    const Interpolant c(GridFunction::constant(spec, -2.5));
    for (double x : {-1.1, 0.0, 0.31, 4.4, 7.79}) {
        CHECK(c.evaluate_1d(x) == doctest::Approx(-2.5).epsilon(1e-13));
        for (int a = 1; a <= 3; ++a) CHECK(std::abs(c.derivative_1d(x, a)) <= 1e-12 * 2.5 * std::pow(0.3, -a) * 100);
    }
}

TEST_CASE("cubic and quadratic reproduction, quartic deviation") {
    const double d = 0.2;
    const auto spec = LatticeSpec::line(d, 0, 40);
    const Interpolant cube(GridFunction::from_points_1d(spec, [](double x) { return x * x * x - 2 * x + 1; }));
    const Interpolant sq(GridFunction::from_points_1d(spec, [](double x) { return x * x; }));
    const Interpolant quart(GridFunction::from_points_1d(spec, [](double x) { return x * x * x * x; }));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, cube.domain_hi(0));
    double quartic_dev = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double x = u(rng);
        CHECK(rel(cube.evaluate_1d(x), x * x * x - 2 * x + 1) <= 1e-9);
        CHECK(rel(cube.derivative_1d(x, 1), 3 * x * x - 2) <= 1e-9);
        // The third derivative divides the stencil sum by delta^3, so it loses digits.
        CHECK(std::abs(cube.derivative_1d(x, 3) - 6.0) <= 1e-12 * 400.0 / (d * d * d) * 100);
        CHECK(rel(sq.derivative_1d(x, 2), 2.0) <= 1e-9);
        quartic_dev = std::max(quartic_dev, std::abs(quart.evaluate_1d(x) - x * x * x * x));
    }
    CHECK(quartic_dev > 1e-6);
}

TEST_CASE("C3 gluing at interior knots in one dimension") {
    const auto spec = LatticeSpec::line(0.1, 0, 60);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Interpolant itp(sample_dlip(spec, seed));
        for (Index k = 1; k + 4 <= 60; ++k) {
            for (int a = 0; a <= 3; ++a) {
                const double left = itp.piece_1d(k - 1, 1.0, a);
                const double right = itp.piece_1d(k, 0.0, a);
                CHECK(std::abs(left - right) <= 1e-9 * std::max(1.0, std::abs(right)));
            }
        }
    }
}

TEST_CASE("face matching in two dimensions") {
    const LatticeSpec spec(0.25, {0, 0}, {12, 12});
    const auto f = GridFunction::from_indices(spec, [](std::span<const Index> k) {
        return std::sin(0.7 * static_cast<double>(k[0])) * std::cos(0.4 * static_cast<double>(k[1])) +
               0.01 * static_cast<double>(k[0] * k[0] * k[1]);
    });
    const Interpolant itp(f);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Index k0 = 1; k0 + 4 <= 12; ++k0) {
        for (int n = 0; n < 10; ++n) {
            const Index k1 = static_cast<Index>(n % 8);
            const double s = u(rng);
            for (int a0 = 0; a0 <= 3; ++a0) {
                for (int a1 = 0; a1 <= 3; ++a1) {
                    const MultiIndex a({a0, a1});
                    const Index kl[2] = {k0 - 1, k1}, kr[2] = {k0, k1};
                    const double tl[2] = {1.0, s}, tr[2] = {0.0, s};
                    const double left = itp.piece(kl, tl, a), right = itp.piece(kr, tr, a);
                    CHECK(std::abs(left - right) <= 1e-9 * std::max(1.0, std::abs(right)));
                    // Same along the other axis.
                    const Index ku[2] = {k1, k0 - 1}, kv[2] = {k1, k0};
                    const double tu[2] = {s, 1.0}, tv[2] = {s, 0.0};
                    const MultiIndex b({a1, a0});
                    const double lo = itp.piece(ku, tu, b), hi = itp.piece(kv, tv, b);
                    CHECK(std::abs(lo - hi) <= 1e-9 * std::max(1.0, std::abs(hi)));
                }
            }
        }
    }
}

TEST_CASE("multi-dimensional reproduction and mixed partials") {
    const double d = 0.5;
    const LatticeSpec spec(d, {0, 0}, {10, 10});
    const Interpolant sum(GridFunction::from_indices(spec, [&](std::span<const Index> k) {
        return d * static_cast<double>(k[0]) + d * static_cast<double>(k[1]);
    }));
    const Interpolant prod(GridFunction::from_indices(spec, [&](std::span<const Index> k) {
        return d * static_cast<double>(k[0]) * d * static_cast<double>(k[1]);
    }));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int n = 0; n < 50; ++n) {
        const double x[2] = {u(rng), u(rng)};
        CHECK(rel(sum.evaluate_nd(x), x[0] + x[1]) <= 1e-9);
        CHECK(rel(prod.derivative_nd(x, MultiIndex({1, 1})), 1.0) <= 1e-9);
        CHECK(prod.derivative_nd(x, MultiIndex({0, 0})) == prod.evaluate_nd(x));
    }
    const auto f = sample_dlip(spec, 9);
    const Interpolant g(f);
    const double knot[2] = {1.5, 2.0};
    CHECK(rel(g.evaluate_nd(knot), f.at(Point{3, 4})) <= 1e-12);
}

TEST_CASE("translation invariance") {
    const auto f = sample_dlip(LatticeSpec::line(0.25, 0, 30), 3);
    const Index shift = 7;
    std::vector<double> vals(f.values().begin(), f.values().end());
    const GridFunction g(LatticeSpec::line(0.25, shift, 30 + shift), vals);
    const Interpolant a(f), b(g);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        const Index k = static_cast<Index>(n % 26);
        const double t = u(rng);
        for (int der = 0; der <= 3; ++der)
            CHECK(std::abs(a.piece_1d(k, t, der) - b.piece_1d(k + shift, t, der)) <= 1e-12 * std::max(1.0, std::abs(a.piece_1d(k, t, der))));
    }
}

TEST_CASE("domain and knot errors") {
    const Interpolant itp(sample_dlip(LatticeSpec::line(0.5, 0, 10), 1));
    CHECK(itp.domain_hi(0) == 3.0);
    CHECK_NOTHROW(itp.evaluate_1d(3.0));
    CHECK_NOTHROW(itp.evaluate_1d(3.1));  // stencil 6..10 still fits
    CHECK_THROWS_AS(itp.evaluate_1d(3.5), DomainError);
    CHECK_THROWS_AS(itp.evaluate_1d(-0.1), DomainError);
    CHECK_THROWS_AS(itp.derivative_1d(1.0, 4), UndefinedDerivativeError);
    CHECK_NOTHROW(itp.derivative_1d(1.1, 4));
    CHECK_THROWS_AS(itp.derivative_1d(1.1, 5), ArgumentError);
}

TEST_CASE("derivative to difference ratio is stable across spacing") {
    // Ratio |d^a A f(x)| / (delta^{-a} max |D^a f|) over the stencil, on a corpus of random grids.
    auto c_hat = [](double delta) {
        double worst = 0.0;
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto f = sample_dlip(LatticeSpec::line(delta, 0, 20), seed);
            const Interpolant itp(f);
            for (int n = 0; n < 10; ++n) {
                const Index k = static_cast<Index>(n + 3);
                const double t = 0.05 + 0.9 * u(rng);
                for (int a = 1; a <= 3; ++a) {
                    double m = 0.0;
                    for (Index i = 0; i + a <= 4; ++i) m = std::max(m, std::abs(forward_difference_1d(f, a, k + i)));
                    if (m == 0.0) continue;
                    const double ratio = std::abs(itp.piece_1d(k, t, a)) / (std::pow(delta, -a) * m);
                    worst = std::max(worst, ratio);
                }
            }
        }
        return worst;
    };
    const double c1 = c_hat(1.0), c2 = c_hat(0.1), c3 = c_hat(0.01);
    MESSAGE("empirical C: " << c1 << " " << c2 << " " << c3);
    CHECK(c1 > 0.0);
    CHECK(std::max({c1, c2, c3}) <= 1.01 * std::min({c1, c2, c3}));
}

TEST_CASE("weight table JSON") {
    nlohmann::json j;
    to_json(j, WeightTable::standard());
    CHECK(j.at("nodes") == 5);
    CHECK(j.at("coefficients").size() == 5);
}
