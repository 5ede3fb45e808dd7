#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "stein/core.hpp"
#include "stein/rational.hpp"

namespace stein {

/// Coefficients of the five degree-7 weight polynomials J_0..J_4.
///
/// Row i holds the coefficients of t^0..t^7 of J_i(t), where the interpolation
/// weight of node k+i on the piece starting at k is J_i((x - delta*k)/delta).
/// The rows are obtained by regrouping the forward-difference form of the
/// piece polynomial
///
///   P_k = f + t(D - D^2/2 + D^3/3) f + t^2/2 (D^2 - D^3) f + t^3/6 D^3 f
///         + (-23/3 t^4 + 41/2 t^5 - 55/3 t^6 + 11/2 t^7) D^4 f
///
/// into per-node weights with D^n f(k) = sum_i (-1)^{n-i} C(n,i) f(k+i).
class WeightTable {
public:
    static constexpr int kNodes = 5;
    static constexpr int kCoeffs = 8;
    using ExactRow = std::array<Rational, kCoeffs>;

    WeightTable();

    /// Process-wide instance.
    static const WeightTable& standard();

    const std::array<ExactRow, kNodes>& exact() const { return exact_; }
    Rational exact_coeff(int node, int power) const { return exact_.at(node).at(power); }

    /// d^a/dt^a J_node(t) for a = 0..7 (Horner evaluation).
    double eval(int node, double t, int a = 0) const;
    /// Fills out[i] = d^a/dt^a J_i(t), i = 0..4.
    void eval_all(double t, int a, std::span<double, kNodes> out) const;

private:
    std::array<ExactRow, kNodes> exact_;
    // deriv_[a][node][p]: coefficient of t^p in the a-th derivative.
    std::array<std::array<std::array<double, kCoeffs>, kNodes>, kCoeffs> deriv_{};
};

/// J_i(t). Throws ArgumentError for i outside 0..4.
double weight(int i, double t);

void to_json(nlohmann::json& j, const WeightTable& table);

/// Degree-7 forward-difference spline of a grid function: C^3 in every
/// coordinate, tensor product for d > 1. Immutable.
class Interpolant {
public:
    explicit Interpolant(GridFunction f, const WeightTable& table = WeightTable::standard());

    const GridFunction& grid() const { return f_; }
    const WeightTable& table() const { return *table_; }
    double delta() const { return f_.delta(); }
    int dim() const { return f_.dim(); }

    /// Cell index k(x) = floor(x/delta) and local coordinate t in [0, 1).
    /// Points within a few ulps of a knot snap onto it.
    struct Locator {
        Index k;
        double t;
        bool on_knot;
    };
    Locator locate(double x) const;

    double evaluate_1d(double x) const;
    double derivative_1d(double x, int a) const;
    double evaluate_nd(std::span<const double> x) const;
    double derivative_nd(std::span<const double> x, const MultiIndex& a) const;

    /// Evaluates the piece that starts at cell k at local coordinates t
    /// (t need not lie in [0, 1)). Used for shifted evaluations
    /// A f(x + delta*l) = piece(k(x) + l, t(x)) and for the gluing checks.
    double piece(std::span<const Index> k, std::span<const double> t, const MultiIndex& a) const;
    double piece_1d(Index k, double t, int a = 0) const;

    /// True when every node k..k+4 per axis lies inside the grid box.
    bool piece_available(std::span<const Index> k) const;
    /// Last admissible knot along one axis is delta*(upper - 4); evaluation is
    /// allowed on [delta*lower, delta*(upper - 3)) where the stencil still fits.
    double domain_lo(int axis) const;
    double domain_hi(int axis) const;

private:
    std::vector<Locator> locate_all(std::span<const double> x) const;
    void check_domain(std::span<const Index> k, std::span<const double> x) const;

    GridFunction f_;
    const WeightTable* table_;
};

}  // namespace stein
