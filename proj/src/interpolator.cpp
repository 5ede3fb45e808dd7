#include "stein/interpolator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stein/error.hpp"

namespace stein {

namespace {

constexpr std::int64_t binomial(int n, int k) {
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Coefficients (in t) multiplying D^n f(k), n = 0..4, in the piece polynomial.
using OperatorRow = std::array<Rational, WeightTable::kCoeffs>;

std::array<OperatorRow, 5> operator_basis() {
    std::array<OperatorRow, 5> c{};
    c[0][0] = Rational(1);
    c[1][1] = Rational(1);
    // t(-D^2/2) + t^2/2 D^2
    c[2][1] = Rational(-1, 2);
    c[2][2] = Rational(1, 2);
    // t(D^3/3) - t^2/2 D^3 + t^3/6 D^3
    c[3][1] = Rational(1, 3);
    c[3][2] = Rational(-1, 2);
    c[3][3] = Rational(1, 6);
    c[4][4] = Rational(-23, 3);
    c[4][5] = Rational(41, 2);
    c[4][6] = Rational(-55, 3);
    c[4][7] = Rational(11, 2);
    return c;
}

}  // namespace

WeightTable::WeightTable() {
    const auto basis = operator_basis();
    for (int node = 0; node < kNodes; ++node) {
        ExactRow row{};
        for (int n = node; n < kNodes; ++n) {
            const std::int64_t sign = ((n - node) % 2 == 0) ? 1 : -1;
            const Rational w(sign * binomial(n, node));
            for (int p = 0; p < kCoeffs; ++p) row[p] += basis[n][p] * w;
        }
        exact_[node] = row;
    }
    for (int node = 0; node < kNodes; ++node) {
        for (int p = 0; p < kCoeffs; ++p) deriv_[0][node][p] = exact_[node][p].to_double();
        for (int a = 1; a < kCoeffs; ++a) {
            for (int p = 0; p + 1 < kCoeffs; ++p) deriv_[a][node][p] = deriv_[a - 1][node][p + 1] * (p + 1);
            deriv_[a][node][kCoeffs - 1] = 0.0;
        }
    }
}

const WeightTable& WeightTable::standard() {
    static const WeightTable table;
    return table;
}

double WeightTable::eval(int node, double t, int a) const {
    if (node < 0 || node >= kNodes) throw ArgumentError("weight index must be in 0..4, got " + std::to_string(node));
    if (a < 0 || a >= kCoeffs) throw ArgumentError("weight derivative order must be in 0..7");
    const auto& c = deriv_[a][node];
    double r = c[kCoeffs - 1 - a];
    for (int p = kCoeffs - 2 - a; p >= 0; --p) r = r * t + c[p];
    return r;
}

void WeightTable::eval_all(double t, int a, std::span<double, kNodes> out) const {
    for (int i = 0; i < kNodes; ++i) out[i] = eval(i, t, a);
}

double weight(int i, double t) { return WeightTable::standard().eval(i, t, 0); }

void to_json(nlohmann::json& j, const WeightTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.exact()) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& c : row) r.push_back({c.num(), c.den()});
        rows.push_back(r);
    }
    j = nlohmann::json{{"degree", WeightTable::kCoeffs - 1},
                       {"nodes", WeightTable::kNodes},
                       {"variable", "t = (x - delta*k)/delta"},
                       {"coefficients", rows}};
}

Interpolant::Interpolant(GridFunction f, const WeightTable& table) : f_(std::move(f)), table_(&table) {}

Interpolant::Locator Interpolant::locate(double x) const {
    if (!std::isfinite(x)) throw DomainError("evaluation point must be finite");
    const double s = x / delta();
    const double r = std::nearbyint(s);
    if (std::abs(s - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s)))
        return Locator{static_cast<Index>(r), 0.0, true};
    const double fl = std::floor(s);
    return Locator{static_cast<Index>(fl), s - fl, false};
}

std::vector<Interpolant::Locator> Interpolant::locate_all(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(dim()))
        throw ArgumentError("evaluation point has " + std::to_string(x.size()) + " coordinates, grid has dimension " +
                            std::to_string(dim()));
    std::vector<Locator> loc;
    loc.reserve(x.size());
    for (double xi : x) loc.push_back(locate(xi));
    return loc;
}

bool Interpolant::piece_available(std::span<const Index> k) const {
    const auto& spec = f_.spec();
    for (int i = 0; i < spec.dim; ++i) {
        if (k[i] < spec.lower[i] || k[i] + 4 > spec.upper[i]) return false;
    }
    return true;
}

double Interpolant::domain_lo(int axis) const { return delta() * static_cast<double>(f_.spec().lower.at(axis)); }
double Interpolant::domain_hi(int axis) const { return delta() * static_cast<double>(f_.spec().upper.at(axis) - 4); }

void Interpolant::check_domain(std::span<const Index> k, std::span<const double> x) const {
    const auto& spec = f_.spec();
    for (int i = 0; i < spec.dim; ++i) {
        if (k[i] < spec.lower[i] || k[i] + 4 > spec.upper[i])
            throw DomainError("coordinate " + std::to_string(i) + " = " + std::to_string(x[i]) +
                              " outside the interpolation domain [" + std::to_string(domain_lo(i)) + ", " +
                              std::to_string(domain_hi(i)) + "]");
    }
}

double Interpolant::piece(std::span<const Index> k, std::span<const double> t, const MultiIndex& a) const {
    const int d = dim();
    if (k.size() != static_cast<std::size_t>(d) || t.size() != static_cast<std::size_t>(d) || a.dim() != d)
        throw ArgumentError("piece evaluation: dimension mismatch");
    if (!piece_available(k)) {
        std::vector<double> x(d);
        for (int i = 0; i < d; ++i) x[i] = delta() * (static_cast<double>(k[i]) + t[i]);
        check_domain(k, x);
    }
    // Per-axis weight vectors scaled by delta^{-a_j}.
    std::vector<std::array<double, WeightTable::kNodes>> w(d);
    for (int j = 0; j < d; ++j) {
        table_->eval_all(t[j], a.a[j], w[j]);
        const double scale = std::pow(delta(), -a.a[j]);
        for (double& v : w[j]) v *= scale;
    }
    if (d == 1) {
        double s = 0.0;
        for (int i = 0; i < WeightTable::kNodes; ++i) s += w[0][i] * f_.at(k[0] + i);
        return s;
    }
    // Tensor-product sum over {0..4}^d.
    const auto& spec = f_.spec();
    std::size_t n = 1;
    for (int j = 0; j < d; ++j) n *= WeightTable::kNodes;
    std::vector<int> idx(d, 0);
    Point p(d);
    double s = 0.0;
    for (std::size_t lin = 0; lin < n; ++lin) {
        double prod = 1.0;
        for (int j = 0; j < d; ++j) {
            prod *= w[j][idx[j]];
            p[j] = k[j] + idx[j];
        }
        if (prod != 0.0) s += prod * f_.values()[spec.linear_index(p)];
        for (int j = d - 1; j >= 0; --j) {
            if (++idx[j] < WeightTable::kNodes) break;
            idx[j] = 0;
        }
    }
    return s;
}

double Interpolant::piece_1d(Index k, double t, int a) const {
    Index kk[1] = {k};
    double tt[1] = {t};
    return piece(kk, tt, MultiIndex({a}));
}

double Interpolant::evaluate_1d(double x) const { return derivative_1d(x, 0); }

double Interpolant::derivative_1d(double x, int a) const {
    if (dim() != 1) throw ArgumentError("derivative_1d needs a one-dimensional grid");
    double xs[1] = {x};
    return derivative_nd(xs, MultiIndex({a}));
}

double Interpolant::evaluate_nd(std::span<const double> x) const {
    return derivative_nd(x, MultiIndex(std::vector<int>(dim(), 0)));
}

double Interpolant::derivative_nd(std::span<const double> x, const MultiIndex& a) const {
    if (a.dim() != dim()) throw ArgumentError("multi-index dimension does not match the grid");
    if (a.order() > 4) throw ArgumentError("derivative order above 4 is not supported");
    const auto loc = locate_all(x);
    Point k(dim());
    std::vector<double> t(dim());
    bool any_knot = false;
    for (int i = 0; i < dim(); ++i) {
        k[i] = loc[i].k;
        t[i] = loc[i].t;
        any_knot = any_knot || loc[i].on_knot;
    }
    check_domain(k, x);
    if (a.order() == 4 && any_knot)
        throw UndefinedDerivativeError("fourth-order derivative is undefined on the knot set");
    return piece(k, t, a);
}

}  // namespace stein
