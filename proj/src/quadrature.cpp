#include "stein/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stein/error.hpp"

namespace stein {

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 7>::integrate(f, a, b);
}

QuadratureResult gauss_kronrod(const std::function<double(double)>& f, double a, double b, double rel_tol,
                               unsigned max_depth) {
    QuadratureResult r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &r.error, &r.l1);
    return r;
}

QuadratureResult exponential_expectation(const std::function<double(double)>& f, double mean, double cell,
                                         double rel_tol, double cutoff_means, double abs_floor,
                                         const std::vector<double>& breaks) {
    if (!(mean > 0.0) || !(cell > 0.0)) throw ArgumentError("exponential expectation needs mean > 0 and cell > 0");
    const double upper = cutoff_means * mean;
    const auto cells = static_cast<long>(std::ceil(upper / cell));
    std::vector<double> edges;
    edges.reserve(static_cast<std::size_t>(cells) + breaks.size() + 1);
    for (long c = 0; c < cells; ++c) edges.push_back(cell * static_cast<double>(c));
    edges.push_back(upper);
    for (double b : breaks) {
        if (b > 0.0 && b < upper) edges.push_back(b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    auto integrand = [&](double y) { return f(y) * std::exp(-y / mean) / mean; };
    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const auto r = gauss_kronrod(integrand, edges[i], edges[i + 1], rel_tol, 4);
        total.value += r.value;
        total.error += r.error;
        total.l1 += r.l1;
    }
    if (!std::isfinite(total.value) || total.error > rel_tol * total.l1 + abs_floor)
        throw ToleranceError("exponential-law quadrature did not reach tolerance (error estimate " +
                             std::to_string(total.error) + ")");
    return total;
}

}  // namespace stein
