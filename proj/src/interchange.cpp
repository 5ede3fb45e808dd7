#include "stein/interchange.hpp"

#include <array>
#include <cmath>
#include <string>

#include "stein/error.hpp"

namespace stein {

namespace {

using Weights = std::array<double, WeightTable::kNodes>;

struct Cell {
    Point k;
    std::vector<double> t;
    std::vector<Weights> w;  // per-axis J_i(t_j)
};

Cell locate_cell(const Interpolant& itp, std::span<const double> x) {
    const int d = itp.dim();
    if (x.size() != static_cast<std::size_t>(d))
        throw ArgumentError("evaluation point has " + std::to_string(x.size()) + " coordinates, grid has dimension " +
                            std::to_string(d));
    Cell c{Point(d), std::vector<double>(d), std::vector<Weights>(d)};
    for (int j = 0; j < d; ++j) {
        const auto loc = itp.locate(x[j]);
        c.k[j] = loc.k;
        c.t[j] = loc.t;
        itp.table().eval_all(loc.t, 0, c.w[j]);
    }
    return c;
}

// Calls fn(i, weight) for every i in {0..4}^d with the product weight.
template <class Fn>
void for_each_node(const Cell& c, Fn&& fn) {
    const int d = static_cast<int>(c.k.size());
    std::vector<int> idx(d, 0);
    std::size_t n = 1;
    for (int j = 0; j < d; ++j) n *= WeightTable::kNodes;
    for (std::size_t lin = 0; lin < n; ++lin) {
        double prod = 1.0;
        for (int j = 0; j < d; ++j) prod *= c.w[j][idx[j]];
        fn(idx, prod);
        for (int j = d - 1; j >= 0; --j) {
            if (++idx[j] < WeightTable::kNodes) break;
            idx[j] = 0;
        }
    }
}

Point offset_point(const Point& k, const std::vector<int>& i) {
    Point p(k);
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += i[j];
    return p;
}

Point shifted(const Point& k, const Point& l) {
    Point p(k);
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += l[j];
    return p;
}

void check_dims(const RateKernel& kernel, const GridFunction& f) {
    if (kernel.spec().dim != f.dim()) throw ArgumentError("kernel and grid function dimensions differ");
}

// Index errors inside a stencil are reported as domain errors at x.
template <class Fn>
double guarded(std::span<const double> x, Fn&& fn) {
    try {
        return fn();
    } catch (const IndexRangeError& e) {
        std::string where = "(";
        for (std::size_t j = 0; j < x.size(); ++j) where += (j ? ", " : "") + std::to_string(x[j]);
        throw DomainError("stencil at x = " + where + ") leaves the grid box: " + e.what());
    }
}

double raw_generator(const RateKernel& kernel, const GridFunction& f, const Point& k) {
    const double fk = f.at(k);
    double s = 0.0;
    for (const auto& jump : kernel.jumps()) {
        const double r = evaluate_rate(jump.rate, k);
        if (r == 0.0) continue;
        s += r * (f.at(shifted(k, jump.offset)) - fk);
    }
    return s;
}

double interpolated_rate_at(const RateKernel& kernel, std::size_t jump, const Cell& c) {
    const auto& expr = kernel.jumps().at(jump).rate;
    double s = 0.0;
    for_each_node(c, [&](const std::vector<int>& i, double w) {
        if (w != 0.0) s += w * evaluate_rate(expr, offset_point(c.k, i));
    });
    return s;
}

}  // namespace

double a_gx(const RateKernel& kernel, const GridFunction& f, std::span<const double> x) {
    check_dims(kernel, f);
    const Interpolant itp(f);
    const Cell c = locate_cell(itp, x);
    return guarded(x, [&] {
        double s = 0.0;
        for_each_node(c, [&](const std::vector<int>& i, double w) {
            const double g = raw_generator(kernel, f, offset_point(c.k, i));
            s += w * g;
        });
        return s;
    });
}

double a_gx(const RateKernel& kernel, const GridFunction& f, double x) {
    return a_gx(kernel, f, std::span<const double>(&x, 1));
}

double interpolated_rate(const RateKernel& kernel, std::size_t jump, std::span<const double> x,
                         const WeightTable& table) {
    const Interpolant itp(GridFunction::constant(kernel.spec(), 0.0), table);
    return interpolated_rate_at(kernel, jump, locate_cell(itp, x));
}

double interchanged_main(const RateKernel& kernel, const GridFunction& f, std::span<const double> x) {
    check_dims(kernel, f);
    const Interpolant itp(f);
    const Cell c = locate_cell(itp, x);
    const MultiIndex zero(std::vector<int>(f.dim(), 0));
    return guarded(x, [&] {
        const double af = itp.piece(c.k, c.t, zero);
        double s = 0.0;
        for (std::size_t l = 0; l < kernel.num_jumps(); ++l) {
            const double ab = interpolated_rate_at(kernel, l, c);
            const double af_shift = itp.piece(shifted(c.k, kernel.jumps()[l].offset), c.t, zero);
            s += ab * (af_shift - af);
        }
        return s;
    });
}

double interchanged_main(const RateKernel& kernel, const GridFunction& f, double x) {
    return interchanged_main(kernel, f, std::span<const double>(&x, 1));
}

double epsilon_1d(const RateKernel& kernel, const GridFunction& f, double x) {
    check_dims(kernel, f);
    if (f.dim() != 1) throw ArgumentError("epsilon_1d needs a one-dimensional grid");
    const Interpolant itp(f);
    const std::span<const double> xs(&x, 1);
    const Cell c = locate_cell(itp, xs);
    const Index k = c.k[0];
    const auto& w = c.w[0];
    return guarded(xs, [&] {
        double eps = 0.0;
        for (std::size_t jl = 0; jl < kernel.num_jumps(); ++jl) {
            const Index l = kernel.jumps()[jl].offset[0];
            const auto& expr = kernel.jumps()[jl].rate;
            const double ab = interpolated_rate_at(kernel, jl, c);
            for (int i = 1; i < WeightTable::kNodes; ++i) {
                if (w[i] == 0.0) continue;
                Index ki[1] = {k + i};
                const double dev = evaluate_rate(expr, ki) - ab;
                if (dev == 0.0) continue;
                double bracket = 0.0;
                for (int j = 0; j < i; ++j) {
                    if (l > 0) {
                        for (Index m = 0; m < l; ++m) bracket += forward_difference_1d(f, 2, k + m + j);
                    } else {
                        for (Index m = l; m < 0; ++m) bracket -= forward_difference_1d(f, 2, k + m + j);
                    }
                }
                eps += w[i] * dev * bracket;
            }
        }
        return eps;
    });
}

double epsilon_nd(const RateKernel& kernel, const GridFunction& f, std::span<const double> x) {
    check_dims(kernel, f);
    const Interpolant itp(f);
    const Cell c = locate_cell(itp, x);
    return guarded(x, [&] {
        double eps = 0.0;
        for (std::size_t jl = 0; jl < kernel.num_jumps(); ++jl) {
            const Point& l = kernel.jumps()[jl].offset;
            const auto& expr = kernel.jumps()[jl].rate;
            const double ab = interpolated_rate_at(kernel, jl, c);
            const double base = f.at(shifted(c.k, l)) - f.at(c.k);
            for_each_node(c, [&](const std::vector<int>& i, double w) {
                if (w == 0.0) return;
                const Point ki = offset_point(c.k, i);
                const double dev = evaluate_rate(expr, ki) - ab;
                if (dev == 0.0) return;
                eps += w * dev * (f.at(shifted(ki, l)) - f.at(ki) - base);
            });
        }
        return eps;
    });
}

GridFunction extend_hat(const GridFunction& f) {
    const auto& spec = f.spec();
    if (spec.dim != 1 || spec.lower[0] != 0) throw ArgumentError("extend_hat needs a one-dimensional box starting at 0");
    std::vector<double> v;
    v.reserve(f.values().size() + 1);
    v.push_back(f.values()[0]);
    v.insert(v.end(), f.values().begin(), f.values().end());
    return GridFunction(LatticeSpec::line(spec.delta, -1, spec.upper[0]), std::move(v));
}

double mm1_boundary_interchange(double lambda, double mu, double delta, const GridFunction& f, double x) {
    if (!(x >= 0.0)) throw DomainError("M/M/1 interchange is defined for x >= 0 (got " + std::to_string(x) + ")");
    if (std::abs(f.delta() - delta) > 1e-15 * delta) throw ArgumentError("grid spacing differs from delta");
    const Interpolant itp(extend_hat(f));
    const auto loc = itp.locate(x);
    const double af = itp.piece_1d(loc.k, loc.t);
    const double up = itp.piece_1d(loc.k + 1, loc.t);
    const double down = itp.piece_1d(loc.k - 1, loc.t);
    return lambda * (up - af) + mu * (down - af);
}

InterchangeReport interchange_report(const RateKernel& kernel, const GridFunction& f, std::span<const double> x) {
    InterchangeReport r;
    r.x.assign(x.begin(), x.end());
    r.lhs = a_gx(kernel, f, x);
    r.main_term = interchanged_main(kernel, f, x);
    r.epsilon = f.dim() == 1 ? epsilon_1d(kernel, f, x[0]) : epsilon_nd(kernel, f, x);
    r.residual = r.lhs - r.main_term - r.epsilon;
    return r;
}

InterchangeReport mm1_interchange_report(double lambda, double mu, double delta, const GridFunction& f, double x) {
    const auto& spec = f.spec();
    const RateKernel kernel = mm1_kernel(lambda, mu, delta, spec.upper.at(0));
    InterchangeReport r;
    r.x = {x};
    r.lhs = a_gx(kernel, f, x);
    r.main_term = mm1_boundary_interchange(lambda, mu, delta, f, x);
    const GridFunction fhat = extend_hat(f);
    const RateKernel constant(fhat.spec(), {Jump{Point{1}, ConstantRate{lambda}}, Jump{Point{-1}, ConstantRate{mu}}});
    r.epsilon = epsilon_1d(constant, fhat, x);
    r.residual = r.lhs - r.main_term - r.epsilon;
    return r;
}

void to_json(nlohmann::json& j, const InterchangeReport& r) {
    j = nlohmann::json{{"x", r.x},
                       {"lhs", r.lhs},
                       {"main_term", r.main_term},
                       {"epsilon", r.epsilon},
                       {"residual", r.residual}};
}

}  // namespace stein
