#include "stein/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "stein/error.hpp"

namespace stein {

double evaluate_rate(const RateExpr& expr, std::span<const Index> k) {
    return std::visit(
        [&](const auto& e) -> double {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ConstantRate>) {
                return e.c;
            } else if constexpr (std::is_same_v<T, AffineRate>) {
                double r = e.c0;
                for (std::size_t j = 0; j < e.slope.size() && j < k.size(); ++j) r += e.slope[j] * static_cast<double>(k[j]);
                return r;
            } else if constexpr (std::is_same_v<T, GatedRate>) {
                return k[static_cast<std::size_t>(e.axis)] >= e.min_index ? e.c : 0.0;
            } else {
                return e.fn(k);
            }
        },
        expr);
}

RateKernel::RateKernel(LatticeSpec spec, std::vector<Jump> jumps) : spec_(std::move(spec)), jumps_(std::move(jumps)) {
    spec_.validate();
    std::set<Point> seen;
    for (const auto& j : jumps_) {
        if (j.offset.size() != static_cast<std::size_t>(spec_.dim)) throw ArgumentError("jump offset dimension mismatch");
        if (std::all_of(j.offset.begin(), j.offset.end(), [](Index v) { return v == 0; }))
            throw ArgumentError("jump offsets must be nonzero");
        if (!seen.insert(j.offset).second) throw ArgumentError("jump offsets must be distinct");
        if (const auto* g = std::get_if<GatedRate>(&j.rate); g && (g->axis < 0 || g->axis >= spec_.dim))
            throw ArgumentError("gated rate axis out of range");
    }
    Point target(spec_.dim);
    for (std::size_t lin = 0; lin < spec_.size(); ++lin) {
        const Point k = spec_.point_at(lin);
        for (const auto& j : jumps_) {
            const double r = evaluate_rate(j.rate, k);
            if (!std::isfinite(r) || r < 0.0)
                throw ArgumentError("rate must be finite and non-negative (got " + std::to_string(r) + ")");
            for (int i = 0; i < spec_.dim; ++i) target[i] = k[i] + j.offset[i];
            if (r > 0.0 && !spec_.contains(target)) ++dropped_;
        }
    }
}

double RateKernel::raw_rate(std::size_t jump, std::span<const Index> k) const {
    return evaluate_rate(jumps_.at(jump).rate, k);
}

double RateKernel::rate(std::size_t jump, std::span<const Index> k) const {
    if (!spec_.contains(k)) throw IndexRangeError("rate requested outside the kernel box");
    const auto& j = jumps_.at(jump);
    for (int i = 0; i < spec_.dim; ++i) {
        const Index t = k[i] + j.offset[i];
        if (t < spec_.lower[i] || t > spec_.upper[i]) return 0.0;
    }
    return evaluate_rate(j.rate, k);
}

double RateKernel::total_rate(std::span<const Index> k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < jumps_.size(); ++j) s += rate(j, k);
    return s;
}

double RateKernel::max_total_rate() const {
    double m = 0.0;
    for (std::size_t lin = 0; lin < spec_.size(); ++lin) m = std::max(m, total_rate(spec_.point_at(lin)));
    return m;
}

RateKernel mm1_kernel(double lambda, double mu, double delta, Index n) {
    if (lambda < 0.0 || !(mu > 0.0)) throw ArgumentError("M/M/1 rates need lambda >= 0 and mu > 0");
    std::vector<Jump> jumps;
    jumps.push_back(Jump{Point{1}, ConstantRate{lambda}});
    jumps.push_back(Jump{Point{-1}, GatedRate{mu, 0, 1}});
    return RateKernel(LatticeSpec::line(delta, 0, n), std::move(jumps));
}

void to_json(nlohmann::json& j, const RateKernel& kernel) {
    nlohmann::json jumps = nlohmann::json::array();
    for (const auto& jump : kernel.jumps()) {
        nlohmann::json rate = std::visit(
            [](const auto& e) -> nlohmann::json {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, ConstantRate>) {
                    return {{"type", "constant"}, {"c", e.c}};
                } else if constexpr (std::is_same_v<T, AffineRate>) {
                    return {{"type", "affine"}, {"c0", e.c0}, {"slope", e.slope}};
                } else if constexpr (std::is_same_v<T, GatedRate>) {
                    return {{"type", "gated"}, {"c", e.c}, {"axis", e.axis}, {"min_index", e.min_index}};
                } else {
                    return {{"type", "custom"}, {"label", e.label}};
                }
            },
            jump.rate);
        jumps.push_back({{"offset", jump.offset}, {"rate", rate}});
    }
    nlohmann::json lattice;
    to_json(lattice, kernel.spec());
    j = nlohmann::json{{"lattice", lattice}, {"jumps", jumps}, {"dropped_transitions", kernel.dropped_transitions()}};
}

RateKernel rate_kernel_from_json(const nlohmann::json& j) {
    LatticeSpec spec;
    from_json(j.at("lattice"), spec);
    std::vector<Jump> jumps;
    for (const auto& item : j.at("jumps")) {
        Jump jump;
        jump.offset = item.at("offset").get<Point>();
        const auto& r = item.at("rate");
        const auto type = r.at("type").get<std::string>();
        if (type == "constant") {
            jump.rate = ConstantRate{r.at("c").get<double>()};
        } else if (type == "affine") {
            jump.rate = AffineRate{r.at("c0").get<double>(), r.at("slope").get<std::vector<double>>()};
        } else if (type == "gated") {
            jump.rate = GatedRate{r.at("c").get<double>(), r.value("axis", 0), r.value("min_index", Index{1})};
        } else {
            throw ArgumentError("unknown rate expression type '" + type + "'");
        }
        jumps.push_back(std::move(jump));
    }
    return RateKernel(std::move(spec), std::move(jumps));
}

double StationaryDistribution::expectation(const GridFunction& h) const {
    if (!(h.spec() == spec)) throw ArgumentError("test function lives on a different box than the stationary law");
    double s = 0.0;
    const auto v = h.values();
    for (std::size_t i = 0; i < probs.size(); ++i) s += probs[i] * v[i];
    return s;
}

double generator_apply(const RateKernel& kernel, const GridFunction& f, std::span<const Index> k) {
    const int d = kernel.spec().dim;
    if (k.size() != static_cast<std::size_t>(d)) throw ArgumentError("lattice point dimension mismatch");
    Point target(d);
    double s = 0.0;
    double fk = 0.0;
    bool have_fk = false;
    for (std::size_t j = 0; j < kernel.num_jumps(); ++j) {
        const double r = kernel.rate(j, k);
        if (r == 0.0) continue;
        if (!have_fk) {
            fk = f.at(k);
            have_fk = true;
        }
        const auto& off = kernel.jumps()[j].offset;
        for (int i = 0; i < d; ++i) target[i] = k[i] + off[i];
        s += r * (f.at(target) - fk);
    }
    return s;
}

double generator_apply(const RateKernel& kernel, const GridFunction& f, Index k) {
    Index p[1] = {k};
    return generator_apply(kernel, f, std::span<const Index>(p, 1));
}

GridFunction generator_grid(const RateKernel& kernel, const GridFunction& f) {
    return GridFunction::from_indices(kernel.spec(), [&](std::span<const Index> k) { return generator_apply(kernel, f, k); });
}

namespace {

struct Transition {
    std::size_t to;
    double rate;
};

// Outgoing transitions per state (linear index), after the boundary policy.
std::vector<std::vector<Transition>> transition_lists(const RateKernel& kernel) {
    const auto& spec = kernel.spec();
    std::vector<std::vector<Transition>> out(spec.size());
    Point target(spec.dim);
    for (std::size_t s = 0; s < spec.size(); ++s) {
        const Point k = spec.point_at(s);
        for (std::size_t j = 0; j < kernel.num_jumps(); ++j) {
            const double r = kernel.rate(j, k);
            if (r == 0.0) continue;
            for (int i = 0; i < spec.dim; ++i) target[i] = k[i] + kernel.jumps()[j].offset[i];
            out[s].push_back(Transition{spec.linear_index(target), r});
        }
    }
    return out;
}

bool reaches_all(const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<char> seen(adj.size(), 0);
    std::deque<std::size_t> q{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        const auto s = q.front();
        q.pop_front();
        for (auto t : adj[s]) {
            if (!seen[t]) {
                seen[t] = 1;
                ++count;
                q.push_back(t);
            }
        }
    }
    return count == adj.size();
}

void require_irreducible(const std::vector<std::vector<Transition>>& lists) {
    const std::size_t n = lists.size();
    std::vector<std::vector<std::size_t>> fwd(n), bwd(n);
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& tr : lists[s]) {
            fwd[s].push_back(tr.to);
            bwd[tr.to].push_back(s);
        }
    }
    if (!reaches_all(fwd) || !reaches_all(bwd))
        throw SolverError("truncated chain is reducible on the box; stationary law is not unique");
}

Point anchor_point(const LatticeSpec& spec) {
    Point origin(spec.dim, 0);
    return spec.contains(origin) ? origin : spec.lower;
}

std::vector<double> solve_sparse(Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b, const char* what) {
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) throw SolverError(std::string(what) + ": factorization failed (singular system)");
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw SolverError(std::string(what) + ": solve failed");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw SolverError(std::string(what) + ": non-finite solution");
    }
    return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace

StationaryDistribution stationary(const RateKernel& kernel) {
    const auto& spec = kernel.spec();
    const auto lists = transition_lists(kernel);
    const std::size_t n = lists.size();
    if (n == 1) return StationaryDistribution{spec, {1.0}};
    require_irreducible(lists);

    // Q^T pi = 0 with the first equation replaced by sum(pi) = 1.
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t s = 0; s < n; ++s) {
        double out = 0.0;
        for (const auto& tr : lists[s]) {
            out += tr.rate;
            if (tr.to != 0) trip.emplace_back(static_cast<int>(tr.to), static_cast<int>(s), tr.rate);
        }
        if (s != 0) trip.emplace_back(static_cast<int>(s), static_cast<int>(s), -out);
    }
    for (std::size_t s = 0; s < n; ++s) trip.emplace_back(0, static_cast<int>(s), 1.0);
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    b[0] = 1.0;
    auto pi = solve_sparse(a, b, "stationary distribution");

    double total = 0.0;
    for (double& p : pi) {
        if (p < 0.0) {
            if (p < -1e-12) throw SolverError("stationary solve produced a negative probability");
            p = 0.0;
        }
        total += p;
    }
    for (double& p : pi) p /= total;
    return StationaryDistribution{spec, std::move(pi)};
}

PoissonSolution solve_poisson(const RateKernel& kernel, const GridFunction& h) {
    const auto& spec = kernel.spec();
    if (!(h.spec() == spec)) throw ArgumentError("test function must live on the kernel box");
    const auto pi = stationary(kernel);
    const double mean_h = pi.expectation(h);
    const auto lists = transition_lists(kernel);
    const std::size_t n = lists.size();
    const Point anchor = anchor_point(spec);
    const std::size_t a_idx = spec.linear_index(anchor);

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    const auto hv = h.values();
    for (std::size_t s = 0; s < n; ++s) {
        if (s == a_idx) {
            trip.emplace_back(static_cast<int>(s), static_cast<int>(s), 1.0);
            b[static_cast<Eigen::Index>(s)] = 0.0;
            continue;
        }
        double out = 0.0;
        for (const auto& tr : lists[s]) {
            out += tr.rate;
            trip.emplace_back(static_cast<int>(s), static_cast<int>(tr.to), tr.rate);
        }
        trip.emplace_back(static_cast<int>(s), static_cast<int>(s), -out);
        b[static_cast<Eigen::Index>(s)] = mean_h - hv[s];
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    auto f = n == 1 ? std::vector<double>{0.0} : solve_sparse(a, b, "Poisson equation");
    PoissonSolution sol{spec, GridFunction(spec, std::move(f)), mean_h, anchor, false, 0.0, "direct"};
    return sol;
}

PoissonSolution birth_death_poisson(double lambda, double mu, double delta, const GridFunction& h) {
    if (!(lambda > 0.0) || !(mu > 0.0)) throw ArgumentError("birth-death rates must be positive");
    const double rho = lambda / mu;
    if (!(rho < 1.0)) throw StabilityError("birth-death Poisson solver needs rho = lambda/mu < 1");
    const auto& spec = h.spec();
    if (spec.dim != 1 || spec.lower[0] != 0) throw ArgumentError("birth-death solver needs h on a box {0..N}");
    if (std::abs(spec.delta - delta) > 1e-15 * delta) throw ArgumentError("h spacing differs from delta");

    const auto hv = h.values();
    const std::size_t n = hv.size();
    // Truncated geometric law on {0..N}.
    std::vector<double> w(n);
    double norm = 0.0;
    double p = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        w[k] = p;
        norm += p;
        p *= rho;
    }
    double mean_h = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean_h += w[k] / norm * hv[k];

    // S_k = sum_{j>k} rho^{j-k} (E h - h_j);  Delta f(k) = -S_k / lambda.
    std::vector<double> f(n, 0.0);
    std::vector<double> df(n > 0 ? n - 1 : 0);
    double tail = 0.0;
    for (std::size_t k = n - 1; k-- > 0;) {
        tail = rho * ((mean_h - hv[k + 1]) + tail);
        df[k] = -tail / lambda;
    }
    for (std::size_t k = 1; k < n; ++k) f[k] = f[k - 1] + df[k - 1];
    return PoissonSolution{spec, GridFunction(spec, std::move(f)), mean_h, Point{0}, false, 0.0, "birth-death"};
}

PoissonSolution poisson_via_integral(const RateKernel& kernel, const GridFunction& h, double horizon, int steps,
                                     const IntegralSolverOptions& options) {
    const auto& spec = kernel.spec();
    if (!(h.spec() == spec)) throw ArgumentError("test function must live on the kernel box");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ArgumentError("horizon must be finite and non-negative");
    if (steps < 1) throw ArgumentError("steps must be at least 1");

    const auto pi = stationary(kernel);
    const double mean_h = pi.expectation(h);
    const auto lists = transition_lists(kernel);
    const std::size_t n = lists.size();
    const double big_lambda = 1.01 * kernel.max_total_rate();

    // v(t) = E_k h(X(t)) - E h(X), propagated by P = I + Q / Lambda.
    std::vector<double> v(n), g(n, 0.0);
    const auto hv = h.values();
    for (std::size_t s = 0; s < n; ++s) v[s] = hv[s] - mean_h;

    auto apply_p = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t s = 0; s < n; ++s) {
            double acc = x[s];
            for (const auto& tr : lists[s]) acc += tr.rate / big_lambda * (x[tr.to] - x[s]);
            y[s] = acc;
        }
    };

    // Geometric (log-spaced) cell boundaries on [0, horizon].
    std::vector<double> grid{0.0};
    if (horizon > 0.0 && big_lambda > 0.0) {
        const double scale = big_lambda * horizon;
        for (int i = 1; i <= steps; ++i) {
            const double ti = (i == steps) ? horizon : horizon * std::expm1(std::log1p(scale) * i / steps) / scale;
            const double prev = grid.back();
            // Keep Lambda * width moderate so exp(-Lambda * width) stays representable.
            const int pieces = static_cast<int>(std::ceil(big_lambda * (ti - prev) / 200.0));
            for (int p = 1; p <= std::max(pieces, 1); ++p) grid.push_back(prev + (ti - prev) * p / std::max(pieces, 1));
        }
    }

    std::vector<double> term(n), next(n), v_end(n);
    for (std::size_t c = 0; c + 1 < grid.size(); ++c) {
        const double width = grid[c + 1] - grid[c];
        if (width <= 0.0) continue;
        const double m = big_lambda * width;
        // term = P^j v;  pmf = Poisson(j; m);  integral weight = (width/m) * P(N >= j+1).
        // The upper tails are summed backwards so they stay accurate below 1e-16.
        std::vector<double> pmf{std::exp(-m)};
        while (pmf.size() <= m || pmf.back() > 1e-30) {
            if (pmf.size() > 10000 + 10 * m) throw SolverError("uniformization series failed to converge");
            pmf.push_back(pmf.back() * m / static_cast<double>(pmf.size()));
        }
        std::vector<double> upper(pmf.size(), 0.0);
        for (std::size_t j = pmf.size() - 1; j-- > 0;) upper[j] = upper[j + 1] + pmf[j + 1];
        term = v;
        std::fill(v_end.begin(), v_end.end(), 0.0);
        for (std::size_t j = 0; j < pmf.size(); ++j) {
            const double int_w = width / m * upper[j];
            for (std::size_t s = 0; s < n; ++s) {
                v_end[s] += pmf[j] * term[s];
                g[s] += int_w * term[s];
            }
            if (j + 1 < pmf.size()) {
                apply_p(term, next);
                term.swap(next);
            }
        }
        v = v_end;
    }

    double tail = 0.0;
    for (double x : v) tail = std::max(tail, std::abs(x));
    const Point anchor = anchor_point(spec);
    const double g0 = g[spec.linear_index(anchor)];
    for (double& x : g) x -= g0;
    PoissonSolution sol{spec, GridFunction(spec, std::move(g)), mean_h, anchor, tail > options.warn_tolerance, tail,
                        "uniformization-integral"};
    return sol;
}

double poisson_residual(const RateKernel& kernel, const PoissonSolution& sol, const GridFunction& h) {
    const auto& spec = kernel.spec();
    double worst = 0.0;
    for (std::size_t lin = 0; lin < spec.size(); ++lin) {
        const Point k = spec.point_at(lin);
        const double r = generator_apply(kernel, sol.f, k) - (sol.mean_h - h.at(k));
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace stein
