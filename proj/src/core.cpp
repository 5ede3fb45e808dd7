#include "stein/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "stein/error.hpp"
#include "stein/random.hpp"

namespace stein {

LatticeSpec::LatticeSpec(double delta_, Point lower_, Point upper_)
    : dim(static_cast<int>(lower_.size())), delta(delta_), lower(std::move(lower_)), upper(std::move(upper_)) {
    validate();
}

LatticeSpec LatticeSpec::line(double delta, Index lo, Index hi) {
    return LatticeSpec(delta, Point{lo}, Point{hi});
}

void LatticeSpec::validate() const {
    if (dim <= 0) throw ArgumentError("lattice dimension must be positive");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError("lattice spacing delta must be positive and finite");
    if (lower.size() != static_cast<std::size_t>(dim) || upper.size() != static_cast<std::size_t>(dim))
        throw ArgumentError("lattice corners must have length dim");
    for (int i = 0; i < dim; ++i) {
        if (lower[i] > upper[i])
            throw ArgumentError("lattice lower corner exceeds upper corner on axis " + std::to_string(i));
    }
}

std::size_t LatticeSpec::size() const {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(extent(i));
    return n;
}

bool LatticeSpec::contains(std::span<const Index> k) const {
    if (k.size() != static_cast<std::size_t>(dim)) return false;
    for (int i = 0; i < dim; ++i) {
        if (k[i] < lower[i] || k[i] > upper[i]) return false;
    }
    return true;
}

std::size_t LatticeSpec::linear_index(std::span<const Index> k) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim; ++i) idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(k[i] - lower[i]);
    return idx;
}

Point LatticeSpec::point_at(std::size_t linear) const {
    Point k(dim);
    for (int i = dim - 1; i >= 0; --i) {
        auto n = static_cast<std::size_t>(extent(i));
        k[i] = lower[i] + static_cast<Index>(linear % n);
        linear /= n;
    }
    return k;
}

GridFunction::GridFunction(LatticeSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.size())
        throw ArgumentError("grid function needs " + std::to_string(spec_.size()) + " values, got " +
                            std::to_string(values_.size()));
    for (double v : values_) {
        if (!std::isfinite(v)) throw ArgumentError("grid function values must be finite");
    }
}

GridFunction GridFunction::constant(const LatticeSpec& spec, double c) {
    return GridFunction(spec, std::vector<double>(spec.size(), c));
}

GridFunction GridFunction::from_indices(const LatticeSpec& spec,
                                        const std::function<double(std::span<const Index>)>& fn) {
    std::vector<double> v(spec.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point k = spec.point_at(i);
        v[i] = fn(k);
    }
    return GridFunction(spec, std::move(v));
}

GridFunction GridFunction::from_points_1d(const LatticeSpec& spec, const std::function<double(double)>& fn) {
    if (spec.dim != 1) throw ArgumentError("from_points_1d needs a one-dimensional lattice");
    return from_indices(spec, [&](std::span<const Index> k) { return fn(spec.delta * static_cast<double>(k[0])); });
}

double GridFunction::at(std::span<const Index> k) const {
    if (k.size() != static_cast<std::size_t>(spec_.dim))
        throw IndexRangeError("lattice point has " + std::to_string(k.size()) + " coordinates, box has dimension " +
                              std::to_string(spec_.dim));
    for (int i = 0; i < spec_.dim; ++i) {
        if (k[i] < spec_.lower[i] || k[i] > spec_.upper[i])
            throw IndexRangeError("coordinate " + std::to_string(i) + " = " + std::to_string(k[i]) +
                                  " outside box [" + std::to_string(spec_.lower[i]) + ", " +
                                  std::to_string(spec_.upper[i]) + "]");
    }
    return values_[spec_.linear_index(k)];
}

double GridFunction::at(Index k) const {
    Index p[1] = {k};
    return at(std::span<const Index>(p, 1));
}

GridFunction GridFunction::scaled(double factor) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= factor;
    return GridFunction(spec_, std::move(v));
}

GridFunction GridFunction::plus(const GridFunction& other, double other_factor) const {
    if (!(other.spec_ == spec_)) throw ArgumentError("grid functions live on different boxes");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += other_factor * other.values_[i];
    return GridFunction(spec_, std::move(v));
}

MultiIndex::MultiIndex(std::vector<int> orders) : a(std::move(orders)) {
    for (int x : a) {
        if (x < 0) throw ArgumentError("multi-index entries must be non-negative");
    }
}

MultiIndex MultiIndex::axis(int dim, int axis, int order) {
    std::vector<int> a(dim, 0);
    a.at(axis) = order;
    return MultiIndex(std::move(a));
}

int MultiIndex::order() const { return std::accumulate(a.begin(), a.end(), 0); }

double forward_difference(const GridFunction& f, const MultiIndex& a, std::span<const Index> k) {
    const int d = f.dim();
    if (a.dim() != d) throw ArgumentError("multi-index dimension does not match the grid");
    if (k.size() != static_cast<std::size_t>(d)) throw ArgumentError("lattice point dimension does not match the grid");
    const auto& spec = f.spec();
    for (int i = 0; i < d; ++i) {
        if (k[i] < spec.lower[i] || k[i] + a.a[i] > spec.upper[i])
            throw IndexRangeError("difference stencil leaves the box on coordinate " + std::to_string(i) + ": needs [" +
                                  std::to_string(k[i]) + ", " + std::to_string(k[i] + a.a[i]) + "] within [" +
                                  std::to_string(spec.lower[i]) + ", " + std::to_string(spec.upper[i]) + "]");
    }

    // Gather the (a_1+1) x ... x (a_d+1) stencil, then difference it axis by axis.
    std::vector<std::size_t> ext(d);
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) {
        ext[i] = static_cast<std::size_t>(a.a[i]) + 1;
        n *= ext[i];
    }
    std::vector<double> buf(n);
    Point p(d);
    for (std::size_t lin = 0; lin < n; ++lin) {
        std::size_t r = lin;
        for (int i = d - 1; i >= 0; --i) {
            p[i] = k[i] + static_cast<Index>(r % ext[i]);
            r /= ext[i];
        }
        buf[lin] = f.at(p);
    }

    std::size_t stride = 1;
    for (int i = d - 1; i >= 0; --i) {
        const std::size_t len = ext[i];
        const std::size_t outer = n / (len * stride);
        for (int step = 0; step < a.a[i]; ++step) {
            // After `step` passes the live entries along this axis are 0..len-1-step.
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t s = 0; s < stride; ++s) {
                    const std::size_t base = o * len * stride + s;
                    for (std::size_t j = 0; j + 1 < len - static_cast<std::size_t>(step); ++j)
                        buf[base + j * stride] = buf[base + (j + 1) * stride] - buf[base + j * stride];
                }
            }
        }
        stride *= len;
    }
    return buf[0];
}

double forward_difference_1d(const GridFunction& f, int order, Index k) {
    Index p[1] = {k};
    return forward_difference(f, MultiIndex({order}), std::span<const Index>(p, 1));
}

namespace {

// Random-walk profile with increments uniform on [-step, step], anchored at 0
// on the lowest index.
std::vector<double> increment_profile(Index n_points, double step, Engine& rng) {
    std::uniform_real_distribution<double> u(-step, step);
    std::vector<double> p(static_cast<std::size_t>(n_points), 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) p[i] = p[i - 1] + u(rng);
    return p;
}

std::vector<double> differences(const std::vector<double>& v) {
    std::vector<double> d(v.size() > 0 ? v.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    return d;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// One-dimensional profile on n points with |Delta^v p| <= bound * delta^v for v <= max_order.
std::vector<double> higher_profile(Index n_points, double delta, int max_order, double bound, std::uint64_t seed) {
    constexpr int kMaxAttempts = 100;
    const double d3 = delta * delta * delta;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Engine rng = make_engine(seed, static_cast<std::uint64_t>(attempt));
        std::uniform_real_distribution<double> u(-bound * d3 / 4.0, bound * d3 / 4.0);
        const auto n = static_cast<std::size_t>(n_points);
        // Third differences -> second -> first -> values, zero integration constants.
        std::vector<double> third(n > 3 ? n - 3 : 0);
        for (double& x : third) x = u(rng);
        std::vector<double> second(n > 2 ? n - 2 : 0, 0.0);
        for (std::size_t i = 1; i < second.size(); ++i) second[i] = second[i - 1] + third[i - 1];
        std::vector<double> first(n > 1 ? n - 1 : 0, 0.0);
        for (std::size_t i = 1; i < first.size(); ++i) first[i] = first[i - 1] + second[i - 1];
        std::vector<double> h(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) h[i] = h[i - 1] + first[i - 1];

        double factor = 1.0;
        std::vector<double> diff = h;
        for (int v = 1; v <= 3; ++v) {
            diff = differences(diff);
            const double m = max_abs(diff);
            const double cap = bound * std::pow(delta, v);
            if (v <= max_order && m > cap) factor = std::min(factor, cap / m);
        }
        for (double& x : h) x *= factor;

        bool ok = true;
        diff = h;
        for (int v = 1; v <= max_order && ok; ++v) {
            diff = differences(diff);
            ok = max_abs(diff) <= bound * std::pow(delta, v);
        }
        if (ok) return h;
    }
    throw SamplingError("higher-order dLip sampler failed after 100 attempts (seed " + std::to_string(seed) + ")");
}

}  // namespace

GridFunction sample_dlip(const LatticeSpec& spec, std::uint64_t seed) {
    spec.validate();
    Engine rng = make_engine(seed);
    std::vector<std::vector<double>> profiles;
    for (int axis = 0; axis < spec.dim; ++axis) profiles.push_back(increment_profile(spec.extent(axis), spec.delta, rng));
    return GridFunction::from_indices(spec, [&](std::span<const Index> k) {
        double s = 0.0;
        for (int axis = 0; axis < spec.dim; ++axis) s += profiles[axis][static_cast<std::size_t>(k[axis] - spec.lower[axis])];
        return s;
    });
}

GridFunction sample_dlip_higher(const LatticeSpec& spec, int max_order, std::uint64_t seed, double scale) {
    spec.validate();
    if (spec.dim != 1) throw ArgumentError("sample_dlip_higher is one-dimensional");
    if (max_order < 1 || max_order > 3) throw ArgumentError("max_order must be in 1..3");
    if (!(scale > 0.0)) throw ArgumentError("scale must be positive");
    return GridFunction(spec, higher_profile(spec.extent(0), spec.delta, max_order, scale, seed));
}

GridFunction sample_mdisc(const LatticeSpec& spec, double c, std::uint64_t seed) {
    spec.validate();
    if (!(c > 0.0)) throw ArgumentError("M_disc constant must be positive");
    // Additive per-axis profiles: mixed differences vanish, pure ones obey the 1-d bounds.
    std::vector<std::vector<double>> profiles;
    for (int axis = 0; axis < spec.dim; ++axis)
        profiles.push_back(higher_profile(spec.extent(axis), spec.delta, 3, c, seed * 1000003ULL + static_cast<std::uint64_t>(axis)));
    return GridFunction::from_indices(spec, [&](std::span<const Index> k) {
        double s = 0.0;
        for (int axis = 0; axis < spec.dim; ++axis) s += profiles[axis][static_cast<std::size_t>(k[axis] - spec.lower[axis])];
        return s;
    });
}

namespace {

// Visits every multi-index a with 1 <= |a| <= max_total and every admissible k.
template <typename Fn>
bool scan_differences(const GridFunction& h, int max_total, bool pure_only, Fn&& ok) {
    const auto& spec = h.spec();
    const int d = spec.dim;
    std::vector<int> a(d, 0);
    // Enumerate multi-indices with entries 0..max_total.
    std::function<bool(int)> rec = [&](int axis) -> bool {
        if (axis == d) {
            MultiIndex mi(a);
            const int order = mi.order();
            if (order < 1 || order > max_total) return true;
            if (pure_only && std::count_if(a.begin(), a.end(), [](int x) { return x > 0; }) != 1) return true;
            Point lo = spec.lower, hi = spec.upper;
            for (int i = 0; i < d; ++i) hi[i] -= a[i];
            for (int i = 0; i < d; ++i) {
                if (hi[i] < lo[i]) return true;
            }
            LatticeSpec sub(spec.delta, lo, hi);
            for (std::size_t lin = 0; lin < sub.size(); ++lin) {
                Point k = sub.point_at(lin);
                if (!ok(order, forward_difference(h, mi, k))) return false;
            }
            return true;
        }
        for (int v = 0; v <= max_total; ++v) {
            a[axis] = v;
            if (!rec(axis + 1)) return false;
        }
        a[axis] = 0;
        return true;
    };
    return rec(0);
}

}  // namespace

bool in_dlip(const GridFunction& h, double slack) {
    const double delta = h.delta();
    return scan_differences(h, 1, true, [&](int, double v) { return std::abs(v) <= delta * (1.0 + slack); });
}

bool in_dlip_higher(const GridFunction& h, int max_order, double scale, double slack) {
    if (h.dim() != 1) throw ArgumentError("in_dlip_higher is one-dimensional");
    const double delta = h.delta();
    return scan_differences(h, max_order, true, [&](int order, double v) {
        return std::abs(v) <= scale * std::pow(delta, order) * (1.0 + slack);
    });
}

bool in_mdisc(const GridFunction& h, double c, double slack) {
    const double delta = h.delta();
    return scan_differences(h, 3, false, [&](int order, double v) {
        return std::abs(v) <= c * std::pow(delta, order) * (1.0 + slack);
    });
}

void to_json(nlohmann::json& j, const LatticeSpec& spec) {
    j = nlohmann::json{{"dim", spec.dim}, {"delta", spec.delta}, {"lower", spec.lower}, {"upper", spec.upper}};
}

void from_json(const nlohmann::json& j, LatticeSpec& spec) {
    spec = LatticeSpec(j.at("delta").get<double>(), j.at("lower").get<Point>(), j.at("upper").get<Point>());
    if (j.contains("dim") && j.at("dim").get<int>() != spec.dim)
        throw ArgumentError("lattice JSON: dim disagrees with corner lengths");
}

void to_json(nlohmann::json& j, const GridFunction& f) {
    to_json(j, f.spec());
    j["values"] = std::vector<double>(f.values().begin(), f.values().end());
}

GridFunction grid_function_from_json(const nlohmann::json& j) {
    LatticeSpec spec;
    from_json(j, spec);
    return GridFunction(spec, j.at("values").get<std::vector<double>>());
}

}  // namespace stein
