#include "stein/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stein/error.hpp"
#include "stein/interpolator.hpp"
#include "stein/quadrature.hpp"

namespace stein {

namespace {

constexpr double kTailMass = 1e-17;

Index cell_of(double t, double delta) {
    const double s = t / delta;
    const double r = std::nearbyint(s);
    if (std::abs(s - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s)))
        return static_cast<Index>(r);
    return static_cast<Index>(std::floor(s));
}

// Lattice support points of a discrete law inside [lo, hi].
void add_support(const DistributionHandle::Law& law, double lo, double hi, std::vector<double>& pts) {
    if (const auto* l = std::get_if<LatticeLaw>(&law)) {
        for (std::size_t i = 0; i < l->probs.size(); ++i) {
            const double x = l->delta * static_cast<double>(l->lower + static_cast<Index>(i));
            if (x >= lo && x <= hi) pts.push_back(x);
        }
    } else if (const auto* g = std::get_if<GeometricLaw>(&law)) {
        const Index n_hi = static_cast<Index>(std::floor(hi / g->delta));
        for (Index n = std::max<Index>(0, static_cast<Index>(std::ceil(lo / g->delta))); n <= n_hi; ++n)
            pts.push_back(g->delta * static_cast<double>(n));
    }
}

// Integral over [a, b] of |s - exp(-t/m)|, 0 <= a < b.
double exp_cell(double s, double m, double a, double b) {
    const double ea = std::exp(-a / m);
    const double eb = std::exp(-b / m);
    auto signed_part = [&](double x, double y, double ex, double ey) { return m * (ex - ey) - s * (y - x); };
    if (s > eb && s < ea) {
        const double tc = -m * std::log(s);
        return std::abs(signed_part(a, tc, ea, s)) + std::abs(signed_part(tc, b, s, eb));
    }
    return std::abs(signed_part(a, b, ea, eb));
}

}  // namespace

DistributionHandle::DistributionHandle(Law law) : law_(std::move(law)) {}

DistributionHandle DistributionHandle::lattice(double delta, Index lower, std::vector<double> probs) {
    if (!(delta > 0.0)) throw ArgumentError("lattice law needs delta > 0");
    if (probs.empty()) throw ArgumentError("lattice law needs at least one atom");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ArgumentError("lattice probabilities must be finite and >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("lattice probabilities must sum to 1");
    return DistributionHandle(LatticeLaw{delta, lower, std::move(probs)});
}

DistributionHandle DistributionHandle::geometric(double rho, double delta) {
    if (!(rho > 0.0 && rho < 1.0) || !(delta > 0.0)) throw ArgumentError("geometric law needs 0 < rho < 1, delta > 0");
    return DistributionHandle(GeometricLaw{rho, delta});
}

DistributionHandle DistributionHandle::exponential(double mean) {
    if (!(mean > 0.0)) throw ArgumentError("exponential law needs mean > 0");
    return DistributionHandle(ExponentialLaw{mean});
}

std::string DistributionHandle::kind() const {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, LatticeLaw>) return "lattice-pmf";
            else if constexpr (std::is_same_v<T, GeometricLaw>) return "geometric";
            else return "exponential";
        },
        law_);
}

double DistributionHandle::cdf(double t) const {
    return std::visit(
        [t](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, LatticeLaw>) {
                const Index n = cell_of(t, l.delta) - l.lower;
                if (n < 0) return 0.0;
                const auto stop = std::min<std::size_t>(static_cast<std::size_t>(n) + 1, l.probs.size());
                return std::min(1.0, std::accumulate(l.probs.begin(), l.probs.begin() + static_cast<long>(stop), 0.0));
            } else if constexpr (std::is_same_v<T, GeometricLaw>) {
                if (t < 0.0) return 0.0;
                return -std::expm1(static_cast<double>(cell_of(t, l.delta) + 1) * std::log(l.rho));
            } else {
                return t <= 0.0 ? 0.0 : -std::expm1(-t / l.mean);
            }
        },
        law_);
}

double DistributionHandle::mean() const {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, LatticeLaw>) {
                double m = 0.0;
                for (std::size_t i = 0; i < l.probs.size(); ++i)
                    m += l.probs[i] * l.delta * static_cast<double>(l.lower + static_cast<Index>(i));
                return m;
            } else if constexpr (std::is_same_v<T, GeometricLaw>) {
                return l.delta * l.rho / (1.0 - l.rho);
            } else {
                return l.mean;
            }
        },
        law_);
}

double DistributionHandle::tail_point() const {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, LatticeLaw>) {
                return l.delta * static_cast<double>(l.lower + static_cast<Index>(l.probs.size()) - 1);
            } else if constexpr (std::is_same_v<T, GeometricLaw>) {
                return l.delta * std::ceil(std::log(kTailMass) / std::log(l.rho));
            } else {
                return -l.mean * std::log(kTailMass);
            }
        },
        law_);
}

double DistributionHandle::tail_integral(double t) const {
    return std::visit(
        [t](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, LatticeLaw>) {
                const double top = l.delta * static_cast<double>(l.lower + static_cast<Index>(l.probs.size()) - 1);
                return t >= top ? 0.0 : std::numeric_limits<double>::infinity();
            } else if constexpr (std::is_same_v<T, GeometricLaw>) {
                if (t < 0.0) return std::numeric_limits<double>::infinity();
                const double n = std::floor(t / l.delta);
                return l.delta * std::pow(l.rho, n + 1.0) / (1.0 - l.rho);
            } else {
                return l.mean * std::exp(-std::max(t, 0.0) / l.mean);
            }
        },
        law_);
}

double wasserstein1(const DistributionHandle& u, const DistributionHandle& v, double tol) {
    if (u.is_continuous() && v.is_continuous()) {
        // Exponential laws are stochastically ordered by their means.
        return std::abs(u.mean() - v.mean());
    }
    auto lower_point = [](const DistributionHandle& d) {
        if (const auto* l = std::get_if<LatticeLaw>(&d.law())) return std::min(0.0, l->delta * static_cast<double>(l->lower));
        return 0.0;
    };
    const double lo = std::min(lower_point(u), lower_point(v));
    const double hi = std::max(u.tail_point(), v.tail_point());
    std::vector<double> pts{lo, hi};
    if (u.is_continuous() || v.is_continuous()) pts.push_back(0.0);
    add_support(u.law(), lo, hi, pts);
    add_support(v.law(), lo, hi, pts);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const DistributionHandle* cont = u.is_continuous() ? &u : (v.is_continuous() ? &v : nullptr);
    const DistributionHandle& disc = (cont == &u) ? v : u;
    const DistributionHandle& other = (cont == &u) ? u : v;
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < pts.size(); ++c) {
        const double a = pts[c];
        const double b = pts[c + 1];
        if (cont == nullptr) {
            total += std::abs(u.cdf(a) - v.cdf(a)) * (b - a);
        } else {
            const double cval = disc.cdf(a);
            if (b <= 0.0) {
                total += cval * (b - a);
            } else {
                total += exp_cell(1.0 - cval, std::get<ExponentialLaw>(other.law()).mean, a, b);
            }
        }
    }
    const double tail = u.tail_integral(hi) + v.tail_integral(hi);
    if (!(tail <= tol * std::max(total, 1e-300) || tail < 1e-15))
        throw ToleranceError("Wasserstein tail beyond truncation exceeds tolerance");
    return total;
}

LipschitzGap lipschitz_gap(const DistributionHandle& u, const DistributionHandle& v, const LipschitzTest& hstar) {
    if (u.is_continuous()) throw ArgumentError("lipschitz_gap: U must be a lattice or geometric law");
    const auto* ve = std::get_if<ExponentialLaw>(&v.law());
    if (ve == nullptr) throw ArgumentError("lipschitz_gap: V must be an exponential law");
    double delta = 0.0;
    Index lower = 0;
    if (const auto* l = std::get_if<LatticeLaw>(&u.law())) {
        delta = l->delta;
        lower = std::min<Index>(0, l->lower);
    } else {
        delta = std::get<GeometricLaw>(u.law()).delta;
    }
    const double cutoff = 40.0;
    const Index top = static_cast<Index>(std::ceil(std::max(u.tail_point(), cutoff * ve->mean) / delta)) + 6;
    const auto spec = LatticeSpec::line(delta, lower, top);
    const GridFunction h = GridFunction::from_points_1d(spec, hstar.fn);
    const Interpolant ah(h);

    double eu = 0.0;
    if (const auto* l = std::get_if<LatticeLaw>(&u.law())) {
        for (std::size_t i = 0; i < l->probs.size(); ++i)
            eu += l->probs[i] * h.at(l->lower + static_cast<Index>(i));
    } else {
        const auto& g = std::get<GeometricLaw>(u.law());
        const Index n_hi = static_cast<Index>(u.tail_point() / delta);
        double p = 1.0 - g.rho;
        for (Index n = 0; n <= n_hi; ++n, p *= g.rho) eu += p * h.at(n);
    }
    const auto ev = exponential_expectation(hstar.fn, ve->mean, delta, 1e-10, cutoff, 1e-13, hstar.kinks);
    const auto eav = exponential_expectation([&](double y) { return ah.evaluate_1d(y); }, ve->mean, delta, 1e-10,
                                             cutoff, 1e-13);
    LipschitzGap r;
    r.lhs = std::abs(eu - ev.value);
    r.rhs_main = std::abs(eu - eav.value);
    r.delta = delta;
    r.c_hat = hstar.lipschitz > 0.0 ? std::max(0.0, (r.lhs - r.rhs_main) / (delta * hstar.lipschitz)) : 0.0;
    return r;
}

}  // namespace stein
