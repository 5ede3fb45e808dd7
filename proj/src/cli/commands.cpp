#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "stein/core.hpp"
#include "stein/coupling.hpp"
#include "stein/ctmc.hpp"
#include "stein/error.hpp"
#include "stein/interchange.hpp"
#include "stein/interpolator.hpp"
#include "stein/io.hpp"
#include "stein/mm1.hpp"
#include "stein/random.hpp"

namespace stein::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Registers options and lets a JSON config fill in whatever the command line
// did not set.
class Bindings {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& desc) {
        CLI::Option* opt = app->add_option("--" + name, var, desc)->capture_default_str();
        entries_.push_back(Entry{name, opt, [&var](const json& j) { var = j.get<T>(); },
                                 [&var]() { return json(var); }});
        return opt;
    }

    void apply(const json& cfg) {
        for (const auto& [key, value] : cfg.items()) {
            auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == key; });
            if (it == entries_.end()) throw UsageError("unknown config key '" + key + "'");
            if (it->opt->count() > 0) continue;
            try {
                it->set(value);
            } catch (const json::exception& e) {
                throw UsageError("config key '" + key + "' has the wrong type: " + e.what());
            }
            given_from_config_.push_back(key);
        }
    }

    bool given(const std::string& name) const {
        for (const auto& e : entries_) {
            if (e.name == name && e.opt->count() > 0) return true;
        }
        return std::find(given_from_config_.begin(), given_from_config_.end(), name) != given_from_config_.end();
    }

    json resolved() const {
        json j = json::object();
        for (const auto& e : entries_) j[e.name] = e.get();
        return j;
    }

private:
    struct Entry {
        std::string name;
        CLI::Option* opt;
        std::function<void(const json&)> set;
        std::function<json()> get;
    };
    std::vector<Entry> entries_;
    std::vector<std::string> given_from_config_;
};

struct Common {
    std::string config;
    std::string out;
};

json envelope(const std::string& command, const json& config) {
    return json{{"command", command}, {"version", stein::version()}, {"config", config}};
}

GridFunction make_h(const std::string& kind, const LatticeSpec& spec, std::uint64_t seed) {
    if (kind == "identity") return GridFunction::from_points_1d(spec, [](double x) { return x; });
    if (kind == "const") return GridFunction::constant(spec, 1.0);
    if (kind == "dlip") return sample_dlip(spec, seed);
    if (kind == "dlip3") return sample_dlip_higher(spec, 3, seed);
    throw UsageError("unknown test function '" + kind + "' (identity, const, dlip, dlip3)");
}

Index default_box(const Mm1Params& p, Index extra) { return truncation_level(p.rho(), 1e-14) + extra; }

// ---------------------------------------------------------------- interp

struct InterpArgs {
    std::string demo = "cubic";
    std::string fixture;
    std::vector<double> x;
    std::vector<int> deriv{0};
    double delta = 0.25;
    Index n = 40;
};

int cmd_interp(const InterpArgs& a, const json& config, json& report) {
    GridFunction f;
    if (!a.fixture.empty()) {
        std::ifstream in(a.fixture);
        if (!in) throw UsageError("cannot open fixture '" + a.fixture + "'");
        f = grid_function_from_json(json::parse(in));
    } else {
        const auto spec = LatticeSpec::line(a.delta, 0, a.n);
        std::function<double(double)> fn;
        if (a.demo == "cubic") fn = [](double x) { return x * x * x; };
        else if (a.demo == "square") fn = [](double x) { return x * x; };
        else if (a.demo == "linear") fn = [](double x) { return x; };
        else if (a.demo == "const") fn = [](double) { return 3.5; };
        else if (a.demo == "sine") fn = [](double x) { return std::sin(x); };
        else throw UsageError("unknown demo '" + a.demo + "' (cubic, square, linear, const, sine)");
        f = GridFunction::from_points_1d(spec, fn);
    }
    if (a.x.size() != static_cast<std::size_t>(f.dim()))
        throw UsageError("--x needs " + std::to_string(f.dim()) + " coordinate(s)");
    const Interpolant itp(f);
    MultiIndex mi;
    if (f.dim() == 1 && a.deriv.size() == 1) mi = MultiIndex({a.deriv[0]});
    else if (a.deriv.size() == static_cast<std::size_t>(f.dim())) mi = MultiIndex(a.deriv);
    else throw UsageError("--deriv needs one order per coordinate");

    const double value = itp.derivative_nd(a.x, mi);

    // Property checks: interpolation at knots and partition of unity.
    double knot_err = 0.0;
    const auto& spec = f.spec();
    for (std::size_t lin = 0; lin < spec.size(); ++lin) {
        const Point k = spec.point_at(lin);
        bool inside = true;
        std::vector<double> xk(spec.dim);
        for (int j = 0; j < spec.dim; ++j) {
            inside = inside && k[j] + 4 <= spec.upper[j];
            xk[j] = spec.delta * static_cast<double>(k[j]);
        }
        if (!inside) continue;
        const double gv = f.at(k);
        knot_err = std::max(knot_err, std::abs(itp.evaluate_nd(xk) - gv) / std::max(1.0, std::abs(gv)));
    }
    double pou_err = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double t = i / 1000.0;
        double s = 0.0;
        for (int node = 0; node < WeightTable::kNodes; ++node) s += weight(node, t);
        pou_err = std::max(pou_err, std::abs(s - 1.0));
    }
    const bool pass = knot_err <= 1e-12 && pou_err <= 1e-12;
    report = envelope("interp", config);
    report["x"] = a.x;
    report["deriv"] = mi.a;
    report["value"] = value;
    report["checks"] = {{"knot_interpolation_max_rel_error", knot_err}, {"partition_of_unity_max_error", pou_err}};
    report["pass"] = pass;
    return pass ? kPass : kFail;
}

// ----------------------------------------------------------- convergence

struct ConvergenceArgs {
    std::vector<double> rhos{0.5, 0.8, 0.9, 0.95, 0.99};
    std::string format = "csv";
};

int cmd_convergence(const ConvergenceArgs& a, const json& config, json& report, std::string& csv) {
    if (a.format != "csv" && a.format != "json") throw UsageError("--format must be csv or json");
    for (double r : a.rhos) {
        if (!(r > 0.0 && r < 1.0)) throw UsageError("every rho must lie in (0, 1)");
    }
    const auto sweep = convergence_sweep(a.rhos);
    bool pass = true;
    std::string failure;
    if (sweep.rows.size() > 1 && !(sweep.slope >= 0.8 && sweep.slope <= 1.2)) {
        pass = false;
        failure = "log-log slope outside [0.8, 1.2]";
    }
    for (const auto& r : sweep.rows) {
        if (r.gap > sweep.fitted_c * r.bound_rhs * (1 + 1e-12)) {
            pass = false;
            failure = "gap exceeds fitted bound";
        }
        if (r.mean_x > 1.0 || r.mean_y > 1.0) {
            pass = false;
            failure = "stationary means not bounded by 1";
        }
    }
    report = envelope("convergence", config);
    json sj;
    to_json(sj, sweep);
    report["sweep"] = sj;
    report["pass"] = pass;
    if (!pass) report["failure"] = failure;
    if (a.format == "csv") {
        std::ostringstream os;
        os << "# stein_prelimit " << stein::version() << "\n# config " << config.dump() << "\n";
        write_sweep_csv(os, sweep);
        csv = os.str();
    }
    return pass ? kPass : kFail;
}

// ---------------------------------------------------------------- couple

struct CoupleArgs {
    double lambda = 1.0, mu = 2.0, delta = 1.0;
    Index k = 3;
    int order = 0;
    std::size_t reps = 10000;
    std::uint64_t seed = 0;
    double horizon = 1e3;
    std::string h = "identity";
    Index n = 0;
};

int cmd_couple(const CoupleArgs& a, const json& config, json& report) {
    const Mm1Params p(a.lambda, a.mu, a.delta);
    p.validate();
    if (a.order < 0 || a.order > 3) throw UsageError("--order must be 0 (coupling time) or 1..3");
    CouplingEstimate est;
    double exact = 0.0;
    if (a.order == 0) {
        est = estimate_coupling_time(p, a.k, a.reps, a.seed, a.horizon);
        exact = static_cast<double>(a.k + 1) / (p.mu - p.lambda);
    } else {
        const Index n = a.n > 0 ? a.n : default_box(p, a.k + 400);
        const auto spec = LatticeSpec::line(p.delta, 0, n);
        const GridFunction h = make_h(a.h, spec, a.seed);
        est = estimate_delta(p, h, a.k, a.order, a.reps, a.seed, a.horizon);
        exact = mm1_poisson(p, h).diff(a.order, a.k);
    }
    const double z = est.stderr_ > 0 ? (est.mean - exact) / est.stderr_ : (est.mean == exact ? 0.0 : INFINITY);
    const bool pass = std::abs(z) <= 3.0;
    report = envelope("couple", config);
    report["target"] = a.order == 0 ? "coupling_time" : "difference";
    report["estimate"] = est.mean;
    report["stderr"] = est.stderr_;
    report["exact"] = exact;
    report["z_score"] = z;
    report["replications"] = est.replications;
    report["overruns"] = est.overruns;
    report["pass"] = pass;
    if (!pass) report["failure"] = "estimate more than 3 standard errors from the exact value";
    return pass ? kPass : kFail;
}

// ----------------------------------------------------------------- stein

struct SteinArgs {
    double lambda = 1.0, mu = 2.0, delta = 1.0;
    std::size_t samples = 200;
    std::uint64_t seed = 0;
    Index kmax = 50;
};

int cmd_stein(const SteinArgs& a, const json& config, json& report) {
    const Mm1Params p(a.lambda, a.mu, a.delta);
    p.validate();
    const Index n = a.kmax + default_box(p, 10);
    const auto spec = LatticeSpec::line(p.delta, 0, n);
    json orders = json::object();
    std::size_t total_violations = 0;
    for (int order = 1; order <= 3; ++order) {
        std::size_t violations = 0;
        double max_ratio = 0.0;
        for (std::size_t s = 0; s < a.samples; ++s) {
            const auto h = sample_dlip_higher(spec, order, a.seed + s);
            const auto r = stein_factor_report(p, h, order, a.kmax);
            violations += r.violations;
            max_ratio = std::max(max_ratio, r.max_ratio);
        }
        total_violations += violations;
        orders[std::to_string(order)] = {{"violations", violations}, {"max_ratio", max_ratio}};
    }
    std::size_t daly_violations = 0;
    double daly_ratio = 0.0;
    double identity_residual = 0.0;
    for (std::size_t s = 0; s < a.samples; ++s) {
        const auto h = sample_dlip(spec, a.seed + s);
        const auto sol = mm1_poisson(p, h);
        for (Index k = 0; k <= a.kmax; ++k) {
            const double v = std::abs(sol.diff(3, k));
            daly_ratio = std::max(daly_ratio, v / daly_bound(p));
            if (v > daly_bound(p) * (1 + 1e-12)) ++daly_violations;
        }
        identity_residual = std::max(identity_residual, third_order_identity_residual(p, h));
    }
    const bool pass = total_violations == 0 && daly_violations == 0 && identity_residual <= 1e-10;
    report = envelope("stein", config);
    report["orders"] = orders;
    report["daly"] = {{"violations", daly_violations}, {"max_ratio", daly_ratio}};
    report["third_order_identity_max_residual"] = identity_residual;
    report["pass"] = pass;
    if (!pass) {
        report["failure"] = total_violations ? "Stein-factor bound violated"
                            : daly_violations ? "uniform third-order bound violated"
                                              : "third-order identity residual above 1e-10";
    }
    return pass ? kPass : kFail;
}

// ---------------------------------------------------- interchange-check

struct InterchangeArgs {
    std::string model = "mm1";
    std::vector<double> x;
    std::size_t points = 100;
    std::uint64_t seed = 1;
    double lambda = 1.0, mu = 2.0, delta = 1.0;
};

int cmd_interchange(const InterchangeArgs& a, const json& config, json& report) {
    const Index n = 40;
    std::vector<InterchangeReport> reports;
    Engine eng = make_engine(a.seed, 99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto pick = [&](double lo, double hi) { return lo + (hi - lo) * unif(eng); };
    if (a.model == "mm1") {
        const auto spec = LatticeSpec::line(a.delta, 0, n);
        const auto f = sample_dlip(spec, a.seed);
        std::vector<double> xs = a.x;
        if (xs.empty()) {
            for (std::size_t i = 0; i < a.points; ++i) xs.push_back(a.delta * pick(0.0, n - 6));
        }
        for (double x : xs) reports.push_back(mm1_interchange_report(a.lambda, a.mu, a.delta, f, x));
    } else if (a.model == "affine") {
        const auto spec = LatticeSpec::line(a.delta, 0, n);
        const RateKernel kernel(spec, {Jump{Point{1}, AffineRate{1.0, {0.5}}}, Jump{Point{-1}, AffineRate{0.5, {0.3}}},
                                       Jump{Point{2}, ConstantRate{0.2}}});
        const auto f = sample_dlip(spec, a.seed);
        std::vector<double> xs = a.x;
        if (xs.empty()) {
            for (std::size_t i = 0; i < a.points; ++i) xs.push_back(a.delta * pick(1.0, n - 7));
        }
        for (double x : xs) reports.push_back(interchange_report(kernel, f, std::span<const double>(&x, 1)));
    } else if (a.model == "product2d") {
        const Index m = 20;
        const LatticeSpec spec(a.delta, {0, 0}, {m, m});
        const RateKernel kernel(spec, {Jump{Point{1, 0}, AffineRate{1.0, {0.0, 0.1}}},
                                       Jump{Point{-1, 0}, AffineRate{0.5, {0.2, 0.0}}},
                                       Jump{Point{0, 1}, AffineRate{0.8, {0.05, 0.0}}},
                                       Jump{Point{0, -1}, AffineRate{0.6, {0.0, 0.3}}}});
        const auto f = sample_dlip(spec, a.seed);
        if (!a.x.empty() && a.x.size() != 2) throw UsageError("--x needs two coordinates for product2d");
        std::vector<std::vector<double>> xs;
        if (!a.x.empty()) xs.push_back(a.x);
        for (std::size_t i = 0; a.x.empty() && i < a.points; ++i)
            xs.push_back({a.delta * pick(1.0, m - 6), a.delta * pick(1.0, m - 6)});
        for (const auto& x : xs) reports.push_back(interchange_report(kernel, f, x));
    } else {
        throw UsageError("unknown model '" + a.model + "' (mm1, affine, product2d)");
    }
    double worst = 0.0;
    json items = json::array();
    for (const auto& r : reports) {
        worst = std::max(worst, std::abs(r.residual));
        json j;
        to_json(j, r);
        items.push_back(j);
    }
    const bool pass = worst <= 1e-10;
    report = envelope("interchange-check", config);
    report["reports"] = items;
    report["max_abs_residual"] = worst;
    report["pass"] = pass;
    if (!pass) report["failure"] = "interchange identity residual above 1e-10";
    return pass ? kPass : kFail;
}

// --------------------------------------------------------------- poisson

struct PoissonArgs {
    std::string model = "mm1";
    std::string kernel;
    std::string h = "identity";
    double lambda = 1.0, mu = 2.0, delta = 1.0;
    Index n = 0;
    std::uint64_t seed = 1;
    double horizon = 500.0;
    int steps = 200;
};

int cmd_poisson(const PoissonArgs& a, const json& config, json& report) {
    std::optional<RateKernel> kernel;
    std::optional<Mm1Params> p;
    if (!a.kernel.empty()) {
        std::ifstream in(a.kernel);
        if (!in) throw UsageError("cannot open kernel file '" + a.kernel + "'");
        kernel.emplace(rate_kernel_from_json(json::parse(in)));
    } else if (a.model == "mm1") {
        p.emplace(a.lambda, a.mu, a.delta);
        p->validate();
        const Index n = a.n > 0 ? a.n : default_box(*p, 10);
        kernel.emplace(mm1_kernel(a.lambda, a.mu, a.delta, n));
    } else {
        throw UsageError("unknown model '" + a.model + "' (mm1, or pass --kernel)");
    }
    const auto& spec = kernel->spec();
    if (spec.dim != 1 && a.h != "const") throw UsageError("non-constant built-in test functions are one-dimensional");
    const GridFunction h = spec.dim == 1 ? make_h(a.h, spec, a.seed) : GridFunction::constant(spec, 1.0);

    const auto direct = solve_poisson(*kernel, h);
    const auto integral = poisson_via_integral(*kernel, h, a.horizon, a.steps);
    const double res_direct = poisson_residual(*kernel, direct, h);
    double f_max = 0.0;
    for (double v : direct.f.values()) f_max = std::max(f_max, std::abs(v));

    auto max_diff = [&](const PoissonSolution& x, const PoissonSolution& y, Index upto) {
        double worst = 0.0;
        for (int order = 1; order <= 3; ++order) {
            for (Index k = spec.lower[0]; k + order <= upto; ++k)
                worst = std::max(worst, std::abs(x.diff(order, k) - y.diff(order, k)));
        }
        return worst;
    };
    bool pass = res_direct <= 1e-10;
    std::string failure = pass ? "" : "Poisson residual above 1e-10";
    report = envelope("poisson", config);
    report["mean_h"] = direct.mean_h;
    report["f"] = std::vector<double>(direct.f.values().begin(), direct.f.values().end());
    report["max_abs_f"] = f_max;
    report["residual"] = res_direct;
    report["integral"] = {{"tail_estimate", integral.tail_estimate},
                          {"truncation_warning", integral.truncation_warning}};
    if (spec.dim == 1) {
        const double d_int = max_diff(direct, integral, spec.upper[0]);
        report["integral"]["max_difference_vs_direct"] = d_int;
        if (pass && d_int > 1e-6) {
            pass = false;
            failure = "integral solver disagrees with the direct solve beyond 1e-6";
        }
        if (p) {
            const auto closed = mm1_poisson(*p, h);
            const double d_closed = max_diff(direct, closed, spec.upper[0]);
            report["birth_death_max_difference_vs_direct"] = d_closed;
            if (pass && d_closed > 1e-9) {
                pass = false;
                failure = "closed form disagrees with the direct solve beyond 1e-9";
            }
        }
    }
    report["pass"] = pass;
    if (!pass) report["failure"] = failure;
    return pass ? kPass : kFail;
}

// -------------------------------------------------------------- misalign

struct MisalignArgs {
    double lambda = 1.0, mu = 2.0, delta = 1.0;
    double eps = 0.1, x0 = 0.2, dt = 0.0, horizon = 1e3;
    std::size_t reps = 1000;
    std::uint64_t seed = 0;
};

int cmd_misalign(const MisalignArgs& a, const json& config, json& report) {
    const Mm1Params p(a.lambda, a.mu, a.delta);
    const auto r = rbm_misalignment_demo(p, a.eps, a.x0, a.dt, a.reps, a.seed, a.horizon);
    const double z = r.window_stderr > 0 ? (r.window_mean - r.window_expected) / r.window_stderr : INFINITY;
    const bool frac_ok = r.fraction_ok >= 0.99;
    const bool mean_ok = std::abs(z) <= 3.0;
    report = envelope("misalign", config);
    json rj;
    to_json(rj, r);
    report["report"] = rj;
    report["z_score"] = z;
    report["pass"] = frac_ok && mean_ok;
    if (!frac_ok) report["failure"] = "fewer than 99% of windows satisfy the D3 bound";
    else if (!mean_ok) report["failure"] = "window mean more than 3 standard errors from eps/(2 delta (mu - lambda))";
    return frac_ok && mean_ok ? kPass : kFail;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prelimit generator-comparison toolkit"};
    app.set_version_flag("--version", std::string(stein::version()));
    app.require_subcommand(1);

    Common common;
    InterpArgs ia;
    ConvergenceArgs ca;
    CoupleArgs co;
    SteinArgs sa;
    InterchangeArgs xa;
    PoissonArgs pa;
    MisalignArgs ma;
    std::map<CLI::App*, std::unique_ptr<Bindings>> bindings;

    auto sub = [&](const std::string& name, const std::string& desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->set_help_flag("--help", "print this help message and exit");
        s->add_option("--config", common.config, "JSON file mirroring the flags (flags win)");
        s->add_option("--out", common.out, "write the report to this file instead of stdout");
        bindings[s] = std::make_unique<Bindings>();
        return std::make_pair(s, bindings[s].get());
    };

    auto [s_interp, b_interp] = sub("interp", "evaluate the degree-7 interpolant and its derivatives");
    b_interp->add(s_interp, "demo", ia.demo, "built-in grid: cubic, square, linear, const, sine");
    b_interp->add(s_interp, "fixture", ia.fixture, "GridFunction JSON file (overrides --demo)");
    b_interp->add(s_interp, "x", ia.x, "evaluation point (one value per dimension)");
    b_interp->add(s_interp, "deriv", ia.deriv, "derivative order (1-D) or multi-index");
    b_interp->add(s_interp, "delta", ia.delta, "lattice spacing for demos");
    b_interp->add(s_interp, "n", ia.n, "demo box {0..n}");

    auto [s_conv, b_conv] = sub("convergence", "W1 gap between the scaled M/M/1 law and its exponential limit");
    b_conv->add(s_conv, "rhos", ca.rhos, "utilizations; delta = 1 - rho, mu = 1");
    b_conv->add(s_conv, "format", ca.format, "csv or json");

    auto [s_couple, b_couple] = sub("couple", "synchronous-coupling Monte Carlo");
    b_couple->add(s_couple, "lambda", co.lambda, "arrival rate");
    b_couple->add(s_couple, "mu", co.mu, "service rate");
    b_couple->add(s_couple, "delta", co.delta, "lattice spacing");
    b_couple->add(s_couple, "k", co.k, "initial level of system 0");
    b_couple->add(s_couple, "order", co.order, "0 = coupling time, 1..3 = finite difference of f_h");
    b_couple->add(s_couple, "reps", co.reps, "replications");
    b_couple->add(s_couple, "seed", co.seed, "random seed (required)");
    b_couple->add(s_couple, "horizon", co.horizon, "nominal horizon; longer runs are extended and counted");
    b_couple->add(s_couple, "h", co.h, "test function: identity, const, dlip, dlip3");
    b_couple->add(s_couple, "n", co.n, "box {0..n} for h (0 = automatic)");

    auto [s_stein, b_stein] = sub("stein", "Stein-factor bound sweep over random test functions");
    b_stein->add(s_stein, "lambda", sa.lambda, "arrival rate");
    b_stein->add(s_stein, "mu", sa.mu, "service rate");
    b_stein->add(s_stein, "delta", sa.delta, "lattice spacing");
    b_stein->add(s_stein, "samples", sa.samples, "test functions per order");
    b_stein->add(s_stein, "seed", sa.seed, "random seed (required)");
    b_stein->add(s_stein, "kmax", sa.kmax, "largest state checked");

    auto [s_inter, b_inter] = sub("interchange-check", "generator/interpolator interchange identity");
    b_inter->add(s_inter, "model", xa.model, "mm1, affine or product2d");
    b_inter->add(s_inter, "x", xa.x, "evaluation point (default: random points)");
    b_inter->add(s_inter, "points", xa.points, "number of random points");
    b_inter->add(s_inter, "seed", xa.seed, "seed for f and the points");
    b_inter->add(s_inter, "lambda", xa.lambda, "M/M/1 arrival rate");
    b_inter->add(s_inter, "mu", xa.mu, "M/M/1 service rate");
    b_inter->add(s_inter, "delta", xa.delta, "lattice spacing");

    auto [s_pois, b_pois] = sub("poisson", "solve the CTMC Poisson equation three ways");
    b_pois->add(s_pois, "model", pa.model, "mm1");
    b_pois->add(s_pois, "kernel", pa.kernel, "RateKernel JSON file (overrides --model)");
    b_pois->add(s_pois, "h", pa.h, "test function: identity, const, dlip, dlip3");
    b_pois->add(s_pois, "lambda", pa.lambda, "arrival rate");
    b_pois->add(s_pois, "mu", pa.mu, "service rate");
    b_pois->add(s_pois, "delta", pa.delta, "lattice spacing");
    b_pois->add(s_pois, "n", pa.n, "box {0..n} (0 = automatic)");
    b_pois->add(s_pois, "seed", pa.seed, "seed for random test functions");
    b_pois->add(s_pois, "horizon", pa.horizon, "time horizon of the integral solver");
    b_pois->add(s_pois, "steps", pa.steps, "geometric time cells of the integral solver");

    auto [s_mis, b_mis] = sub("misalign", "misaligned reflected-Brownian couplings");
    b_mis->add(s_mis, "lambda", ma.lambda, "arrival rate");
    b_mis->add(s_mis, "mu", ma.mu, "service rate");
    b_mis->add(s_mis, "delta", ma.delta, "spacing");
    b_mis->add(s_mis, "eps", ma.eps, "initial spacing of the four copies");
    b_mis->add(s_mis, "x0", ma.x0, "initial position of copy 0");
    b_mis->add(s_mis, "dt", ma.dt, "Euler step (0 = eps^2/100)");
    b_mis->add(s_mis, "reps", ma.reps, "replications");
    b_mis->add(s_mis, "seed", ma.seed, "random seed (required)");
    b_mis->add(s_mis, "horizon", ma.horizon, "time limit per replication");

    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kPass;
    } catch (const CLI::CallForVersion&) {
        out << stein::version() << "\n";
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    Bindings& b = *bindings.at(chosen);
    const std::string name = chosen->get_name();
    json report;
    std::string csv;
    int code = kPass;
    try {
        if (!common.config.empty()) {
            std::ifstream in(common.config);
            if (!in) throw UsageError("cannot open config '" + common.config + "'");
            json cfg;
            try {
                cfg = json::parse(in);
            } catch (const json::exception& e) {
                throw UsageError(std::string("config is not valid JSON: ") + e.what());
            }
            if (!cfg.is_object()) throw UsageError("config must be a JSON object");
            b.apply(cfg);
        }
        const bool stochastic = name == "couple" || name == "stein" || name == "misalign";
        if (stochastic && !b.given("seed")) throw UsageError("--seed is required for " + name);
        const json config = b.resolved();
        if (name == "interp") code = cmd_interp(ia, config, report);
        else if (name == "convergence") code = cmd_convergence(ca, config, report, csv);
        else if (name == "couple") code = cmd_couple(co, config, report);
        else if (name == "stein") code = cmd_stein(sa, config, report);
        else if (name == "interchange-check") code = cmd_interchange(xa, config, report);
        else if (name == "poisson") code = cmd_poisson(pa, config, report);
        else code = cmd_misalign(ma, config, report);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ArgumentError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFail;
    }
    if (code != kPass && report.contains("failure")) err << "failed: " << report["failure"].get<std::string>() << "\n";

    const std::string text = csv.empty() ? report.dump(2) + "\n" : csv;
    if (!common.out.empty()) {
        std::ofstream file(common.out);
        if (!file) {
            err << "error: cannot write '" << common.out << "'\n";
            return kFail;
        }
        file << text;
    } else {
        out << text;
    }
    return code;
}

}  // namespace stein::cli
