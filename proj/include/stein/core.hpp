#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

namespace stein {

using Index = std::int64_t;
using Point = std::vector<Index>;

/// Truncated box {lower..upper} of the lattice delta*Z^d.
struct LatticeSpec {
    int dim = 1;
    double delta = 1.0;
    Point lower;
    Point upper;

    LatticeSpec() = default;
    LatticeSpec(double delta, Point lower, Point upper);

    /// One-dimensional box {lo..hi}.
    static LatticeSpec line(double delta, Index lo, Index hi);

    void validate() const;
    Index extent(int axis) const { return upper[axis] - lower[axis] + 1; }
    std::size_t size() const;
    bool contains(std::span<const Index> k) const;
    // Row-major, last axis fastest.
    std::size_t linear_index(std::span<const Index> k) const;
    Point point_at(std::size_t linear) const;
    bool operator==(const LatticeSpec&) const = default;
};

/// Real-valued function on a LatticeSpec box. Immutable after construction.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(LatticeSpec spec, std::vector<double> values);

    static GridFunction constant(const LatticeSpec& spec, double c);
    /// Evaluates fn at each lattice point k (passed as integer indices).
    static GridFunction from_indices(const LatticeSpec& spec,
                                     const std::function<double(std::span<const Index>)>& fn);
    /// Evaluates fn at each lattice point x = delta*k (1-d convenience).
    static GridFunction from_points_1d(const LatticeSpec& spec, const std::function<double(double)>& fn);

    const LatticeSpec& spec() const { return spec_; }
    double delta() const { return spec_.delta; }
    int dim() const { return spec_.dim; }
    std::span<const double> values() const { return values_; }

    /// Throws IndexRangeError naming the offending coordinate.
    double at(std::span<const Index> k) const;
    double at(Index k) const;
    bool contains(std::span<const Index> k) const { return spec_.contains(k); }

    GridFunction scaled(double factor) const;
    GridFunction plus(const GridFunction& other, double other_factor = 1.0) const;

private:
    LatticeSpec spec_;
    std::vector<double> values_;
};

struct MultiIndex {
    std::vector<int> a;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> orders);
    static MultiIndex axis(int dim, int axis, int order);

    int order() const;  // ||a||_1
    int dim() const { return static_cast<int>(a.size()); }
};

/// Delta_1^{a_1} ... Delta_d^{a_d} f(delta*k) by iterated first differences.
double forward_difference(const GridFunction& f, const MultiIndex& a, std::span<const Index> k);
double forward_difference_1d(const GridFunction& f, int order, Index k);

/// |Delta_j h| <= delta for every axis j and every in-box k.
GridFunction sample_dlip(const LatticeSpec& spec, std::uint64_t seed);

/// 1-d h with |Delta^v h| <= scale * delta^v for 1 <= v <= max_order.
GridFunction sample_dlip_higher(const LatticeSpec& spec, int max_order, std::uint64_t seed,
                                double scale = 1.0);

/// Member of M_disc(C): |Delta^a h| <= C delta^{|a|} for 1 <= |a| <= 3, any d.
GridFunction sample_mdisc(const LatticeSpec& spec, double c, std::uint64_t seed);

// Exhaustive membership scans over the box.
bool in_dlip(const GridFunction& h, double slack = 1e-12);
bool in_dlip_higher(const GridFunction& h, int max_order, double scale = 1.0, double slack = 1e-12);
bool in_mdisc(const GridFunction& h, double c, double slack = 1e-12);

void to_json(nlohmann::json& j, const LatticeSpec& spec);
void from_json(const nlohmann::json& j, LatticeSpec& spec);
void to_json(nlohmann::json& j, const GridFunction& f);
GridFunction grid_function_from_json(const nlohmann::json& j);

}  // namespace stein
