#pragma once

/**
 * pamap.hpp
 * ---------
 * Canonical continuous piecewise-affine maps [0,1] -> [0,1].
 *
 * A PAMap is a sorted breakpoint list (x_i, y_i), x_0 = 0 < x_1 < ... < x_n = 1,
 * interpolated affinely between consecutive breakpoints. Canonical form merges
 * collinear interior breakpoints, so exact map equality is list equality.
 *
 * Non-surjective and non-measure-preserving maps are representable on purpose:
 * elements of Thompson's group F and intermediate construction states need
 * them. Predicates (is_in_F, is_in_G, is_lambda_preserving) gate the
 * algorithms that require more structure.
 */

#include "gmap/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmap {

struct Point {
    Rational x, y;
    bool operator==(const Point& o) const { return x == o.x && y == o.y; }
};

struct Interval {
    Rational lo, hi;
    Interval() = default;
    Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
        if (hi < lo)
            throw std::domain_error("Interval: hi < lo");
    }
    Rational length() const { return hi - lo; }
    bool contains(const Rational& v) const { return lo <= v && v <= hi; }
    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

enum class BreakpointKind { Endpoint, TypeI, TypeII };

struct ClassifiedBreakpoint {
    Rational x;
    BreakpointKind kind;
};

/// Thrown when a segment budget is exhausted (iterate/compose blowup guard).
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::size_t kDefaultSegmentBudget = 1000000;

class PAMap {
    std::vector<Point> pts_;

    void canonicalize();

public:
    PAMap() : PAMap(identity()) {}
    explicit PAMap(std::vector<Point> pts);

    static PAMap identity();
    /// x -> 1-x (the orientation-reversing trivial map).
    static PAMap reflection();
    /// Affine interpolation through the given points (same as constructor).
    static PAMap through(std::vector<Point> pts) { return PAMap(std::move(pts)); }

    const std::vector<Point>& points() const { return pts_; }
    std::size_t segment_count() const { return pts_.size() - 1; }

    bool operator==(const PAMap& o) const { return pts_ == o.pts_; }
    bool operator!=(const PAMap& o) const { return !(*this == o); }

    Rational eval(const Rational& x) const;
    // Floating-point evaluation for plotting and simulation; clamps to [0,1].
    double eval_double(double x) const;
    /// Slope of segment i (between breakpoints i and i+1).
    Rational slope(std::size_t i) const;

    /// The inverse of a strictly monotone map (swapped coordinates).
    PAMap inverse() const;

    bool is_onto() const;
    Rational min_value() const;
    Rational max_value() const;

    std::string to_text() const;  // "pamap/1" file format
    static PAMap parse_text(const std::string& text);
};

struct PreimageResult {
    std::vector<Rational> points;     // isolated solutions
    std::vector<Interval> plateaus;   // slope-0 stretches at the target level
};

struct Leg {
    Interval iv;
    bool onto;  // g(leg) equals the whole band Y
};

PAMap compose(const PAMap& g1, const PAMap& g2,
              std::size_t budget = kDefaultSegmentBudget);
PAMap iterate(const PAMap& g, unsigned n,
              std::size_t budget = kDefaultSegmentBudget);

PreimageResult preimage_point(const PAMap& g, const Rational& y);
std::vector<Leg> preimage_interval(const PAMap& g, const Interval& Y);

std::vector<ClassifiedBreakpoint> classify_breakpoints(const PAMap& g);
int count_type2(const PAMap& g);

bool is_lambda_preserving(const PAMap& g);
bool is_in_F(const PAMap& g);
bool is_in_G(const PAMap& g);

Rational sup_distance(const PAMap& h1, const PAMap& h2);

}  // namespace gmap
