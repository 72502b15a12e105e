#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gmap/pamap.hpp"

namespace gmap {

// Forward orbit of a point until it becomes periodic.  orbit holds the first
// preperiod + period values, so orbit[preperiod + i] cycles with period
// `period`.
struct OrbitResult {
    std::size_t preperiod = 0;
    std::size_t period = 1;
    std::vector<Rational> orbit;
};

// Family of closed intervals with disjoint interiors that g permutes and g^2
// fixes setwise, together with the behaviour of g on the complement.
struct JCollection {
    enum class Mode { Identity, Reflection };
    std::vector<Interval> intervals;
    Mode mode = Mode::Identity;
};

// Exact periodic points of one period: isolated points plus intervals fixed
// pointwise by the n-th iterate (and by no smaller divisor iterate).
struct PeriodEntry {
    unsigned n = 0;
    std::vector<Rational> points;
    std::vector<Interval> intervals;
};

struct PeriodReport {
    std::vector<PeriodEntry> entries;
};

// Entropy with respect to Lebesgue measure.  `exact` is set when every slope
// magnitude is a power of two.
struct EntropyResult {
    std::optional<Rational> exact;
    double value = 0.0;
};

constexpr std::size_t kDefaultOrbitBudget = 100000;

OrbitResult orbit(const PAMap& g, const Rational& c,
                  std::size_t budget = kDefaultOrbitBudget);

// Union of the forward orbits of all breakpoint x-coordinates, sorted.
std::vector<Rational> markov_partition(const PAMap& g,
                                       std::size_t budget = kDefaultOrbitBudget);

PeriodReport periodic_points(const PAMap& g, unsigned n_max,
                             std::size_t budget = kDefaultSegmentBudget);

// Witness (I0, I1, I2) with I1, I2 inside I0, disjoint interiors, and
// g(I1) = g(I2) = I0.  Existence forces a period-3 point.  Absence of a
// witness proves nothing; periodic_points(g, 3) is the decision procedure.
std::optional<std::array<Interval, 3>> has_period3_certificate(const PAMap& g);

JCollection j_collection(const PAMap& g);

bool is_TM(const PAMap& g);
bool is_LEO(const PAMap& g);

EntropyResult entropy(const PAMap& g);

// Minimum entropy of a map in G whose slope set has m distinct magnitudes:
// sum_{i=1}^{m-1} i 2^{-i} + (m-1) 2^{-(m-1)}.
Rational c_min(unsigned m);

}  // namespace gmap
