#pragma once

/**
 * construct.hpp
 * -------------
 * Constructive algorithms on measure-preserving piecewise-affine maps:
 * dyadic partition points, approximation inside F and G, window
 * perturbations, locally-eventually-onto repair, minimum-entropy slope
 * rewriting via a dynamic matching schedule, and entropy targeting.
 */

#include "gmap/pamap.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gmap {

/// An m-fold window perturbation: identity (or reflection) outside J,
/// m alternating affine legs inside J, leg i of width |J| * 2^-k_i.
struct WindowSpec {
    Interval J;
    std::vector<long> exponents;  // k_i >= 0, sum of 2^-k_i must be 1
    bool rising = true;           // sign of the first leg's slope
};

/// One slice of a dynamic matching: for `duration`, bucket i is served by
/// pump perm[i] (0-based).
struct ScheduleEntry {
    Rational duration;
    std::vector<std::size_t> perm;
};

struct MatchingSchedule {
    std::vector<ScheduleEntry> entries;
};

/// Thrown by solve_dynamic_matching when a prefix sum goes negative.
struct InfeasibleMatching : std::runtime_error {
    std::size_t index;  // 1-based position of the violated prefix
    InfeasibleMatching(std::size_t idx, const std::string& what)
        : std::runtime_error(what), index(idx) {}
};

/// The dyadic point splitting segment p1-p2 (dyadic endpoints, slope in
/// (1, inf) not a power of two) into two legs with slopes 2^(k+1), 2^k
/// where k = floor(log2 slope). Throws domain_error if the slope already
/// is a power of two or the preconditions fail.
Point partition_point(const Point& p1, const Point& p2);

/// Closest map in F (increasing, dyadic breakpoints, power-of-two slopes)
/// within sup-distance eps of an increasing PA map fixing 0 and 1.
PAMap approximate_increasing_in_F(const PAMap& a, const Rational& eps);

/// Closest map in G within sup-distance eps of a lambda-preserving PA map.
/// Three stages: make breakpoint y-coordinates dyadic, then x-coordinates,
/// then repair slopes with window perturbations. Lambda-preservation holds
/// after every stage.
PAMap approximate_in_G(const PAMap& h, const Rational& eps);

/// Build the window perturbation described by spec.
PAMap make_window(const WindowSpec& spec);

/// A locally-eventually-onto map in G within sup-distance eps of g in G.
PAMap make_leo(const PAMap& g, const Rational& eps);

/// Schedule m pumps of rates alpha (sorted descending) to fill m buckets
/// of capacities beta (sorted descending) in unit time, one pump per
/// bucket at any moment. Feasible iff every prefix sum of alpha-beta is
/// nonnegative; otherwise throws InfeasibleMatching.
MatchingSchedule solve_dynamic_matching(const std::vector<Rational>& alpha,
                                        const std::vector<Rational>& beta);

/// Rewrite the m legs of g over the band Y so that almost every fiber of Y
/// sees the slope multiset {2^1, 2^2, ..., 2^(m-1), 2^(m-1)}, the minimum
/// entropy multiset for m legs. Pieces of g outside the legs are shifted
/// horizontally but otherwise unchanged. rho(g, result) < eps.
PAMap rewrite_slopes_min_entropy(const PAMap& g, const Interval& Y,
                                 const Rational& eps);

/// A locally-eventually-onto map in G within eps of h whose entropy is
/// within eps of c. Requires c >= 2.
PAMap target_entropy(const PAMap& h, const Rational& c, const Rational& eps);

/// Deterministic pseudo-random element of G: a composition of `complexity`
/// factors drawn from the basic maps and random window perturbations.
PAMap random_G(std::uint64_t seed, unsigned complexity);

}  // namespace gmap
