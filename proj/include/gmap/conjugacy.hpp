#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gmap/pamap.hpp"

namespace gmap {

/*
 * Markov skeletons and conjugate synthesis.
 *
 * A Markov skeleton is a partition 0 = x_0 < ... < x_N = 1 together with the
 * endpoint values of a map that is monotone on every piece and sends each
 * partition point to a partition point.  The index map s* records the value
 * positions; the 0/1 matrix built from s* records which cells each piece
 * sweeps.  Attaching reciprocal slopes to that support and solving the
 * stationary eigensystem exactly yields the cell lengths of a
 * measure-preserving map with the same combinatorics, which construct_conjugate
 * assembles breakpoint by breakpoint.
 */

struct MarkovSkeleton {
    std::vector<Rational> points;  // x_0 .. x_N, strictly increasing, 0 to 1
    std::vector<Rational> values;  // value at each x_i, itself some x_j

    std::string to_text() const;
    static MarkovSkeleton parse_text(const std::string& text);

    // Skeleton of g over the forward-orbit closure of its breakpoints.
    static MarkovSkeleton from_map(const PAMap& g);
};

// s*[i] = j when the skeleton maps x_i to x_j.
using IndexMap = std::vector<std::size_t>;

IndexMap index_map(const MarkovSkeleton& sk);

// Index map of the coordinate-reflected skeleton: (*s)[i] = N - s[N - i].
IndexMap reverse_index(const IndexMap& s);

// N x N 0/1 matrix: entry (i, j) is 1 iff piece i sweeps cell j, that is
// min(s[i-1], s[i]) < j <= max(s[i-1], s[i]) in 1-based labels.
using AStar = std::vector<std::vector<int>>;

AStar a_star(const IndexMap& s);

// Reciprocal-slope matrix: entry (i, j) = 1/|slope| of the leg of piece i
// over cell j, zero off the support.  Every column sums to 1 exactly.
using SlopeMatrix = std::vector<std::vector<Rational>>;

// Support pattern of a slope matrix.
AStar support_of(const SlopeMatrix& A);

std::string matrix_to_text(const SlopeMatrix& A);
SlopeMatrix parse_matrix(const std::string& text);

// Recurrence structure of the cell-to-cell transition graph (an arc j -> i
// for every support entry (i, j)).
enum class RecurrenceKind { Irreducible, MultipleRecurrent, HasTransient };

struct RecurrenceClass {
    RecurrenceKind kind = RecurrenceKind::Irreducible;
    std::size_t component_count = 1;  // strongly connected components
};

RecurrenceClass classify(const AStar& a);

// Default slope assignment per column: PowersOfTwo gives a column with c > 1
// entries the multiset {2^-1, ..., 2^-(c-1), 2^-(c-1)} in row order, Uniform
// gives 1/c.  A single-entry column gets slope 1 and must go through
// construct_conjugate_slope1.
enum class SlopeMode { PowersOfTwo, Uniform };

SlopeMatrix default_slopes(const AStar& a, SlopeMode mode);

// Exact solution of A v = v, sum(v) = 1, v > 0.  When the transition graph
// splits into K > 1 closed components, `basis` holds one stationary vector
// per component and `lengths` their uniform average; `unique` is false.
// Transient cells admit no positive solution and raise a domain error.
struct StationaryResult {
    std::vector<Rational> lengths;
    std::vector<std::vector<Rational>> basis;
    bool unique = true;
};

StationaryResult stationary(const SlopeMatrix& A);

// Measure-preserving map whose Markov skeleton has index map s and whose leg
// over cell j inside piece i has slope magnitude 1/A[i][j].  Requires every
// slope magnitude > 1 (the expanding case).  Membership in G is a property of
// the output (dyadic cell lengths and power-of-two slopes), not a promise.
PAMap construct_conjugate(const IndexMap& s, const SlopeMatrix& A);

// Same synthesis when exactly one column j0 carries a single support entry
// (i0, j0) of slope magnitude 1 and row i0 has no other support.  Slope +1
// forces i0 == j0; the piece is removed, the reduced map is built, and a
// fixed interval is re-inserted (scale 1/2).  Slope -1 with i0 == j0 inserts
// a reflected interval the same way.  Slope -1 with i0 != j0 builds the map
// directly and verifies that the second iterate is expanding everywhere.
PAMap construct_conjugate_slope1(const IndexMap& s, const SlopeMatrix& A);

// Index-map conjugacy criterion for expanding Markov maps: true iff s1 == s2
// or s1 equals the reversal of s2.  Meaningful only when both maps are
// (linear or expanding) Markov; that obligation sits with the caller.
bool conjugate_by_index(const IndexMap& s1, const IndexMap& s2);

// One-directional equivalence-class check: computes each map's index map
// over its own Markov partition and compares.  Equal index maps imply the
// same equivalence class (asserted); different index maps prove nothing, so
// false may be returned for maps that are in fact in the same class.
bool same_class_from_index(const PAMap& g1, const PAMap& g2);

}  // namespace gmap
