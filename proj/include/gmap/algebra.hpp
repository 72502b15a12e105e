#pragma once

/**
 * algebra.hpp
 * -----------
 * Structure theory of the monoid G: slope-rebalancing and breakpoint
 * elimination factorizations, decomposition of any element of G into the
 * five basic maps plus Thompson generators, words for F elements over
 * f_A and f_B, evolution/characteristic sequences, and the equivalence
 * relation g2 = f1 . g1 . f2 with f1, f2 in F.
 *
 * Every factorization routine returns pieces that recompose to the input
 * bit-exactly (canonical-form equality); all of them verify this before
 * returning.
 */

#include "gmap/pamap.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace gmap {

enum class FactorKind { G0Plus, G0Minus, BasicW3, W2RightQuarter, W2Full, FMap, FWord };

/// Generator letters for F words: +1/-1 = f_A / f_A^-1, +2/-2 = f_B / f_B^-1.
using GenWord = std::vector<int>;

struct Factor {
    FactorKind kind = FactorKind::G0Plus;
    PAMap map;     // payload for FMap
    GenWord word;  // payload for FWord

    static Factor basic(FactorKind k);
    static Factor fmap(PAMap f);
    static Factor fword(GenWord w);

    PAMap to_map() const;
    /// FMap factors expand losslessly to FWord factors; others are returned as-is.
    Factor expanded() const;
    bool operator==(const Factor& o) const;
};

struct DecompositionWord {
    /// factors[0] is the leftmost factor: the composition is
    /// factors[0] . factors[1] . ... . factors.back() (rightmost applied first).
    std::vector<Factor> factors;

    PAMap recompose(std::size_t budget = kDefaultSegmentBudget) const;
    std::string to_text() const;
    static DecompositionWord parse_text(const std::string& text);
};

/// Signed band-visit sequence: sign is the slope sign on the first piece,
/// indices are 1-based band numbers; adjacent indices differ by at most 1.
struct CharSeq {
    int sign = +1;
    std::vector<std::size_t> indices;
    std::size_t band_count = 0;

    bool operator==(const CharSeq& o) const {
        return sign == o.sign && band_count == o.band_count && indices == o.indices;
    }
    bool operator!=(const CharSeq& o) const { return !(*this == o); }
    std::string str() const;
};

/// Rewrite the slopes of the given affine legs (common image band, current
/// exponents k_i) to new_exponents l_i with sum(2^-k_i) = sum(2^-l_i).
/// Returns (g1, f1) with g = g1 . f1, f1 in F, and g1 carrying slope
/// magnitude 2^l_i on the i-th rewritten leg. Lengths outside the legs are
/// preserved.
std::pair<PAMap, PAMap> rebalance_slopes(const PAMap& g,
                                         const std::vector<Interval>& legs,
                                         const std::vector<long>& new_exponents);

/// Remove every type-I breakpoint inside the legs over band Y. Requires the
/// fibers over the interior of Y to stay inside the legs (all legs onto).
/// Returns (g1, f1) with g = g1 . f1 and g1 affine on each rewritten leg.
std::pair<PAMap, PAMap> eliminate_type1_in_band(const PAMap& g, const Interval& Y);

/// Rewrite the given affine legs (common image band Y, every fiber of Y
/// meeting points outside the legs) so that their exponents satisfy
/// sum(2^-k_i) = 2^-K, reducing the odd factor L one halving step at a time.
/// Returns (g1, f1) with g = g1 . f1.
std::pair<PAMap, PAMap> normalize_partial_band(const PAMap& g,
                                               const std::vector<Interval>& legs);

/// If g restricted to I is an m-fold window onto g(I) with leg slope
/// magnitudes 2^(q_i+K), sum(2^-q_i) = 1, peel the window: returns (g1, w1)
/// with g = g1 . w1, w1 an m-fold window on I, and g1 affine (slope
/// magnitude 2^K) on I.
std::pair<PAMap, PAMap> factor_out_window(const PAMap& g, const Interval& I);

/// Full decomposition of any g in G into the five basic maps and F factors.
DecompositionWord decompose(const PAMap& g);

/// Word over f_A, f_B (and inverses) composing exactly to f in F.
GenWord f_to_generator_word(const PAMap& f);

/// Compose a generator word back into a map (word[0] applied last).
PAMap generator_word_to_map(const GenWord& word);

/// Band-visit sequence of g over the partition given by `boundaries`
/// (0 = b_0 < b_1 < ... < b_m = 1). Every breakpoint image of g must lie on
/// a boundary.
CharSeq evolution_sequence(const PAMap& g, const std::vector<Rational>& boundaries);

/// Evolution sequence over the coarsest admissible partition (every
/// breakpoint image is a boundary). Unique given g.
CharSeq characteristic_sequence(const PAMap& g);

/// Characteristic sequence of the reduced representative of the class of g:
/// type-I breakpoints whose images avoid the type-II image set are
/// eliminated first, so only the monotone-run structure through the
/// type-II levels remains.
CharSeq class_characteristic_sequence(const PAMap& g);

/// g1 ~ g2 iff g2 = f1 . g1 . f2 for some f1, f2 in F; decided by equality
/// of the class characteristic sequences.
bool same_equivalence_class(const PAMap& g1, const PAMap& g2);

/// Given f1 in F and g in G, the map f2 in F making f1 . g . f2 land in G
/// (per-band horizontal rescaling by the slopes of f1).
PAMap normalize_right(const PAMap& f1, const PAMap& g);

}  // namespace gmap
