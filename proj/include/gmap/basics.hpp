#pragma once

/**
 * basics.hpp
 * ----------
 * The named maps everything else refers to: the two trivial maps, the
 * Thompson generators f_A and f_B, and the three basic window perturbations
 * that appear in the finite decomposition basis.
 */

#include "gmap/pamap.hpp"

namespace gmap {

inline PAMap g0_plus() { return PAMap::identity(); }
inline PAMap g0_minus() { return PAMap::reflection(); }

/// Thompson generator A: x/2, then x-1/4, then 2x-1.
inline PAMap f_A() {
    return PAMap({{Rational(0), Rational(0)},
                  {Rational(1, 2), Rational(1, 4)},
                  {Rational(3, 4), Rational(1, 2)},
                  {Rational(1), Rational(1)}});
}

/// Thompson generator B: identity on [0,1/2], scaled copy of A on [1/2,1].
inline PAMap f_B() {
    return PAMap({{Rational(0), Rational(0)},
                  {Rational(1, 2), Rational(1, 2)},
                  {Rational(3, 4), Rational(5, 8)},
                  {Rational(7, 8), Rational(3, 4)},
                  {Rational(1), Rational(1)}});
}

/// w2 on [0,1]: the full tent map.
inline PAMap tent() {
    return PAMap({{Rational(0), Rational(0)},
                  {Rational(1, 2), Rational(1)},
                  {Rational(1), Rational(0)}});
}

/// w2 on [3/4,1]: identity below 3/4, then a 2-fold fold.
inline PAMap w2_right_quarter() {
    return PAMap({{Rational(0), Rational(0)},
                  {Rational(3, 4), Rational(3, 4)},
                  {Rational(7, 8), Rational(1)},
                  {Rational(1), Rational(3, 4)}});
}

/// w3-bar on [1/4,1/2]: 3 legs with |slopes| 2,4,4, identity outside.
inline PAMap w3_basic() {
    return PAMap({{Rational(0), Rational(0)},
                  {Rational(1, 4), Rational(1, 4)},
                  {Rational(3, 8), Rational(1, 2)},
                  {Rational(7, 16), Rational(1, 4)},
                  {Rational(1, 2), Rational(1, 2)},
                  {Rational(1), Rational(1)}});
}

}  // namespace gmap
