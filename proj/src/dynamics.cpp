#include "gmap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace gmap {

namespace {

// Points and intervals fixed by a map, computed leg by leg.
struct FixedSet {
    std::vector<Rational> points;
    std::vector<Interval> intervals;
};

void tidy_fixed_set(FixedSet& fs);

FixedSet fixed_set(const PAMap& g) {
    FixedSet fs;
    const auto& pts = g.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point& a = pts[i];
        const Point& b = pts[i + 1];
        Rational s = (b.y - a.y) / (b.x - a.x);
        if (s == Rational(1)) {
            if (a.y == a.x)
                fs.intervals.push_back(Interval(a.x, b.x));
            continue;
        }
        // Solve a.y + s (x - a.x) = x.
        Rational x = (a.y - s * a.x) / (Rational(1) - s);
        if (x >= a.x && x <= b.x)
            fs.points.push_back(x);
    }
    tidy_fixed_set(fs);
    return fs;
}

void tidy_fixed_set(FixedSet& fs) {
    std::sort(fs.intervals.begin(), fs.intervals.end(),
              [](const Interval& u, const Interval& v) { return u.lo < v.lo; });
    std::sort(fs.points.begin(), fs.points.end());
    fs.points.erase(std::unique(fs.points.begin(), fs.points.end()),
                    fs.points.end());
    // Merge intervals sharing an endpoint and drop points covered by them.
    std::vector<Interval> merged;
    for (const auto& iv : fs.intervals) {
        if (!merged.empty() && merged.back().hi >= iv.lo)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    fs.intervals = std::move(merged);
    auto covered = [&](const Rational& x) {
        for (const auto& iv : fs.intervals)
            if (iv.contains(x))
                return true;
        return false;
    };
    fs.points.erase(
        std::remove_if(fs.points.begin(), fs.points.end(), covered),
        fs.points.end());
}

// Fixed points of g∘g, computed per pair of interacting legs so the second
// iterate never has to be materialized (its piece count can be quadratic).
// A double-precision prefilter skips the cells the diagonal provably misses;
// anything within the error margin falls back to exact arithmetic.
FixedSet fixed_set2(const PAMap& g) {
    FixedSet fs;
    const auto& pts = g.points();
    const std::size_t n = pts.size() - 1;
    std::vector<double> px(pts.size()), py(pts.size()), slope(n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        px[i] = pts[i].x.to_double();
        py[i] = pts[i].y.to_double();
    }
    for (std::size_t i = 0; i < n; ++i)
        slope[i] = (py[i + 1] - py[i]) / (px[i + 1] - px[i]);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = pts[i];
        const Point& b = pts[i + 1];
        Rational si = (b.y - a.y) / (b.x - a.x);
        Rational lo = a.y < b.y ? a.y : b.y;
        Rational hi = a.y < b.y ? b.y : a.y;
        const double dlo = std::min(py[i], py[i + 1]);
        const double dhi = std::max(py[i], py[i + 1]);
        // Legs of g whose domain meets the image [lo, hi] of leg i.
        std::size_t j = std::upper_bound(pts.begin(), pts.end(), lo,
                                         [](const Rational& v, const Point& p) {
                                             return v < p.x;
                                         }) -
                        pts.begin();
        j = j > 0 ? j - 1 : 0;
        for (; j < n && pts[j].x <= hi; ++j) {
            // Prefilter in t = g(x): the cell holds a fixed point only when
            // the x-position and the second-map value meet inside it.  The
            // margin dominates the double rounding error by several orders,
            // so only near-miss cells reach the exact fallback.
            if (!si.is_zero()) {
                double margin = 1e-12 * (4.0 + std::fabs(slope[j]) +
                                         std::fabs(1.0 / slope[i]));
                double tlo = std::max(dlo, px[j]);
                double thi = std::min(dhi, px[j + 1]);
                if (thi - tlo < -margin)
                    continue;
                auto gap = [&](double t) {
                    return (py[j] + slope[j] * (t - px[j])) -
                           (px[i] + (t - py[i]) / slope[i]);
                };
                double d1 = gap(tlo), d2 = gap(thi);
                if ((d1 > margin && d2 > margin) ||
                    (d1 < -margin && d2 < -margin))
                    continue;
            }
            const Point& c = pts[j];
            const Point& d = pts[j + 1];
            Rational ylo = std::max(lo, c.x, std::less<Rational>());
            Rational yhi = std::min(hi, d.x, std::less<Rational>());
            if (ylo > yhi)
                continue;
            Rational sj = (d.y - c.y) / (d.x - c.x);
            // Cell of leg i sent by g into [ylo, yhi].
            Rational u, v;
            if (si.is_zero()) {
                u = a.x;
                v = b.x;
            } else {
                u = a.x + (ylo - a.y) / si;
                v = a.x + (yhi - a.y) / si;
                if (v < u)
                    std::swap(u, v);
            }
            Rational s = si * sj;
            Rational val_u = c.y + sj * (a.y + si * (u - a.x) - c.x);
            if (s == Rational(1)) {
                if (val_u == u) {
                    if (u == v)
                        fs.points.push_back(u);
                    else
                        fs.intervals.push_back(Interval(u, v));
                }
                continue;
            }
            // Solve val_u + s (x - u) = x.
            Rational x = (val_u - s * u) / (Rational(1) - s);
            if (x >= u && x <= v)
                fs.points.push_back(x);
        }
    }
    tidy_fixed_set(fs);
    return fs;
}

Interval image_interval(const PAMap& g, const Interval& J) {
    Rational lo = g.eval(J.lo), hi = lo;
    auto take = [&](const Rational& y) {
        if (y < lo) lo = y;
        if (y > hi) hi = y;
    };
    take(g.eval(J.hi));
    const auto& pts = g.points();
    auto it = std::upper_bound(pts.begin(), pts.end(), J.lo,
                               [](const Rational& v, const Point& p) {
                                   return v < p.x;
                               });
    for (; it != pts.end() && it->x < J.hi; ++it)
        take(it->y);
    return Interval(lo, hi);
}

// True when g coincides with the affine map x -> c + s*x on [a,b].
bool agrees_with_affine(const PAMap& g, const Rational& a, const Rational& b,
                        const Rational& c, const Rational& s) {
    if (g.eval(a) != c + s * a || g.eval(b) != c + s * b)
        return false;
    for (const auto& p : g.points())
        if (p.x > a && p.x < b && p.y != c + s * p.x)
            return false;
    return true;
}

// Insert `iv` into the sorted disjoint-interior family `S`, absorbing every
// member whose interior overlaps it.  Returns true when S changed.
bool absorb(std::vector<Interval>& S, Interval iv) {
    auto lo_less = [](const Interval& u, const Interval& v) { return u.lo < v.lo; };
    auto it = std::upper_bound(S.begin(), S.end(), iv, lo_less);
    if (it != S.begin())
        --it;  // the predecessor may still reach into iv
    while (it != S.end() && it->hi <= iv.lo)
        ++it;
    auto first = it;
    // Members overlapping iv form one contiguous run; absorbing one can only
    // extend iv rightwards into the next member, never back past `first`.
    bool merged = false;
    while (it != S.end() && it->lo < iv.hi) {
        if (it->lo <= iv.lo && it->hi >= iv.hi)
            return false;  // already inside one member
        iv.lo = std::min(iv.lo, it->lo);
        iv.hi = std::max(iv.hi, it->hi);
        merged = true;
        ++it;
    }
    if (merged)
        first = S.erase(first, it);
    S.insert(first, iv);
    return true;
}

}  // namespace

OrbitResult orbit(const PAMap& g, const Rational& c, std::size_t budget) {
    if (c < Rational(0) || c > Rational(1))
        throw std::domain_error("orbit: point out of [0,1]");
    std::map<Rational, std::size_t> seen;
    OrbitResult res;
    Rational x = c;
    for (std::size_t i = 0; i <= budget; ++i) {
        auto it = seen.find(x);
        if (it != seen.end()) {
            res.preperiod = it->second;
            res.period = res.orbit.size() - it->second;
            return res;
        }
        seen.emplace(x, i);
        res.orbit.push_back(x);
        x = g.eval(x);
    }
    throw BudgetExceeded("orbit: iteration budget exceeded");
}

std::vector<Rational> markov_partition(const PAMap& g, std::size_t budget) {
    std::set<Rational> out;
    for (const auto& p : g.points()) {
        OrbitResult o = orbit(g, p.x, budget);
        out.insert(o.orbit.begin(), o.orbit.end());
    }
    return std::vector<Rational>(out.begin(), out.end());
}

PeriodReport periodic_points(const PAMap& g, unsigned n_max,
                             std::size_t budget) {
    PeriodReport report;
    std::vector<FixedSet> fixed(n_max + 1);
    PAMap acc = PAMap::identity();
    for (unsigned n = 1; n <= n_max; ++n) {
        acc = compose(g, acc, budget);
        fixed[n] = fixed_set(acc);

        auto in_fixed = [&](unsigned d, const Rational& x) {
            const FixedSet& fs = fixed[d];
            if (std::binary_search(fs.points.begin(), fs.points.end(), x))
                return true;
            for (const auto& iv : fs.intervals)
                if (iv.contains(x))
                    return true;
            return false;
        };

        PeriodEntry entry;
        entry.n = n;
        for (const auto& x : fixed[n].points) {
            bool minimal = true;
            for (unsigned d = 1; d < n && minimal; ++d)
                if (n % d == 0 && in_fixed(d, x))
                    minimal = false;
            if (minimal)
                entry.points.push_back(x);
        }
        std::vector<Interval> remaining = fixed[n].intervals;
        for (unsigned d = 1; d < n; ++d) {
            if (n % d != 0)
                continue;
            std::vector<Interval> next;
            for (const auto& iv : remaining) {
                std::vector<Interval> parts{iv};
                // Split at isolated lower-period points; the two closed halves
                // still consist of period-n points elsewhere.
                for (const auto& cut : fixed[d].points) {
                    std::vector<Interval> tmp;
                    for (const auto& part : parts) {
                        if (cut > part.lo && cut < part.hi) {
                            tmp.push_back(Interval(part.lo, cut));
                            tmp.push_back(Interval(cut, part.hi));
                        } else {
                            tmp.push_back(part);
                        }
                    }
                    parts = std::move(tmp);
                }
                for (const auto& cut : fixed[d].intervals) {
                    std::vector<Interval> tmp;
                    for (const auto& part : parts) {
                        if (cut.hi <= part.lo || cut.lo >= part.hi) {
                            tmp.push_back(part);
                            continue;
                        }
                        if (cut.lo > part.lo)
                            tmp.push_back(Interval(part.lo, cut.lo));
                        if (cut.hi < part.hi)
                            tmp.push_back(Interval(cut.hi, part.hi));
                    }
                    parts = std::move(tmp);
                }
                next.insert(next.end(), parts.begin(), parts.end());
            }
            remaining = std::move(next);
        }
        entry.intervals = std::move(remaining);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

std::optional<std::array<Interval, 3>> has_period3_certificate(const PAMap& g) {
    std::vector<Rational> P;
    try {
        P = markov_partition(g);
    } catch (const BudgetExceeded&) {
        return std::nullopt;
    }
    const std::size_t m = P.size();
    // Scan candidate bases widest first so the witness is the most visible one.
    for (std::size_t span = m - 1; span >= 1; --span) {
        for (std::size_t i = 0; i + span < m; ++i) {
            Interval I0(P[i], P[i + span]);
            std::vector<Interval> inside;
            for (const auto& leg : preimage_interval(g, I0))
                if (leg.onto && leg.iv.lo >= I0.lo && leg.iv.hi <= I0.hi)
                    inside.push_back(leg.iv);
            if (inside.size() >= 2)
                return std::array<Interval, 3>{I0, inside[0], inside[1]};
        }
    }
    return std::nullopt;
}

JCollection j_collection(const PAMap& g) {
    FixedSet K = fixed_set2(g);

    // Sorted list of the maximal pieces of K (points as degenerate pieces).
    std::vector<Interval> pieces;
    {
        std::size_t ip = 0, ii = 0;
        while (ip < K.points.size() || ii < K.intervals.size()) {
            if (ii == K.intervals.size() ||
                (ip < K.points.size() && K.points[ip] < K.intervals[ii].lo)) {
                pieces.push_back(Interval(K.points[ip], K.points[ip]));
                ++ip;
            } else {
                pieces.push_back(K.intervals[ii]);
                ++ii;
            }
        }
    }

    // Candidates: closures of the components of [0,1] minus K.
    std::vector<Interval> S;
    Rational cur(0);
    for (const auto& piece : pieces) {
        if (piece.lo > cur)
            S.push_back(Interval(cur, piece.lo));
        if (piece.hi > cur)
            cur = piece.hi;
    }
    if (cur < Rational(1))
        S.push_back(Interval(cur, Rational(1)));

    // Grow candidates until the family is closed under image and preimage.
    // Absorption only unions intervals, so the fixed point is the same in
    // any processing order; cheap image steps run to exhaustion before each
    // expensive preimage sweep.
    bool changed = true;
    while (changed) {
        changed = false;
        bool img_changed = true;
        while (img_changed) {
            img_changed = false;
            for (std::size_t i = 0; i < S.size(); ++i)
                if (absorb(S, image_interval(g, S[i]))) {
                    img_changed = true;
                    changed = true;
                    break;
                }
        }
        for (std::size_t i = 0; i < S.size(); ++i) {
            Interval cur = S[i];
            bool hit = false;
            for (const auto& leg : preimage_interval(g, cur))
                if (absorb(S, leg.iv))
                    hit = true;
            if (hit) {
                changed = true;
                break;
            }
        }
    }

    JCollection jc;
    jc.intervals = S;

    // Sanity: g maps each member onto a member and g^2 fixes each member.
    for (const auto& J : S) {
        Interval img = image_interval(g, J);
        bool hit = false;
        for (const auto& M : S)
            if (M == img) {
                hit = true;
                break;
            }
        if (!hit)
            throw std::logic_error("j_collection: image is not a member");
        if (!(image_interval(g, img) == J))
            throw std::logic_error("j_collection: second iterate moves member");
    }

    // Classify g on the complement of the union.
    bool any_complement = false;
    bool all_identity = true, all_reflection = true;
    Rational lo(0);
    auto complement_piece = [&](const Rational& a, const Rational& b) {
        if (a >= b)
            return;
        any_complement = true;
        if (!agrees_with_affine(g, a, b, Rational(0), Rational(1)))
            all_identity = false;
        if (!agrees_with_affine(g, a, b, Rational(1), Rational(-1)))
            all_reflection = false;
    };
    for (const auto& J : S) {
        complement_piece(lo, J.lo);
        lo = J.hi;
    }
    complement_piece(lo, Rational(1));

    if (any_complement) {
        if (all_identity)
            jc.mode = JCollection::Mode::Identity;
        else if (all_reflection)
            jc.mode = JCollection::Mode::Reflection;
        else
            throw std::logic_error(
                "j_collection: complement is neither x nor 1-x");
    } else if (S.empty()) {
        // g^2 = id everywhere; g itself is either x or an involution.
        jc.mode = (g == PAMap::identity()) ? JCollection::Mode::Identity
                                           : JCollection::Mode::Reflection;
    } else {
        jc.mode = JCollection::Mode::Identity;
    }
    return jc;
}

bool is_TM(const PAMap& g) {
    JCollection jc = j_collection(g);
    return jc.intervals.size() == 1 &&
           jc.intervals[0] == Interval(Rational(0), Rational(1));
}

bool is_LEO(const PAMap& g) {
    if (!is_TM(g))
        return false;
    // Interior solution of g(g(x)) = t, found through the first-stage fibre
    // so the second iterate never has to be materialized.
    auto hits_interior = [&](const Rational& t) {
        PreimageResult first = preimage_point(g, t);
        // g is onto, so the preimage of a nondegenerate plateau contains a
        // nondegenerate interval, which always meets (0,1).
        if (!first.plateaus.empty())
            return true;
        for (const auto& y : first.points) {
            PreimageResult second = preimage_point(g, y);
            for (const auto& x : second.points)
                if (x > Rational(0) && x < Rational(1))
                    return true;
            for (const auto& iv : second.plateaus)
                if (iv.hi > Rational(0) && iv.lo < Rational(1))
                    return true;
        }
        return false;
    };
    return hits_interior(Rational(0)) && hits_interior(Rational(1));
}

EntropyResult entropy(const PAMap& g) {
    EntropyResult res;
    Rational exact(0);
    bool all_pow2 = true;
    double value = 0.0;
    const auto& pts = g.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Rational len = pts[i + 1].x - pts[i].x;
        Rational s = ((pts[i + 1].y - pts[i].y) / len).abs();
        if (s.is_zero())
            throw std::domain_error("entropy: map has a plateau");
        value += len.to_double() * std::log2(s.to_double());
        if (all_pow2) {
            auto k = s.log2_exact();
            if (k)
                exact += len * Rational(*k);
            else
                all_pow2 = false;
        }
    }
    if (all_pow2) {
        res.exact = exact;
        res.value = exact.to_double();
    } else {
        res.value = value;
    }
    return res;
}

Rational c_min(unsigned m) {
    if (m < 1)
        throw std::domain_error("c_min: m must be at least 1");
    Rational sum(0);
    for (unsigned i = 1; i + 1 <= m; ++i)
        sum += Rational(i) * Rational::pow2(-static_cast<long>(i));
    sum += Rational(m - 1) * Rational::pow2(-static_cast<long>(m - 1));
    return sum;
}

}  // namespace gmap
