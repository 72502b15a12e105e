#include "gmap/construct.hpp"

#include "gmap/basics.hpp"
#include "gmap/dynamics.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>

namespace gmap {

namespace {

Int floor_int(const Rational& r) {
    Int q = r.num() / r.den();
    if (r.num() < 0 && q * r.den() != r.num())
        --q;
    return q;
}

/// Largest multiple of 2^-Q that is <= r.
Rational floor_to_grid(const Rational& r, long Q) {
    return Rational(floor_int(r * Rational::pow2(Q))) * Rational::pow2(-Q);
}

/// Multiple of 2^-Q nearest to r (ties toward the smaller value).
Rational round_to_grid(const Rational& r, long Q) {
    Rational s = r * Rational::pow2(Q);
    Int f = floor_int(s);
    if ((s - Rational(f)) * 2 > 1)
        ++f;
    return Rational(f) * Rational::pow2(-Q);
}

/// The dyadic of smallest denominator strictly inside (lo, hi).
Rational dyadic_between(const Rational& lo, const Rational& hi) {
    if (!(lo < hi))
        throw std::domain_error("dyadic_between: empty interval");
    for (long k = 0;; ++k) {
        Rational cand = Rational(floor_int(lo * Rational::pow2(k)) + 1) *
                        Rational::pow2(-k);
        if (cand < hi)
            return cand;
    }
}

Rational rat_abs(const Rational& r) { return r < 0 ? -r : r; }

bool in_G_quiet(const PAMap& g) {
    try {
        return is_in_G(g);
    } catch (const std::exception&) {
        return false;
    }
}

PAMap vflip(const PAMap& g) {
    std::vector<Point> pts;
    for (const auto& p : g.points())
        pts.push_back({p.x, Rational(1) - p.y});
    return PAMap(std::move(pts));
}

PAMap hflip(const PAMap& g) {
    std::vector<Point> pts;
    for (auto it = g.points().rbegin(); it != g.points().rend(); ++it)
        pts.push_back({Rational(1) - it->x, it->y});
    return PAMap(std::move(pts));
}

/// x where the segment through p, q reaches level v.
Rational x_at(const Point& p, const Point& q, const Rational& v) {
    return p.x + (v - p.y) * (q.x - p.x) / (q.y - p.y);
}

PAMap from_xy_map(const std::map<Rational, Rational>& m) {
    std::vector<Point> pts;
    pts.reserve(m.size());
    for (const auto& [x, y] : m)
        pts.push_back({x, y});
    return PAMap(std::move(pts));
}

// ---------------------------------------------------------------------------
// Stage 1 of approximate_in_G: make breakpoint y-coordinates dyadic.
// ---------------------------------------------------------------------------

/// Leftmost monotone crossing of level y, excluding x = skip. Returns the
/// crossing x and the segment index carrying the graph just below level y.
struct Crossing {
    Rational x;
    std::size_t lower_seg;
    bool increasing;
};

std::optional<Crossing> find_crossing(const PAMap& g, const Rational& y,
                                      const Rational& skip) {
    const auto& pts = g.points();
    PreimageResult pre = preimage_point(g, y);
    for (const Rational& x : pre.points) {
        if (x == skip)
            continue;
        // locate: breakpoint or segment interior
        std::size_t j = 0;
        while (j + 1 < pts.size() && !(pts[j + 1].x > x))
            ++j;
        if (pts[j].x == x) {
            if (j == 0 || j + 1 == pts.size())
                continue;
            Rational sl = g.slope(j - 1), sr = g.slope(j);
            if (sl.sign() != sr.sign())
                continue;  // local extremum touching the level
            bool inc = sl > 0;
            return Crossing{x, inc ? j - 1 : j, inc};
        }
        bool inc = g.slope(j) > 0;
        return Crossing{x, j, inc};
    }
    return std::nullopt;
}

/// Eliminate an interior local maximum at breakpoint index i (non-dyadic y),
/// or, when i == 0, a left endpoint leaving with negative slope. The graph
/// is truncated just below the level and a compensating detour is added on
/// the leftmost monotone crossing of the level.
PAMap eliminate_peak(const PAMap& g, std::size_t i, const Rational& eps12) {
    const auto& pts = g.points();
    const Rational yi = pts[i].y;
    const Rational xi = pts[i].x;

    // Nearest breakpoint level strictly below yi.
    Rational below = 0;
    for (const auto& p : pts)
        if (p.y < yi && p.y > below)
            below = p.y;

    auto cr = find_crossing(g, yi, xi);
    if (!cr)
        throw std::logic_error(
            "approximate_in_G: level has no monotone crossing");

    long Q = 1;
    while (Rational::pow2(-Q) >= eps12)
        ++Q;
    Rational yhat;
    for (;; ++Q) {
        yhat = floor_to_grid(yi, Q);
        if (yhat > 0 && yhat >= below)
            break;
    }

    // Peak geometry at the two candidate lines.
    const bool endpoint = (i == 0);
    const Point* pl = endpoint ? nullptr : &pts[i - 1];
    const Point& pk = pts[i];
    const Point& pr = pts[i + 1];
    const Point& zl = pts[cr->lower_seg];
    const Point& zr = pts[cr->lower_seg + 1];

    Rational Gx = endpoint ? Rational(0) : x_at(*pl, pk, yhat);
    Rational Hx = x_at(pk, pr, yhat);
    Rational Ax = x_at(zl, zr, yhat);

    Rational ytil, Dx, Ex, Cx, Bx;
    for (long Qp = Q + 1;; ++Qp) {
        ytil = floor_to_grid(yi, Qp);
        if (!(ytil > yhat))
            continue;
        Dx = endpoint ? Rational(0) : x_at(*pl, pk, ytil);
        Ex = x_at(pk, pr, ytil);
        Cx = x_at(zl, zr, ytil);
        Rational de = Ex - Dx;
        Bx = cr->increasing ? Cx - de : Cx + de;
        if (rat_abs(Cx - cr->x) + de < rat_abs(Ax - cr->x))
            break;
    }

    std::map<Rational, Rational> m;
    for (const auto& p : pts) {
        if (p.x > Gx && p.x < Hx)
            continue;  // the peak itself
        if (endpoint && p.x < Hx)
            continue;  // the old endpoint
        m[p.x] = p.y;
    }
    if (endpoint) {
        m[Rational(0)] = ytil;
    } else {
        m[Gx] = yhat;
        m[(Dx + Ex) / 2] = ytil;
    }
    m[Hx] = yhat;
    m[cr->x] = yi;
    m[Bx] = ytil;
    m[Ax] = yhat;
    return from_xy_map(m);
}

/// Straighten every monotone run through the non-dyadic level yi between two
/// adjacent dyadic lines, removing the type-I breakpoints at that level.
PAMap eliminate_level(const PAMap& g, const Rational& yi,
                      const Rational& eps12) {
    const auto& pts = g.points();
    long Q = 1;
    while (Rational::pow2(-Q) >= eps12)
        ++Q;
    Rational yhat, ytil;
    for (;; ++Q) {
        yhat = floor_to_grid(yi, Q);
        ytil = yhat + Rational::pow2(-Q);
        bool ok = true;
        for (const auto& p : pts)
            if (p.y != yi && p.y > yhat && p.y < ytil) {
                ok = false;
                break;
            }
        if (ok)
            break;
    }

    std::map<Rational, Rational> m;
    for (const auto& p : pts)
        if (p.y != yi)
            m[p.x] = p.y;
    for (std::size_t j = 1; j + 1 < pts.size(); ++j) {
        if (pts[j].y != yi)
            continue;
        Rational sl = g.slope(j - 1), sr = g.slope(j);
        if (sl.sign() != sr.sign())
            throw std::logic_error(
                "approximate_in_G: unexpected extremum at type-I level");
        if (sl > 0) {
            m[x_at(pts[j - 1], pts[j], yhat)] = yhat;
            m[x_at(pts[j], pts[j + 1], ytil)] = ytil;
        } else {
            m[x_at(pts[j - 1], pts[j], ytil)] = ytil;
            m[x_at(pts[j], pts[j + 1], yhat)] = yhat;
        }
    }
    return from_xy_map(m);
}

PAMap step1_dyadic_y(PAMap g, const Rational& eps) {
    const Rational eps12 = eps / 12;
    for (;;) {
        const auto& pts = g.points();
        std::size_t n = pts.size();
        // interior extrema with non-dyadic y first (they spawn type-I points)
        bool changed = false;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (pts[i].y.is_dyadic())
                continue;
            Rational sl = g.slope(i - 1), sr = g.slope(i);
            if (sl > 0 && sr < 0) {
                g = eliminate_peak(g, i, eps12);
            } else if (sl < 0 && sr > 0) {
                g = vflip(eliminate_peak(vflip(g), i, eps12));
            } else {
                continue;
            }
            changed = true;
            break;
        }
        if (changed)
            continue;
        if (!pts.front().y.is_dyadic()) {
            if (g.slope(0) < 0)
                g = eliminate_peak(g, 0, eps12);
            else
                g = vflip(eliminate_peak(vflip(g), 0, eps12));
            continue;
        }
        if (!pts.back().y.is_dyadic()) {
            PAMap t = hflip(g);
            if (t.slope(0) < 0)
                t = eliminate_peak(t, 0, eps12);
            else
                t = vflip(eliminate_peak(vflip(t), 0, eps12));
            g = hflip(t);
            continue;
        }
        // remaining non-dyadic levels carry only type-I breakpoints
        std::optional<Rational> level;
        for (std::size_t i = 1; i + 1 < n; ++i)
            if (!pts[i].y.is_dyadic()) {
                level = pts[i].y;
                break;
            }
        if (!level)
            break;
        g = eliminate_level(g, *level, eps12);
    }
    if (!is_lambda_preserving(g))
        throw std::logic_error("approximate_in_G: stage 1 broke the measure");
    return g;
}

// ---------------------------------------------------------------------------
// Stage 2: make breakpoint x-coordinates dyadic.
// ---------------------------------------------------------------------------

struct Node {
    Rational x;
    long level;  // y = level * 2^-M
};

std::vector<Node> build_path(const PAMap& g, long M) {
    const Rational unit = Rational::pow2(-M);
    auto level_of = [&](const Rational& y) {
        Rational s = y * Rational::pow2(M);
        if (s.den() != 1)
            throw std::logic_error("build_path: level off the grid");
        return s.num().convert_to<long>();
    };
    std::vector<Node> path;
    const auto& pts = g.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        long la = level_of(pts[i].y), lb = level_of(pts[i + 1].y);
        path.push_back({pts[i].x, la});
        int dir = lb > la ? 1 : -1;
        for (long L = la + dir; L != lb; L += dir)
            path.push_back({x_at(pts[i], pts[i + 1], Rational(L) * unit), L});
    }
    path.push_back({pts.back().x, level_of(pts.back().y)});
    return path;
}

PAMap step2_dyadic_x(const PAMap& g, const Rational& eps) {
    long M = 1;
    for (const auto& p : g.points())
        M = std::max(M, (long)p.y.dyadic_exponent());
    while (Rational::pow2(-M) * 6 >= eps)
        ++M;

    Rational K = 1;
    for (std::size_t i = 0; i < g.segment_count(); ++i)
        K = std::max(K, rat_abs(g.slope(i)), std::less<Rational>());

    std::vector<Node> path = build_path(g, M);
    Rational min_gap = 1;
    for (std::size_t t = 0; t + 1 < path.size(); ++t)
        min_gap = std::min(min_gap, path[t + 1].x - path[t].x,
                           std::less<Rational>());

    long P = M;
    while (Rational::pow2(-P) * 8 >= min_gap ||
           Rational::pow2(-P) * 12 * K >= eps)
        ++P;
    const Rational step = Rational::pow2(-P);

    long top = 0;
    for (const auto& nd : path)
        top = std::max(top, nd.level);
    for (long L = 0; L <= top; ++L) {
        std::vector<std::size_t> cross;
        std::vector<int> sgn;
        for (std::size_t t = 1; t + 1 < path.size(); ++t) {
            if (path[t].level != L)
                continue;
            bool below_prev = path[t - 1].level < L;
            bool below_next = path[t + 1].level < L;
            if (below_prev == below_next) {
                // local extremum relative to this line: free to move
                if (!path[t].x.is_dyadic())
                    path[t].x = round_to_grid(path[t].x, P);
            } else {
                cross.push_back(t);
                sgn.push_back(below_prev ? 1 : -1);
            }
        }
        if (cross.empty())
            continue;
        Rational target = 0;
        for (std::size_t u = 0; u < cross.size(); ++u)
            target += Rational(sgn[u]) * path[cross[u]].x;
        for (std::size_t u = 0; u < cross.size(); ++u)
            if (!path[cross[u]].x.is_dyadic())
                path[cross[u]].x = round_to_grid(path[cross[u]].x, P);
        Rational cur = 0;
        for (std::size_t u = 0; u < cross.size(); ++u)
            cur += Rational(sgn[u]) * path[cross[u]].x;
        Rational res = target - cur;
        if (!res.is_dyadic())
            throw std::logic_error("approximate_in_G: non-dyadic residual");
        for (std::size_t u = 0; u < cross.size() && !res.is_zero(); ++u) {
            Rational take = std::min(rat_abs(res), step, std::less<Rational>());
            Rational mv = Rational(res.sign()) * take * Rational(sgn[u]);
            path[cross[u]].x += mv;
            res -= Rational(sgn[u]) * mv;
        }
        if (!res.is_zero())
            throw std::logic_error("approximate_in_G: residual not absorbed");
    }

    std::vector<Point> pts;
    for (const auto& nd : path)
        pts.push_back({nd.x, Rational(nd.level) * Rational::pow2(-M)});
    PAMap out(std::move(pts));
    if (!is_lambda_preserving(out))
        throw std::logic_error("approximate_in_G: stage 2 broke the measure");
    return out;
}

// ---------------------------------------------------------------------------
// Stage 3: repair slopes with equal-width window perturbations per leg.
// ---------------------------------------------------------------------------

PAMap step3_pow2_slopes(const PAMap& g) {
    long M = 1;
    for (const auto& p : g.points())
        M = std::max(M, (long)p.y.dyadic_exponent());
    const Rational band = Rational::pow2(-M);
    std::vector<Node> path = build_path(g, M);
    std::vector<Point> out;
    out.push_back({path[0].x, Rational(path[0].level) * band});
    for (std::size_t t = 0; t + 1 < path.size(); ++t) {
        const Node& a = path[t];
        const Node& b = path[t + 1];
        Rational w = b.x - a.x;
        Rational y0 = Rational(a.level) * band;
        Rational y1 = Rational(b.level) * band;
        if ((band / w).log2_exact()) {
            out.push_back({b.x, y1});
            continue;
        }
        long N = (long)w.dyadic_exponent();
        Int l = (w * Rational::pow2(N)).num();  // odd leg count
        Rational sub = Rational::pow2(-N);
        Rational x = a.x;
        for (Int j = 1; j <= l; ++j) {
            x += sub;
            bool odd = (j & 1) != 0;
            out.push_back({x, odd ? y1 : y0});
        }
    }
    return PAMap(std::move(out));
}

// ---------------------------------------------------------------------------
// target_entropy internals
// ---------------------------------------------------------------------------

/// Replace the affine portion [x0, x0+dx] of g (slope +-2^k) with 2^l - 1
/// legs spanning the same y-range: 2^l - 2 legs of |slope| 2^(k+l) and a
/// final leg of |slope| 2^(k+l-1). Adds dx*(l - 2^(1-l)) to the entropy.
PAMap insert_entropy_window(const PAMap& g, const Rational& x0,
                            const Rational& dx, long l) {
    const auto& pts = g.points();
    std::size_t i = 0;
    while (i + 1 < pts.size() && !(pts[i + 1].x > x0))
        ++i;
    if (!(pts[i].x <= x0 && x0 + dx <= pts[i + 1].x))
        throw std::logic_error("entropy window does not fit one segment");
    Rational s = g.slope(i);
    Rational y0 = g.eval(x0);
    Rational dy = rat_abs(s) * dx;
    Rational yfar = y0 + Rational(s.sign()) * dy;
    long k = *rat_abs(s).log2_exact();
    Int legs = (Int(1) << (unsigned long)l) - 1;
    Rational wsmall = dy * Rational::pow2(-(k + l));
    Rational wlast = dy * Rational::pow2(-(k + l - 1));

    std::map<Rational, Rational> m;
    for (const auto& p : pts)
        m[p.x] = p.y;
    Rational x = x0;
    m[x] = y0;
    for (Int j = 0; j < legs; ++j) {
        x += (j == legs - 1) ? wlast : wsmall;
        m[x] = ((j & 1) == 0) ? yfar : y0;
    }
    if (x != x0 + dx)
        throw std::logic_error("entropy window width mismatch");
    return from_xy_map(m);
}

/// Sufficient locally-eventually-onto check for expanding maps: the image
/// of an interval under a continuous map is again an interval, so iterating
/// the exact image hull of every segment cell and requiring it to reach
/// [0,1] (or to swallow an already-confirmed cell) certifies the property.
bool confirm_leo_expanding(const PAMap& g) {
    const auto& pts = g.points();
    const std::size_t n = g.segment_count();
    for (std::size_t i = 0; i < n; ++i)
        if (rat_abs(g.slope(i)) < 2)
            return false;
    long Q = 1;
    for (const auto& p : pts) {
        if (!p.x.is_dyadic() || !p.y.is_dyadic())
            return false;
        Q = std::max({Q, (long)p.x.dyadic_exponent(),
                      (long)p.y.dyadic_exponent()});
    }
    // sparse tables for range min/max over the breakpoint y-values
    std::size_t LOG = 1;
    while ((std::size_t(1) << LOG) <= n + 1)
        ++LOG;
    std::vector<std::vector<Rational>> mn(LOG), mx(LOG);
    mn[0].resize(n + 1);
    mx[0].resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        mn[0][i] = mx[0][i] = pts[i].y;
    for (std::size_t j = 1; j < LOG; ++j) {
        std::size_t len = std::size_t(1) << j;
        if (n + 2 < len)
            break;
        std::size_t cnt = n + 2 - len;
        mn[j].resize(cnt);
        mx[j].resize(cnt);
        for (std::size_t s = 0; s < cnt; ++s) {
            mn[j][s] = std::min(mn[j - 1][s], mn[j - 1][s + len / 2]);
            mx[j][s] = std::max(mx[j - 1][s], mx[j - 1][s + len / 2]);
        }
    }
    auto rmin = [&](std::size_t a, std::size_t b) {  // breakpoints a..b
        std::size_t j = 0;
        while ((std::size_t(1) << (j + 1)) <= b - a + 1)
            ++j;
        return std::min(mn[j][a], mn[j][b - (std::size_t(1) << j) + 1]);
    };
    auto rmax = [&](std::size_t a, std::size_t b) {
        std::size_t j = 0;
        while ((std::size_t(1) << (j + 1)) <= b - a + 1)
            ++j;
        return std::max(mx[j][a], mx[j][b - (std::size_t(1) << j) + 1]);
    };
    // first breakpoint index with x >= v
    auto first_at_or_after = [&](const Rational& v) {
        std::size_t lo = 0, hi = n + 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (pts[mid].x < v)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    };
    // exact image interval of [lo, hi]
    auto image = [&](const Rational& lo, const Rational& hi) {
        Rational vlo = g.eval(lo);
        Rational vhi = g.eval(hi);
        Rational a = std::min(vlo, vhi);
        Rational b = std::max(vlo, vhi);
        std::size_t i0 = first_at_or_after(lo);
        if (i0 <= n && pts[i0].x == lo)
            ++i0;
        std::size_t i1 = first_at_or_after(hi);  // breakpoints in (lo, hi)
        if (i0 < i1) {
            a = std::min(a, rmin(i0, i1 - 1));
            b = std::max(b, rmax(i0, i1 - 1));
        }
        return std::make_pair(a, b);
    };
    const long max_steps = 8 * Q + 256;
    for (std::size_t c = 0; c < n; ++c) {
        Rational lo = pts[c].x, hi = pts[c + 1].x;
        bool ok = false;
        for (long it = 0; it < max_steps; ++it) {
            if (lo.is_zero() && hi == Rational(1)) {
                ok = true;
                break;
            }
            if (c > 0) {
                // does [lo, hi] fully contain a confirmed cell (index < c)?
                std::size_t i0 = first_at_or_after(lo);
                if (i0 < c && pts[i0 + 1].x <= hi) {
                    ok = true;
                    break;
                }
            }
            auto [nlo, nhi] = image(lo, hi);
            if (nlo == lo && nhi == hi)
                break;  // stalled
            lo = nlo;
            hi = nhi;
        }
        if (!ok)
            return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

Point partition_point(const Point& p1, const Point& p2) {
    if (!p1.x.is_dyadic() || !p1.y.is_dyadic() || !p2.x.is_dyadic() ||
        !p2.y.is_dyadic())
        throw std::domain_error("partition_point: endpoints must be dyadic");
    if (!(p1.x < p2.x) || !(p1.y < p2.y))
        throw std::domain_error("partition_point: points must increase");
    Rational s = (p2.y - p1.y) / (p2.x - p1.x);
    if (s < 1)
        throw std::domain_error("partition_point: slope must be at least 1");
    if (s.log2_exact())
        throw std::domain_error("partition_point: slope is a power of two");
    long k2 = s.floor_log2();
    long k1 = k2 + 1;
    Rational x3 = p1.x + Rational::pow2(-k2) * (p2.y - p1.y) - (p2.x - p1.x);
    Rational y3 = p1.y + Rational::pow2(k1) * (x3 - p1.x);
    if (!(p1.x < x3 && x3 < p2.x && p1.y < y3 && y3 < p2.y))
        throw std::logic_error("partition_point: solution not interior");
    return {x3, y3};
}

namespace {

/// Split p-q (positive slope, dyadic endpoints) at a dyadic point so that
/// both slopes are powers of two; slopes below 1 are handled by transposing.
Point chain_point(const Point& p, const Point& q) {
    Rational s = (q.y - p.y) / (q.x - p.x);
    if (s >= 1)
        return partition_point(p, q);
    Point t = partition_point({p.y, p.x}, {q.y, q.x});
    return {t.y, t.x};
}

}  // namespace

PAMap approximate_increasing_in_F(const PAMap& a, const Rational& eps) {
    if (!(eps > 0))
        throw std::invalid_argument("approximate_increasing_in_F: eps <= 0");
    for (std::size_t i = 0; i < a.segment_count(); ++i)
        if (!(a.slope(i) > 0))
            throw std::domain_error(
                "approximate_increasing_in_F: map must be increasing");
    if (!(a.points().front().y == 0) || !(a.points().back().y == 1))
        throw std::domain_error(
            "approximate_increasing_in_F: map must fix 0 and 1");
    if (is_in_F(a))
        return a;

    long N = 2;
    while (Rational::pow2(-N) * 3 >= eps)
        ++N;
    PAMap inv = a.inverse();
    for (;; ++N) {
        const Int cnt = Int(1) << (unsigned long)N;
        std::vector<Rational> xs;
        xs.push_back(0);
        std::vector<Rational> xhat;  // xhat[j] = a^{-1}(j 2^-N), j = 0..2^N
        for (Int j = 0; j <= cnt; ++j)
            xhat.push_back(inv.eval(Rational(j) * Rational::pow2(-N)));
        for (Int j = 1; j < cnt; ++j) {
            std::size_t v = (std::size_t)j.convert_to<unsigned long>();
            Rational lo = std::max(xs.back(), xhat[v - 1], std::less<Rational>());
            const Rational& hi = xhat[v + 1];
            if (xhat[v].is_dyadic() && lo < xhat[v] && xhat[v] < hi)
                xs.push_back(xhat[v]);
            else
                xs.push_back(dyadic_between(lo, hi));
        }
        xs.push_back(1);

        std::vector<Point> pts;
        pts.push_back({Rational(0), Rational(0)});
        for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
            Point p{xs[j], Rational((long)j) * Rational::pow2(-N)};
            Point q{xs[j + 1], Rational((long)j + 1) * Rational::pow2(-N)};
            Rational s = (q.y - p.y) / (q.x - p.x);
            if (!s.log2_exact())
                pts.push_back(chain_point(p, q));
            pts.push_back(q);
        }
        PAMap f(std::move(pts));
        if (is_in_F(f) && sup_distance(a, f) < eps)
            return f;
    }
}

PAMap approximate_in_G(const PAMap& h, const Rational& eps) {
    if (!(eps > 0))
        throw std::invalid_argument("approximate_in_G: eps <= 0");
    if (!is_lambda_preserving(h))
        throw std::domain_error("approximate_in_G: input must preserve measure");
    if (in_G_quiet(h))
        return h;
    PAMap g = step1_dyadic_y(h, eps);
    g = step2_dyadic_x(g, eps);
    g = step3_pow2_slopes(g);
    if (!is_in_G(g))
        throw std::logic_error("approximate_in_G: result not in G");
    if (!(sup_distance(h, g) < eps))
        throw std::logic_error("approximate_in_G: budget exceeded");
    return g;
}

PAMap make_window(const WindowSpec& spec) {
    const std::size_t m = spec.exponents.size();
    if (m == 0)
        throw std::invalid_argument("make_window: no legs");
    Rational total = 0;
    for (long k : spec.exponents) {
        if (k < 0)
            throw std::invalid_argument("make_window: negative exponent");
        total += Rational::pow2(-k);
    }
    if (total != 1)
        throw std::invalid_argument("make_window: leg widths must sum to |J|");
    const Rational len = spec.J.length();
    if (len.is_zero() || spec.J.lo < 0 || spec.J.hi > 1)
        throw std::invalid_argument("make_window: bad interval");

    long net = 0;
    for (std::size_t i = 0; i < m; ++i)
        net += ((i % 2 == 0) == spec.rising) ? 1 : -1;
    Rational v0;
    if (spec.J.lo > 0)
        v0 = spec.J.lo;
    else if (spec.J.hi < 1)
        v0 = spec.J.hi - Rational(net) * len;
    else
        v0 = spec.rising ? Rational(0) : Rational(1);
    Rational vend = v0 + Rational(net) * len;
    if (spec.J.lo > 0 && spec.J.hi < 1 && vend != spec.J.hi)
        throw std::invalid_argument("make_window: legs do not reconnect");

    std::vector<Point> pts;
    if (spec.J.lo > 0) {
        pts.push_back({Rational(0), Rational(0)});
        pts.push_back({spec.J.lo, v0});
    } else {
        pts.push_back({Rational(0), v0});
    }
    Rational x = spec.J.lo, y = v0;
    for (std::size_t i = 0; i < m; ++i) {
        x += len * Rational::pow2(-spec.exponents[i]);
        y += (((i % 2 == 0) == spec.rising) ? len : -len);
        if (y < spec.J.lo || y > spec.J.hi)
            throw std::invalid_argument("make_window: legs leave the window");
        pts.push_back({x, y});
    }
    if (spec.J.hi < 1)
        pts.push_back({Rational(1), Rational(1)});
    return PAMap(std::move(pts));
}

PAMap make_leo(const PAMap& g, const Rational& eps) {
    if (!(eps > 0))
        throw std::invalid_argument("make_leo: eps <= 0");
    if (!is_in_G(g))
        throw std::domain_error("make_leo: input must be in G");
    if (is_LEO(g))
        return g;

    JCollection jc = j_collection(g);
    const bool reflect = jc.mode == JCollection::Mode::Reflection;

    // Stage 1: fill the untouched (identity or reflection) region with
    // 3-fold window perturbations on short dyadic chunks.
    long Kc = 1;
    while (Rational::pow2(-Kc) * 2 >= eps)
        ++Kc;
    const Rational chunk_len = Rational::pow2(-Kc);

    std::vector<Interval> members = jc.intervals;
    std::vector<Interval> complement;
    {
        Rational pos = 0;
        for (const auto& J : members) {
            if (pos < J.lo)
                complement.push_back({pos, J.lo});
            pos = J.hi;
        }
        if (pos < 1)
            complement.push_back({pos, Rational(1)});
    }

    std::map<Rational, Rational> m;
    for (const auto& p : g.points())
        m[p.x] = p.y;
    for (const auto& piece : complement) {
        Rational pos = piece.lo;
        Rational rem = piece.length();
        while (!rem.is_zero()) {
            Rational w = chunk_len;
            while (w > rem)
                w = w / 2;
            Rational y0 = reflect ? Rational(1) - pos : pos;
            int sgn = reflect ? -1 : 1;
            // legs of widths w/2, w/4, w/4 with slopes 2, -4, 4 (mirrored
            // when the region is a reflection)
            m[pos] = y0;
            m[pos + w / 2] = y0 + Rational(sgn) * w;
            m[pos + w / 2 + w / 4] = y0;
            m[pos + w] = y0 + Rational(sgn) * w;
            members.push_back({pos, pos + w});
            pos += w;
            rem -= w;
        }
    }
    PAMap cur = from_xy_map(m);
    std::sort(members.begin(), members.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

    // Stage 2: weld the covering intervals together at every shared boundary
    // with a measure-neutral six-segment wiggle.
    for (std::size_t b = 0; b + 1 < members.size(); ++b) {
        const Rational Bx = members[b].hi;
        if (Bx != members[b + 1].lo)
            throw std::logic_error("make_leo: cover has a gap");
        const Rational By = cur.eval(Bx);
        const auto& pts = cur.points();
        std::size_t j = 0;
        while (j + 1 < pts.size() && !(pts[j + 1].x > Bx))
            ++j;
        // segment j contains Bx; the boundary need not be a breakpoint
        Rational sl = (pts[j].x == Bx) ? cur.slope(j - 1) : cur.slope(j);
        Rational sr = cur.slope(j);
        if (sl.sign() != sr.sign())
            throw std::logic_error(
                "make_leo: boundary derivatives differ in sign");
        const int sgn = sl.sign();
        long k1 = *rat_abs(sl).log2_exact();
        long k2 = *rat_abs(sr).log2_exact();

        long M = 1;
        Rational A_x, C_x;
        for (;; ++M) {
            if (Rational::pow2(-M) * 4 >= eps)
                continue;
            A_x = Bx - Rational::pow2(-M - k1);
            C_x = Bx + Rational::pow2(-M - k2);
            if (!(A_x > members[b].lo) || !(C_x < members[b + 1].hi))
                continue;
            bool clean = true;
            for (const auto& p : cur.points())
                if (p.x != Bx && p.x > A_x && p.x < C_x) {
                    clean = false;
                    break;
                }
            if (clean)
                break;
        }
        const Rational u = Rational::pow2(-M);
        const Rational A_y = By - Rational(sgn) * u;
        const Rational C_y = By + Rational(sgn) * u;
        const Rational w1 = Rational::pow2(-M - k1);
        const Rational w2 = Rational::pow2(-M - k2);

        std::map<Rational, Rational> mm;
        for (const auto& p : cur.points())
            mm[p.x] = p.y;
        // drop any original breakpoint at the boundary first: when k1 == k2
        // the wiggle places its own node exactly at Bx
        mm.erase(Bx);
        Rational x = A_x;
        mm[x] = A_y;
        x += w1 / 2;
        mm[x] = By;  // slope sgn*2^(k1+1)
        x += w2 / 2;
        mm[x] = C_y;  // slope sgn*2^(k2+1)
        x += w2 / 4;
        mm[x] = By;  // slope -sgn*2^(k2+2)
        x += w1 / 4;
        mm[x] = A_y;  // slope -sgn*2^(k1+2)
        x += w1 / 4;
        mm[x] = By;  // slope sgn*2^(k1+2)
        x += w2 / 4;
        mm[x] = C_y;  // slope sgn*2^(k2+2)
        if (x != C_x)
            throw std::logic_error("make_leo: wiggle width mismatch");
        cur = from_xy_map(mm);
    }

    if (!is_in_G(cur))
        throw std::logic_error("make_leo: result not in G");
    if (!(sup_distance(g, cur) < eps))
        throw std::logic_error("make_leo: budget exceeded");
    if (!is_LEO(cur))
        throw std::logic_error("make_leo: result not locally eventually onto");
    return cur;
}

MatchingSchedule solve_dynamic_matching(const std::vector<Rational>& alpha,
                                        const std::vector<Rational>& beta) {
    const std::size_t m = alpha.size();
    if (m == 0 || beta.size() != m)
        throw std::invalid_argument("solve_dynamic_matching: size mismatch");
    Rational sa = 0, sb = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(alpha[i] > 0) || !(beta[i] > 0))
            throw std::invalid_argument(
                "solve_dynamic_matching: rates must be positive");
        if (i > 0 && (alpha[i] > alpha[i - 1] || beta[i] > beta[i - 1]))
            throw std::invalid_argument(
                "solve_dynamic_matching: inputs must be sorted descending");
        sa += alpha[i];
        sb += beta[i];
    }
    if (sa != sb)
        throw std::invalid_argument("solve_dynamic_matching: totals differ");
    Rational pref = 0;
    for (std::size_t i = 0; i < m; ++i) {
        pref += alpha[i] - beta[i];
        if (pref < 0)
            throw InfeasibleMatching(
                i + 1, "solve_dynamic_matching: infeasible at prefix " +
                           std::to_string(i + 1));
    }

    // Build a doubly stochastic D with beta = D alpha by averaging pairs.
    std::vector<std::vector<Rational>> D(m, std::vector<Rational>(m, 0));
    for (std::size_t i = 0; i < m; ++i)
        D[i][i] = 1;
    std::vector<Rational> gamma = alpha;
    for (;;) {
        std::size_t p = m, q = m;
        for (std::size_t i = 0; i < m; ++i)
            if (gamma[i] > beta[i]) {
                p = i;
                break;
            }
        if (p == m)
            break;
        for (std::size_t i = p + 1; i < m; ++i)
            if (gamma[i] < beta[i]) {
                q = i;
                break;
            }
        if (q == m)
            throw std::logic_error("solve_dynamic_matching: transfer failed");
        Rational delta = std::min(gamma[p] - beta[p], beta[q] - gamma[q],
                                  std::less<Rational>());
        Rational theta = delta / (gamma[p] - gamma[q]);
        for (std::size_t j = 0; j < m; ++j) {
            Rational rp = D[p][j], rq = D[q][j];
            D[p][j] = (Rational(1) - theta) * rp + theta * rq;
            D[q][j] = theta * rp + (Rational(1) - theta) * rq;
        }
        Rational gp = gamma[p], gq = gamma[q];
        gamma[p] = (Rational(1) - theta) * gp + theta * gq;
        gamma[q] = theta * gp + (Rational(1) - theta) * gq;
    }

    // Decompose D into permutation matrices (Birkhoff).
    MatchingSchedule sched;
    for (;;) {
        bool any = false;
        for (std::size_t i = 0; i < m && !any; ++i)
            for (std::size_t j = 0; j < m && !any; ++j)
                any = !D[i][j].is_zero();
        if (!any)
            break;
        // perfect matching over positive entries (augmenting paths)
        std::vector<long> match_col(m, -1);
        std::vector<char> used;
        std::function<bool(std::size_t)> try_row = [&](std::size_t i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (used[j] || D[i][j].is_zero())
                    continue;
                used[j] = 1;
                if (match_col[j] < 0 || try_row((std::size_t)match_col[j])) {
                    match_col[j] = (long)i;
                    return true;
                }
            }
            return false;
        };
        for (std::size_t i = 0; i < m; ++i) {
            used.assign(m, 0);
            if (!try_row(i))
                throw std::logic_error(
                    "solve_dynamic_matching: no perfect matching");
        }
        std::vector<std::size_t> perm(m);
        for (std::size_t j = 0; j < m; ++j)
            perm[(std::size_t)match_col[j]] = j;
        Rational c = D[0][perm[0]];
        for (std::size_t i = 1; i < m; ++i)
            c = std::min(c, D[i][perm[i]], std::less<Rational>());
        for (std::size_t i = 0; i < m; ++i)
            D[i][perm[i]] -= c;
        sched.entries.push_back({c, std::move(perm)});
    }

    // sanity: the schedule reproduces beta exactly
    Rational dur = 0;
    for (const auto& e : sched.entries)
        dur += e.duration;
    if (dur != 1)
        throw std::logic_error("solve_dynamic_matching: durations != 1");
    for (std::size_t i = 0; i < m; ++i) {
        Rational got = 0;
        for (const auto& e : sched.entries)
            got += e.duration * alpha[e.perm[i]];
        if (got != beta[i])
            throw std::logic_error("solve_dynamic_matching: wrong fill");
    }
    return sched;
}

PAMap rewrite_slopes_min_entropy(const PAMap& g, const Interval& Y,
                                 const Rational& eps) {
    if (!(eps > 0))
        throw std::invalid_argument("rewrite_slopes_min_entropy: eps <= 0");
    if (!Y.lo.is_dyadic() || !Y.hi.is_dyadic() || Y.lo < 0 || Y.hi > 1 ||
        !(Y.lo < Y.hi))
        throw std::domain_error("rewrite_slopes_min_entropy: bad band");
    std::vector<Leg> legs = preimage_interval(g, Y);
    const std::size_t m = legs.size();
    if (m == 0)
        throw std::domain_error("rewrite_slopes_min_entropy: no legs");
    for (const auto& leg : legs) {
        if (!leg.onto)
            throw std::domain_error(
                "rewrite_slopes_min_entropy: leg does not cover the band");
        for (const auto& p : g.points())
            if (p.x > leg.iv.lo && p.x < leg.iv.hi)
                throw std::domain_error(
                    "rewrite_slopes_min_entropy: legs must be affine");
    }
    if (m == 1)
        return g;

    const Rational height = Y.length();
    std::vector<long> lexp(m);
    std::vector<int> dir(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rational s = height / legs[i].iv.length();
        auto k = s.log2_exact();
        if (!k)
            throw std::domain_error(
                "rewrite_slopes_min_entropy: slope not a power of two");
        lexp[i] = *k;
        dir[i] = (g.eval(legs[i].iv.lo) == Y.lo) ? 1 : -1;
    }

    // buckets ordered by decreasing width (increasing l), target exponents
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return lexp[a] < lexp[b];
                     });
    std::vector<std::size_t> bucket_of(m);
    for (std::size_t b = 0; b < m; ++b)
        bucket_of[order[b]] = b;
    std::vector<long> kexp(m);
    for (std::size_t i = 0; i + 1 < m; ++i)
        kexp[i] = (long)i + 1;
    kexp[m - 1] = (long)m - 1;

    std::vector<Rational> alpha(m), beta(m);
    for (std::size_t i = 0; i < m; ++i) {
        alpha[i] = Rational::pow2(-kexp[i]);
        beta[i] = Rational::pow2(-lexp[order[i]]);
    }
    MatchingSchedule sched = solve_dynamic_matching(alpha, beta);

    long M = 0;
    while (height * Rational::pow2(-M) * 2 >= eps)
        ++M;
    const Rational H = height * Rational::pow2(-M);

    long R = (long)H.dyadic_exponent() + 2;
    for (int attempt = 0; attempt < 10; ++attempt, R += 2) {
        // dyadic slice heights summing exactly to H
        std::vector<Rational> hs;
        std::vector<const ScheduleEntry*> entries;
        Rational acc = 0;
        std::size_t biggest = 0;
        for (const auto& e : sched.entries) {
            Rational hv = floor_to_grid(e.duration * H, R);
            hs.push_back(hv);
            entries.push_back(&e);
            acc += hv;
            if (hv > hs[biggest])
                biggest = hs.size() - 1;
        }
        hs[biggest] += H - acc;
        std::vector<std::size_t> keep;
        for (std::size_t t = 0; t < hs.size(); ++t)
            if (!hs[t].is_zero())
                keep.push_back(t);

        // rebuild: legs become staircases, everything between legs is a
        // horizontally shifted copy of g
        const auto& pts = g.points();
        std::vector<Point> out;
        Rational offset = 0;
        Rational pos = 0;
        std::size_t pi = 0;
        out.push_back(pts.front());
        for (std::size_t i = 0; i < m; ++i) {
            while (pi < pts.size() && pts[pi].x <= legs[i].iv.lo) {
                if (pts[pi].x > pos)
                    out.push_back({pts[pi].x + offset, pts[pi].y});
                ++pi;
            }
            Rational x = legs[i].iv.lo + offset;
            Rational y = dir[i] > 0 ? Y.lo : Y.hi;
            if (out.back().x != x || out.back().y != y)
                out.push_back({x, y});
            const std::size_t b = bucket_of[i];
            for (long band = 0; band < (1L << M); ++band) {
                for (std::size_t u = 0; u < keep.size(); ++u) {
                    std::size_t t =
                        dir[i] > 0 ? keep[u] : keep[keep.size() - 1 - u];
                    long kk = kexp[entries[t]->perm[b]];
                    x += hs[t] * Rational::pow2(-kk);
                    y += Rational(dir[i]) * hs[t];
                    out.push_back({x, y});
                }
            }
            offset = x - legs[i].iv.hi;
            pos = legs[i].iv.hi;
        }
        while (pi < pts.size()) {
            if (pts[pi].x > pos)
                out.push_back({pts[pi].x + offset, pts[pi].y});
            ++pi;
        }
        if (out.back().x != 1)
            throw std::logic_error(
                "rewrite_slopes_min_entropy: total width changed");
        PAMap res(std::move(out));
        if (!is_in_G(res))
            throw std::logic_error("rewrite_slopes_min_entropy: left G");
        if (sup_distance(g, res) < eps)
            return res;
    }
    throw std::logic_error("rewrite_slopes_min_entropy: budget exceeded");
}

PAMap target_entropy(const PAMap& h, const Rational& c, const Rational& eps) {
    if (c < 2)
        throw std::domain_error("target_entropy: targets below 2 unsupported");
    if (!(eps > 0))
        throw std::invalid_argument("target_entropy: eps <= 0");
    const Rational b = eps / 4;
    PAMap g = approximate_in_G(h, b);
    g = make_leo(g, b);

    Rational ent = *entropy(g).exact;
    if (ent > c) {
        // bring the base entropy below 2 band by band
        std::vector<Rational> levels;
        for (const auto& p : g.points())
            levels.push_back(p.y);
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        const Rational share = b / Rational((long)levels.size());
        for (std::size_t i = 0; i + 1 < levels.size(); ++i)
            g = rewrite_slopes_min_entropy(g, {levels[i], levels[i + 1]},
                                           share);
        ent = *entropy(g).exact;
    }

    // raise the entropy with high-fold windows on untouched affine chunks
    const Rational used = sup_distance(h, g);
    const Rational cap_y = (eps - used) / 2;  // max vertical wiggle per window
    struct Chunk {
        Rational x, width;
        long k;
    };
    std::vector<Chunk> chunks;
    Rational avail = 0;
    for (std::size_t i = 0; i < g.segment_count(); ++i) {
        long k = *rat_abs(g.slope(i)).log2_exact();
        Rational w = g.points()[i + 1].x - g.points()[i].x;
        chunks.push_back({g.points()[i].x, w, k});
        avail += w;
    }
    std::stable_sort(chunks.begin(), chunks.end(),
                     [](const Chunk& a, const Chunk& b) {
                         return a.k != b.k ? a.k < b.k : a.width > b.width;
                     });
    auto pow2_at_most = [](const Rational& v) {
        long e = v.floor_log2();
        Rational r = Rational::pow2(e);
        while (r > v)
            r = r / 2;
        return r;
    };
    auto gain_rate = [](long l) {
        return Rational(l) - Rational::pow2(1 - l);
    };

    struct Win {
        Rational x, dx;
        long l;
    };
    std::vector<Win> wins;
    Rational rem = c - ent;
    int guard = 0;
    std::size_t ci = 0;
    while (rem >= eps) {
        if (++guard > 100000 || ci >= chunks.size())
            throw std::logic_error("target_entropy: ran out of room");
        Chunk& ch = chunks[ci];
        if (ch.width.is_zero()) {
            ++ci;
            continue;
        }
        long l = 2;
        while (l < 8 && rem / gain_rate(l) > avail / 2)
            ++l;
        Rational cap = pow2_at_most(cap_y * Rational::pow2(-ch.k));
        while (cap * Rational::pow2(ch.k) >= cap_y)
            cap = cap / 2;
        Rational dx = std::min(pow2_at_most(ch.width), cap,
                               std::less<Rational>());
        if (dx * gain_rate(l) > rem) {
            Rational lim = pow2_at_most(rem / gain_rate(l));
            dx = std::min(dx, lim, std::less<Rational>());
        }
        if (dx.is_zero())
            throw std::logic_error("target_entropy: window too small");
        wins.push_back({ch.x, dx, l});
        rem -= dx * gain_rate(l);
        avail -= dx;
        ch.x += dx;
        ch.width -= dx;
    }
    for (const auto& w : wins)
        g = insert_entropy_window(g, w.x, w.dx, w.l);

    Rational ent_f = *entropy(g).exact;
    if (!(rat_abs(ent_f - c) < eps))
        throw std::logic_error("target_entropy: entropy off target");
    if (!(sup_distance(h, g) < eps))
        throw std::logic_error("target_entropy: budget exceeded");
    if (!is_in_G(g))
        throw std::logic_error("target_entropy: result not in G");
    if (!confirm_leo_expanding(g)) {
        if (g.segment_count() <= 64) {
            if (!is_LEO(g))
                throw std::logic_error("target_entropy: result not LEO");
        } else {
            throw std::logic_error("target_entropy: could not certify LEO");
        }
    }
    return g;
}

PAMap random_G(std::uint64_t seed, unsigned complexity) {
    if (complexity < 1)
        throw std::invalid_argument("random_G: complexity must be >= 1");
    std::mt19937_64 rng(seed);
    auto pick = [&](unsigned long n) {
        return (unsigned long)(rng() % n);
    };
    auto basic = [&]() {
        switch (pick(5)) {
        case 0: return g0_plus();
        case 1: return g0_minus();
        case 2: return tent();
        case 3: return w2_right_quarter();
        default: return w3_basic();
        }
    };
    auto factor = [&]() -> PAMap {
        switch (pick(3)) {
        case 0: return basic();
        default: {
            for (int attempt = 0; attempt < 8; ++attempt) {
                std::vector<long> ks = {1, 1};
                unsigned long splits = pick(4);
                for (unsigned long s = 0; s < splits; ++s) {
                    unsigned long at = pick(ks.size());
                    if (ks[at] >= 6)
                        continue;
                    long kv = ks[at] + 1;
                    ks[at] = kv;
                    ks.insert(ks.begin() + (long)at, kv);
                }
                long t = 1 + (long)pick(4);
                Rational len = Rational::pow2(-t);
                unsigned long cells = (unsigned long)(1 << 4) -
                                      (unsigned long)(1 << (4 - t));
                Rational lo = Rational((long)pick(cells + 1)) *
                              Rational::pow2(-4);
                WindowSpec spec{{lo, lo + len}, ks, pick(2) == 0};
                try {
                    return make_window(spec);
                } catch (const std::invalid_argument&) {
                    continue;
                }
            }
            return w3_basic();
        }
        }
    };
    if (complexity == 1)
        return basic();
    PAMap g = factor();
    for (unsigned i = 1; i < complexity; ++i)
        g = compose(g, factor());
    return g;
}

}  // namespace gmap
