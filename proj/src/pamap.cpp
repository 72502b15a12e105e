#include "gmap/pamap.hpp"

#include <algorithm>
#include <sstream>

namespace gmap {

PAMap::PAMap(std::vector<Point> pts) : pts_(std::move(pts)) {
    if (pts_.size() < 2)
        throw std::domain_error("PAMap: need at least two breakpoints");
    if (!(pts_.front().x == Rational(0)) || !(pts_.back().x == Rational(1)))
        throw std::domain_error("PAMap: domain must be exactly [0,1]");
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i)
        if (!(pts_[i].x < pts_[i + 1].x))
            throw std::domain_error("PAMap: breakpoint x must be strictly increasing");
    for (const auto& p : pts_)
        if (p.y < Rational(0) || p.y > Rational(1))
            throw std::domain_error("PAMap: values must stay in [0,1]");
    canonicalize();
}

void PAMap::canonicalize() {
    std::vector<Point> out;
    out.reserve(pts_.size());
    out.push_back(pts_.front());
    for (std::size_t i = 1; i + 1 < pts_.size(); ++i) {
        const Point& a = out.back();
        const Point& b = pts_[i];
        const Point& c = pts_[i + 1];
        // collinear iff (b-a) x (c-a) = 0
        Rational cross = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        if (!cross.is_zero())
            out.push_back(b);
    }
    out.push_back(pts_.back());
    pts_ = std::move(out);
}

PAMap PAMap::identity() {
    return PAMap(std::vector<Point>{{Rational(0), Rational(0)}, {Rational(1), Rational(1)}});
}

PAMap PAMap::reflection() {
    return PAMap(std::vector<Point>{{Rational(0), Rational(1)}, {Rational(1), Rational(0)}});
}

double PAMap::eval_double(double x) const {
    if (x < 0.0) x = 0.0;
    if (x > 1.0) x = 1.0;
    std::size_t lo = 0, hi = pts_.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (pts_[mid].x.to_double() <= x)
            lo = mid;
        else
            hi = mid;
    }
    double ax = pts_[lo].x.to_double(), ay = pts_[lo].y.to_double();
    double bx = pts_[hi].x.to_double(), by = pts_[hi].y.to_double();
    double t = (x - ax) / (bx - ax);
    double y = ay + t * (by - ay);
    if (y < 0.0) y = 0.0;
    if (y > 1.0) y = 1.0;
    return y;
}

Rational PAMap::eval(const Rational& x) const {
    if (x < Rational(0) || x > Rational(1))
        throw std::domain_error("PAMap::eval: x out of [0,1]");
    // binary search for the segment containing x
    std::size_t lo = 0, hi = pts_.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (pts_[mid].x <= x)
            lo = mid;
        else
            hi = mid;
    }
    const Point& a = pts_[lo];
    const Point& b = pts_[hi];
    if (x == a.x)
        return a.y;
    if (x == b.x)
        return b.y;
    return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

Rational PAMap::slope(std::size_t i) const {
    if (i + 1 >= pts_.size())
        throw std::out_of_range("PAMap::slope: segment index");
    return (pts_[i + 1].y - pts_[i].y) / (pts_[i + 1].x - pts_[i].x);
}

PAMap PAMap::inverse() const {
    bool increasing = pts_.front().y < pts_.back().y;
    std::vector<Point> inv;
    inv.reserve(pts_.size());
    if (increasing) {
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i)
            if (!(pts_[i].y < pts_[i + 1].y))
                throw std::domain_error("PAMap::inverse: map not strictly increasing");
        for (const auto& p : pts_)
            inv.push_back({p.y, p.x});
    } else {
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i)
            if (!(pts_[i].y > pts_[i + 1].y))
                throw std::domain_error("PAMap::inverse: map not strictly monotone");
        for (auto it = pts_.rbegin(); it != pts_.rend(); ++it)
            inv.push_back({it->y, it->x});
    }
    if (!(inv.front().x == Rational(0)) || !(inv.back().x == Rational(1)))
        throw std::domain_error("PAMap::inverse: map not onto [0,1]");
    return PAMap(std::move(inv));
}

Rational PAMap::min_value() const {
    Rational m = pts_.front().y;
    for (const auto& p : pts_)
        if (p.y < m)
            m = p.y;
    return m;
}

Rational PAMap::max_value() const {
    Rational m = pts_.front().y;
    for (const auto& p : pts_)
        if (p.y > m)
            m = p.y;
    return m;
}

bool PAMap::is_onto() const {
    return min_value() == Rational(0) && max_value() == Rational(1);
}

std::string PAMap::to_text() const {
    std::ostringstream os;
    os << "pamap/1\n";
    for (const auto& p : pts_)
        os << p.x.str() << " " << p.y.str() << "\n";
    return os.str();
}

PAMap PAMap::parse_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "pamap/1")
        throw std::domain_error("pamap parse: missing 'pamap/1' header (line 1)");
    std::vector<Point> pts;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string xs, ys;
        if (!(ls >> xs >> ys))
            throw std::domain_error("pamap parse: bad pair at line " + std::to_string(lineno));
        auto x = Rational::parse(xs);
        auto y = Rational::parse(ys);
        if (!x || !y)
            throw std::domain_error("pamap parse: bad rational at line " + std::to_string(lineno));
        pts.push_back({*x, *y});
    }
    return PAMap(std::move(pts));
}

PreimageResult preimage_point(const PAMap& g, const Rational& y) {
    if (y < Rational(0) || y > Rational(1))
        throw std::domain_error("preimage_point: y out of [0,1]");
    PreimageResult res;
    const auto& pts = g.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point& a = pts[i];
        const Point& b = pts[i + 1];
        if (a.y == b.y) {
            if (a.y == y)
                res.plateaus.push_back(Interval(a.x, b.x));
            continue;
        }
        Rational lo = a.y < b.y ? a.y : b.y;
        Rational hi = a.y < b.y ? b.y : a.y;
        if (y < lo || y > hi)
            continue;
        Rational x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
        // avoid duplicating a solution at a shared breakpoint
        if (!res.points.empty() && res.points.back() == x)
            continue;
        res.points.push_back(x);
    }
    // A solution at the edge of a plateau belongs to the plateau, not to the
    // isolated-point list.
    if (!res.plateaus.empty()) {
        auto in_plateau = [&](const Rational& x) {
            for (const auto& iv : res.plateaus)
                if (iv.contains(x))
                    return true;
            return false;
        };
        res.points.erase(
            std::remove_if(res.points.begin(), res.points.end(), in_plateau),
            res.points.end());
    }
    return res;
}

PAMap compose(const PAMap& g1, const PAMap& g2, std::size_t budget) {
    // Breakpoint x-candidates: breakpoints of g2, plus g2-preimages of g1's
    // breakpoint x-coordinates (including plateau endpoints).
    std::vector<Rational> xs;
    for (const auto& p : g2.points())
        xs.push_back(p.x);
    for (const auto& q : g1.points()) {
        PreimageResult pre = preimage_point(g2, q.x);
        for (const auto& x : pre.points)
            xs.push_back(x);
        for (const auto& iv : pre.plateaus) {
            xs.push_back(iv.lo);
            xs.push_back(iv.hi);
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.size() - 1 > budget)
        throw BudgetExceeded("compose: segment budget exceeded");
    std::vector<Point> pts;
    pts.reserve(xs.size());
    for (const auto& x : xs)
        pts.push_back({x, g1.eval(g2.eval(x))});
    return PAMap(std::move(pts));
}

PAMap iterate(const PAMap& g, unsigned n, std::size_t budget) {
    PAMap acc = PAMap::identity();
    for (unsigned i = 0; i < n; ++i)
        acc = compose(g, acc, budget);
    return acc;
}

std::vector<Leg> preimage_interval(const PAMap& g, const Interval& Y) {
    if (Y.lo < Rational(0) || Y.hi > Rational(1))
        throw std::domain_error("preimage_interval: Y not within [0,1]");
    // Cut [0,1] at every boundary-level solution and at every breakpoint,
    // then keep cells mapping into Y and glue monotone neighbours.
    std::vector<Rational> cuts;
    cuts.push_back(Rational(0));
    cuts.push_back(Rational(1));
    for (const auto& p : g.points())
        cuts.push_back(p.x);
    for (const Rational& level : {Y.lo, Y.hi}) {
        PreimageResult pre = preimage_point(g, level);
        for (const auto& x : pre.points)
            cuts.push_back(x);
        for (const auto& iv : pre.plateaus) {
            cuts.push_back(iv.lo);
            cuts.push_back(iv.hi);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto classified = classify_breakpoints(g);
    auto is_type2 = [&](const Rational& x) {
        auto it = std::lower_bound(
            classified.begin(), classified.end(), x,
            [](const ClassifiedBreakpoint& cb, const Rational& v) { return cb.x < v; });
        return it != classified.end() && it->x == x &&
               it->kind == BreakpointKind::TypeII;
    };

    std::vector<Interval> pieces;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Rational mid = (cuts[i] + cuts[i + 1]) / Rational(2);
        Rational v = g.eval(mid);
        if (Y.lo <= v && v <= Y.hi)
            pieces.push_back(Interval(cuts[i], cuts[i + 1]));
    }
    // glue adjacent pieces unless the junction is a local extremum
    std::vector<Interval> legs;
    for (const auto& piece : pieces) {
        if (!legs.empty() && legs.back().hi == piece.lo && !is_type2(piece.lo))
            legs.back() = Interval(legs.back().lo, piece.hi);
        else
            legs.push_back(piece);
    }
    std::vector<Leg> out;
    for (const auto& leg : legs) {
        Rational va = g.eval(leg.lo);
        Rational vb = g.eval(leg.hi);
        bool onto = (va == Y.lo && vb == Y.hi) || (va == Y.hi && vb == Y.lo);
        out.push_back({leg, onto});
    }
    return out;
}

std::vector<ClassifiedBreakpoint> classify_breakpoints(const PAMap& g) {
    const auto& pts = g.points();
    std::vector<ClassifiedBreakpoint> out;
    out.push_back({pts.front().x, BreakpointKind::Endpoint});
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        int sl = g.slope(i - 1).sign();
        int sr = g.slope(i).sign();
        BreakpointKind kind =
            (sl == sr || sl == 0 || sr == 0) ? BreakpointKind::TypeI : BreakpointKind::TypeII;
        out.push_back({pts[i].x, kind});
    }
    out.push_back({pts.back().x, BreakpointKind::Endpoint});
    return out;
}

int count_type2(const PAMap& g) {
    int n = 0;
    for (const auto& cb : classify_breakpoints(g))
        if (cb.kind == BreakpointKind::TypeII)
            ++n;
    return n;
}

bool is_lambda_preserving(const PAMap& g) {
    if (!g.is_onto())
        throw std::domain_error("is_lambda_preserving: map is not onto [0,1]");
    // Bands between consecutive breakpoint images; on each band the fiber
    // structure is constant, so one midpoint per band decides exactly.
    std::vector<Rational> levels;
    for (const auto& p : g.points())
        levels.push_back(p.y);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        Rational mid = (levels[i] + levels[i + 1]) / Rational(2);
        Rational sum(0);
        const auto& pts = g.points();
        for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
            const Point& a = pts[s];
            const Point& b = pts[s + 1];
            if (a.y == b.y)
                continue;  // plateaus never preserve measure; they also can't cover a band
            Rational lo = a.y < b.y ? a.y : b.y;
            Rational hi = a.y < b.y ? b.y : a.y;
            if (lo < mid && mid < hi)
                sum += (b.x - a.x).abs() / (hi - lo);
        }
        if (sum != Rational(1))
            return false;
    }
    // plateaus are excluded from measure preservation outright
    const auto& pts = g.points();
    for (std::size_t s = 0; s + 1 < pts.size(); ++s)
        if (pts[s].y == pts[s + 1].y)
            return false;
    return true;
}

bool is_in_F(const PAMap& g) {
    const auto& pts = g.points();
    if (!(pts.front().y == Rational(0)) || !(pts.back().y == Rational(1)))
        return false;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i].y < pts[i + 1].y))
            return false;
        Rational s = g.slope(i);
        if (s.sign() <= 0 || !s.log2_exact())
            return false;
    }
    for (const auto& p : pts)
        if (!p.x.is_dyadic() || !p.y.is_dyadic())
            return false;
    return true;
}

bool is_in_G(const PAMap& g) {
    if (!g.is_onto())
        return false;
    const auto& pts = g.points();
    for (const auto& p : pts)
        if (!p.x.is_dyadic())
            return false;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Rational s = g.slope(i);
        if (s.is_zero() || !s.abs().log2_exact())
            return false;
    }
    if (!is_lambda_preserving(g))
        return false;
    // Dyadic x plus power-of-two slopes makes every y dyadic; assert anyway.
    for (const auto& p : pts)
        if (!p.y.is_dyadic())
            throw std::logic_error("is_in_G: dyadic propagation violated");
    return true;
}

Rational sup_distance(const PAMap& h1, const PAMap& h2) {
    // |h1-h2| is piecewise affine; its maximum sits on a breakpoint of either map.
    Rational best(0);
    for (const auto& p : h1.points()) {
        Rational d = (p.y - h2.eval(p.x)).abs();
        if (d > best)
            best = d;
    }
    for (const auto& p : h2.points()) {
        Rational d = (h1.eval(p.x) - p.y).abs();
        if (d > best)
            best = d;
    }
    return best;
}

}  // namespace gmap
