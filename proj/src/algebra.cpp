#include "gmap/algebra.hpp"

#include "gmap/basics.hpp"
#include "gmap/construct.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gmap {
namespace {

const Rational kZero(0);
const Rational kOne(1);

bool has_interior_breakpoint(const PAMap& g, const Interval& iv) {
    for (const auto& p : g.points())
        if (iv.lo < p.x && p.x < iv.hi)
            return true;
    return false;
}

struct AffineInfo {
    long exp;
    int sign;
};

/// Slope exponent and sign of g on an interval, which must be a single
/// affine piece with slope magnitude a power of two.
AffineInfo affine_info(const PAMap& g, const Interval& iv, const char* who) {
    if (!(iv.lo < iv.hi))
        throw std::invalid_argument(std::string(who) + ": empty leg");
    if (has_interior_breakpoint(g, iv))
        throw std::invalid_argument(std::string(who) + ": leg is not affine");
    Rational s = (g.eval(iv.hi) - g.eval(iv.lo)) / iv.length();
    if (s.is_zero())
        throw std::invalid_argument(std::string(who) + ": leg has slope 0");
    auto e = s.abs().log2_exact();
    if (!e)
        throw std::invalid_argument(std::string(who) +
                                    ": leg slope is not a power of two");
    return {*e, s.sign()};
}

struct RetargetPiece {
    Interval iv;
    long old_exp;
    long new_exp;
};

/// Increasing map in F that stretches each listed piece horizontally by
/// 2^(old_exp - new_exp) and has slope 1 in the gaps. The pieces must be
/// disjoint and the total stretched length must still be 1, i.e. the
/// caller's exponent changes must conserve length.
PAMap build_retarget(std::vector<RetargetPiece> pieces) {
    std::sort(pieces.begin(), pieces.end(),
              [](const RetargetPiece& a, const RetargetPiece& b) {
                  return a.iv.lo < b.iv.lo;
              });
    std::vector<Point> pts;
    pts.push_back({kZero, kZero});
    Rational x = kZero, y = kZero;
    for (const auto& p : pieces) {
        if (p.iv.lo < x)
            throw std::logic_error("build_retarget: overlapping pieces");
        if (p.iv.lo > x) {
            y += p.iv.lo - x;
            x = p.iv.lo;
            pts.push_back({x, y});
        }
        y += p.iv.length() * Rational::pow2(p.old_exp - p.new_exp);
        x = p.iv.hi;
        pts.push_back({x, y});
    }
    if (x < kOne) {
        y += kOne - x;
        pts.push_back({kOne, y});
    }
    if (y != kOne)
        throw std::logic_error("build_retarget: total length not conserved");
    return PAMap(std::move(pts));
}

/// Unique x in `run` (g monotone there) with g(x) = level.
Rational mono_solve(const PAMap& g, const Interval& run, const Rational& level,
                    const char* who) {
    const auto& pts = g.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Rational a = std::max(pts[i].x, run.lo);
        Rational b = std::min(pts[i + 1].x, run.hi);
        if (b < a)
            continue;
        Rational ya = g.eval(a), yb = g.eval(b);
        Rational lo = std::min(ya, yb), hi = std::max(ya, yb);
        if (level < lo || level > hi)
            continue;
        if (ya == yb)
            return a;
        return a + (level - ya) * (b - a) / (yb - ya);
    }
    throw std::logic_error(std::string(who) + ": level not attained on run");
}

/// Band boundaries of Y refined by every breakpoint level of g inside Y.
std::vector<Rational> band_cuts(const PAMap& g, const Interval& Y) {
    std::vector<Rational> cuts{Y.lo};
    std::vector<Rational> levels;
    for (const auto& p : g.points())
        levels.push_back(p.y);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (const auto& v : levels)
        if (Y.lo < v && v < Y.hi)
            cuts.push_back(v);
    cuts.push_back(Y.hi);
    return cuts;
}

/// n slope exponents summing to 1/2: {1} or {2, 3, ..., n, n}.
std::vector<long> half_exponents(std::size_t n) {
    if (n == 0)
        throw std::logic_error("half_exponents: no pieces");
    if (n == 1)
        return {1};
    std::vector<long> e;
    for (long t = 2; t <= (long)n; ++t)
        e.push_back(t);
    e.push_back((long)n);
    return e;
}

/// n slope exponents summing to T (a dyadic total < 1): the binary
/// expansion of T padded by splitting the largest pieces.
std::vector<long> dyadic_split(const Rational& T, std::size_t n) {
    std::multiset<long> e;
    Rational rem = T;
    for (long k = 1; !rem.is_zero(); ++k) {
        if (k > 4096)
            throw std::logic_error("dyadic_split: not dyadic");
        if (rem >= Rational::pow2(-k)) {
            e.insert(k);
            rem -= Rational::pow2(-k);
        }
    }
    if (e.size() > n)
        throw std::logic_error("dyadic_split: too few pieces");
    while (e.size() < n) {
        long small = *e.begin();
        e.erase(e.begin());
        e.insert(small + 1);
        e.insert(small + 1);
    }
    return std::vector<long>(e.begin(), e.end());
}

/// Replace the part of g over the x-interval I by the given points
/// (including the values at I's endpoints); everything outside I stays.
PAMap splice(const PAMap& g, const Interval& I, const std::vector<Point>& inner) {
    std::vector<Point> pts;
    for (const auto& p : g.points())
        if (p.x < I.lo)
            pts.push_back(p);
    for (const auto& p : inner)
        pts.push_back(p);
    for (const auto& p : g.points())
        if (p.x > I.hi)
            pts.push_back(p);
    return PAMap(std::move(pts));
}

/// Increasing map in F sending each source block affinely (or with one
/// power-of-two split point) onto the matching destination block.
PAMap block_map(const std::vector<std::pair<Interval, Interval>>& blocks) {
    std::vector<Point> pts;
    pts.push_back({kZero, kZero});
    for (const auto& [src, dst] : blocks) {
        Rational ratio = dst.length() / src.length();
        bool pow2 = false;
        if (ratio.sign() > 0) {
            try {
                pow2 = ratio.log2_exact().has_value();
            } catch (const std::domain_error&) {
                pow2 = false;
            }
        }
        if (!pow2) {
            if (ratio >= kOne) {
                pts.push_back(partition_point({src.lo, dst.lo}, {src.hi, dst.hi}));
            } else {
                Point t = partition_point({dst.lo, src.lo}, {dst.hi, src.hi});
                pts.push_back({t.y, t.x});
            }
        }
        pts.push_back({src.hi, dst.hi});
    }
    return PAMap(std::move(pts));
}

/// f in F with D . f = w, given matched branch lists (w monotone on
/// wbr[i], D monotone on dbr[i], same direction, same image).
PAMap solve_right_factor(const PAMap& w, const PAMap& D,
                         const std::vector<Interval>& wbr,
                         const std::vector<Interval>& dbr) {
    if (wbr.size() != dbr.size())
        throw std::logic_error("solve_right_factor: branch count mismatch");
    std::vector<Point> pts;
    for (std::size_t i = 0; i < wbr.size(); ++i) {
        const Interval& A = wbr[i];
        const Interval& B = dbr[i];
        std::vector<Rational> xs{A.lo, A.hi};
        for (const auto& p : w.points())
            if (A.lo < p.x && p.x < A.hi)
                xs.push_back(p.x);
        for (const auto& p : D.points())
            if (B.lo < p.x && p.x < B.hi)
                xs.push_back(mono_solve(w, A, D.eval(p.x), "solve_right_factor"));
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        for (const auto& x : xs) {
            Rational y = mono_solve(D, B, w.eval(x), "solve_right_factor");
            if (!pts.empty() && pts.back().x == x)
                continue;
            pts.push_back({x, y});
        }
    }
    PAMap f(std::move(pts));
    if (!is_in_F(f))
        throw std::logic_error("solve_right_factor: factor not in F");
    if (compose(D, f) != w)
        throw std::logic_error("solve_right_factor: recomposition mismatch");
    return f;
}

/// Exponents (1, 2, ..., m-1, m-1): the canonical leg pattern used while
/// rewriting windows into the basic ones.
std::vector<long> canonical_exponents(std::size_t m) {
    if (m == 1)
        return {0};
    std::vector<long> q;
    for (long i = 1; i + 1 <= (long)m; ++i)
        q.push_back(i);
    q.push_back((long)m - 1);
    return q;
}

/// f in F with w_{J,e} = w_{J,q} . f: maps the e-partition of J legwise
/// onto the q-partition, identity outside J.
PAMap leg_remap(const Interval& J, const std::vector<long>& e,
                const std::vector<long>& q) {
    std::vector<Point> pts;
    if (J.lo > kZero)
        pts.push_back({kZero, kZero});
    Rational xe = J.lo, xq = J.lo;
    pts.push_back({xe, xq});
    for (std::size_t i = 0; i < e.size(); ++i) {
        xe += J.length() * Rational::pow2(-e[i]);
        xq += J.length() * Rational::pow2(-q[i]);
        pts.push_back({xe, xq});
    }
    if (J.hi < kOne)
        pts.push_back({kOne, kOne});
    return PAMap(std::move(pts));
}

PAMap factors_to_map(const std::vector<Factor>& fs) {
    PAMap acc = PAMap::identity();
    for (const auto& f : fs)
        acc = compose(acc, f.to_map());
    return acc;
}

std::vector<Factor> normalize_window(const Interval& J, const std::vector<long>& q,
                                     bool rising);

std::vector<Factor> normalize_window_impl(const Interval& J,
                                          const std::vector<long>& q, bool rising) {
    const PAMap w = make_window({J, q, rising});
    const std::size_t m = q.size();
    if (m == 1)
        return {};

    const std::vector<long> qc = canonical_exponents(m);
    if (q != qc) {
        // w_{J,q} = w_{J,qc} . f with f remapping leg widths.
        PAMap f = leg_remap(J, q, qc);
        PAMap wc = make_window({J, qc, rising});
        if (compose(wc, f) != w)
            throw std::logic_error("normalize_window: leg remap mismatch");
        auto out = normalize_window(J, qc, rising);
        out.push_back(Factor::fmap(f));
        return out;
    }

    if (!rising) {
        if (m == 2 && J.lo == kZero && J.hi == kOne) {
            // falling tent = g0- . tent
            return {Factor::basic(FactorKind::G0Minus),
                    Factor::basic(FactorKind::W2Full)};
        }
        // mirror through g0-: a falling window on J is a rising window on
        // the reflected interval conjugated by the reflection.
        Interval Jm(kOne - J.hi, kOne - J.lo);
        std::vector<long> qr(q.rbegin(), q.rend());
        PAMap wm = make_window({Jm, qr, true});
        if (compose(compose(g0_minus(), wm), g0_minus()) != w)
            throw std::logic_error("normalize_window: mirror mismatch");
        std::vector<Factor> out{Factor::basic(FactorKind::G0Minus)};
        auto mid = normalize_window(Jm, qr, true);
        out.insert(out.end(), mid.begin(), mid.end());
        out.push_back(Factor::basic(FactorKind::G0Minus));
        return out;
    }

    if (m == 2) {
        if (J.lo == kZero && J.hi == kOne)
            return {Factor::basic(FactorKind::W2Full)};
        if (J == Interval(Rational(3, 4), kOne))
            return {Factor::basic(FactorKind::W2RightQuarter)};
        if (J.hi != kOne)
            throw std::logic_error("normalize_window: rising 2-fold not right-edge");
        // scale the right-quarter 2-fold onto J: w = f1 . w2q . f23
        PAMap f1 = block_map({{Interval(kZero, Rational(3, 4)), Interval(kZero, J.lo)},
                              {Interval(Rational(3, 4), kOne), J}});
        PAMap D = compose(f1, w2_right_quarter());
        Rational mid = (J.lo + kOne) / 2;
        std::vector<Interval> wbr{{kZero, J.lo}, {J.lo, mid}, {mid, kOne}};
        std::vector<Interval> dbr{{kZero, Rational(3, 4)},
                                  {Rational(3, 4), Rational(7, 8)},
                                  {Rational(7, 8), kOne}};
        PAMap f23 = solve_right_factor(w, D, wbr, dbr);
        return {Factor::fmap(f1), Factor::basic(FactorKind::W2RightQuarter),
                Factor::fmap(f23)};
    }

    if (m == 3) {
        if (J == Interval(Rational(1, 4), Rational(1, 2)))
            return {Factor::basic(FactorKind::BasicW3)};
        if (J.hi == kOne) {
            // right-edge 3-fold = two nested right-edge 2-folds
            Interval Jh((J.lo + kOne) / 2, kOne);
            PAMap wa = make_window({J, {1, 1}, true});
            PAMap wb = make_window({Jh, {1, 1}, true});
            if (compose(wa, wb) != w)
                throw std::logic_error("normalize_window: right-edge 3-fold mismatch");
            auto out = normalize_window(J, {1, 1}, true);
            auto tail = normalize_window(Jh, {1, 1}, true);
            out.insert(out.end(), tail.begin(), tail.end());
            return out;
        }
        if (J.lo == kZero) {
            // left-edge: mirror to a right-edge window
            Interval Jm(kOne - J.hi, kOne);
            std::vector<long> qr(q.rbegin(), q.rend());
            PAMap wm = make_window({Jm, qr, true});
            if (compose(compose(g0_minus(), wm), g0_minus()) != w)
                throw std::logic_error("normalize_window: left-edge mirror mismatch");
            std::vector<Factor> out{Factor::basic(FactorKind::G0Minus)};
            auto mid = normalize_window(Jm, qr, true);
            out.insert(out.end(), mid.begin(), mid.end());
            out.push_back(Factor::basic(FactorKind::G0Minus));
            return out;
        }
        // interior: conjugate the basic 3-fold onto J: w = f1 . w3 . f23
        PAMap f1 = block_map({{Interval(kZero, Rational(1, 4)), Interval(kZero, J.lo)},
                              {Interval(Rational(1, 4), Rational(1, 2)), J},
                              {Interval(Rational(1, 2), kOne), Interval(J.hi, kOne)}});
        PAMap D = compose(f1, w3_basic());
        Rational len = J.length();
        Rational c1 = J.lo + len / 2, c2 = J.lo + len * Rational(3, 4);
        std::vector<Interval> wbr{{kZero, J.lo}, {J.lo, c1}, {c1, c2}, {c2, J.hi},
                                  {J.hi, kOne}};
        std::vector<Interval> dbr{{kZero, Rational(1, 4)},
                                  {Rational(1, 4), Rational(3, 8)},
                                  {Rational(3, 8), Rational(7, 16)},
                                  {Rational(7, 16), Rational(1, 2)},
                                  {Rational(1, 2), kOne}};
        PAMap f23 = solve_right_factor(w, D, wbr, dbr);
        return {Factor::fmap(f1), Factor::basic(FactorKind::BasicW3),
                Factor::fmap(f23)};
    }

    // m >= 4: peel a 3-fold off the last leg
    std::vector<long> qf = canonical_exponents(m - 2);
    Interval Jlast(J.hi - J.length() * Rational::pow2(-(long)(m - 3)), J.hi);
    PAMap wf = make_window({J, qf, rising});
    PAMap ws = make_window({Jlast, {1, 2, 2}, true});
    if (compose(wf, ws) != w)
        throw std::logic_error("normalize_window: leg-count recursion mismatch");
    auto out = normalize_window(J, qf, rising);
    auto tail = normalize_window(Jlast, {1, 2, 2}, true);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

std::vector<Factor> normalize_window(const Interval& J, const std::vector<long>& q,
                                     bool rising) {
    auto out = normalize_window_impl(J, q, rising);
    if (factors_to_map(out) != make_window({J, q, rising}))
        throw std::logic_error("normalize_window: factors do not recompose");
    return out;
}

Interval sorted_interval(const Rational& a, const Rational& b) {
    return a <= b ? Interval(a, b) : Interval(b, a);
}

}  // namespace

// ---------------------------------------------------------------------------
// Factor / DecompositionWord
// ---------------------------------------------------------------------------

Factor Factor::basic(FactorKind k) {
    Factor f;
    f.kind = k;
    return f;
}

Factor Factor::fmap(PAMap m) {
    Factor f;
    f.kind = FactorKind::FMap;
    f.map = std::move(m);
    return f;
}

Factor Factor::fword(GenWord w) {
    Factor f;
    f.kind = FactorKind::FWord;
    f.word = std::move(w);
    return f;
}

PAMap Factor::to_map() const {
    switch (kind) {
        case FactorKind::G0Plus: return g0_plus();
        case FactorKind::G0Minus: return g0_minus();
        case FactorKind::BasicW3: return w3_basic();
        case FactorKind::W2RightQuarter: return w2_right_quarter();
        case FactorKind::W2Full: return tent();
        case FactorKind::FMap: return map;
        case FactorKind::FWord: return generator_word_to_map(word);
    }
    throw std::logic_error("Factor::to_map: bad kind");
}

Factor Factor::expanded() const {
    if (kind != FactorKind::FMap)
        return *this;
    return fword(f_to_generator_word(map));
}

bool Factor::operator==(const Factor& o) const {
    if (kind != o.kind)
        return false;
    if (kind == FactorKind::FMap)
        return map == o.map;
    if (kind == FactorKind::FWord)
        return word == o.word;
    return true;
}

PAMap DecompositionWord::recompose(std::size_t budget) const {
    PAMap acc = PAMap::identity();
    for (const auto& f : factors)
        acc = compose(acc, f.to_map(), budget);
    return acc;
}

std::string DecompositionWord::to_text() const {
    std::ostringstream os;
    os << "gword/1\n";
    for (const auto& f : factors) {
        switch (f.kind) {
            case FactorKind::G0Plus: os << "g0+\n"; break;
            case FactorKind::G0Minus: os << "g0-\n"; break;
            case FactorKind::BasicW3: os << "w3bar\n"; break;
            case FactorKind::W2RightQuarter: os << "w2q\n"; break;
            case FactorKind::W2Full: os << "w2full\n"; break;
            case FactorKind::FWord: {
                os << "fword ";
                for (int c : f.word)
                    os << (c == 1 ? 'A' : c == -1 ? 'a' : c == 2 ? 'B' : 'b');
                os << "\n";
                break;
            }
            case FactorKind::FMap:
                os << "fmap\n" << f.map.to_text() << "end\n";
                break;
        }
    }
    return os.str();
}

DecompositionWord DecompositionWord::parse_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "gword/1")
        throw std::invalid_argument("DecompositionWord: bad header");
    DecompositionWord out;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        if (line == "g0+")
            out.factors.push_back(Factor::basic(FactorKind::G0Plus));
        else if (line == "g0-")
            out.factors.push_back(Factor::basic(FactorKind::G0Minus));
        else if (line == "w3bar")
            out.factors.push_back(Factor::basic(FactorKind::BasicW3));
        else if (line == "w2q")
            out.factors.push_back(Factor::basic(FactorKind::W2RightQuarter));
        else if (line == "w2full")
            out.factors.push_back(Factor::basic(FactorKind::W2Full));
        else if (line.rfind("fword", 0) == 0) {
            GenWord w;
            for (char c : line.substr(5)) {
                if (c == ' ')
                    continue;
                else if (c == 'A')
                    w.push_back(1);
                else if (c == 'a')
                    w.push_back(-1);
                else if (c == 'B')
                    w.push_back(2);
                else if (c == 'b')
                    w.push_back(-2);
                else
                    throw std::invalid_argument("DecompositionWord: bad letter");
            }
            out.factors.push_back(Factor::fword(std::move(w)));
        } else if (line == "fmap") {
            std::string body;
            while (std::getline(is, line) && line != "end")
                body += line + "\n";
            if (line != "end")
                throw std::invalid_argument("DecompositionWord: unterminated fmap");
            out.factors.push_back(Factor::fmap(PAMap::parse_text(body)));
        } else {
            throw std::invalid_argument("DecompositionWord: unknown factor '" +
                                        line + "'");
        }
    }
    return out;
}

std::string CharSeq::str() const {
    std::ostringstream os;
    os << (sign < 0 ? '-' : '+');
    for (std::size_t i = 0; i < indices.size(); ++i)
        os << (i ? "," : "") << indices[i];
    os << " bands=" << band_count;
    return os.str();
}

// ---------------------------------------------------------------------------
// Slope rewriting
// ---------------------------------------------------------------------------

std::pair<PAMap, PAMap> rebalance_slopes(const PAMap& g,
                                         const std::vector<Interval>& legs,
                                         const std::vector<long>& new_exponents) {
    if (legs.empty() || legs.size() != new_exponents.size())
        throw std::invalid_argument("rebalance_slopes: leg/exponent count mismatch");
    Interval Y;
    Rational sum_old = kZero, sum_new = kZero;
    std::vector<RetargetPiece> pieces;
    for (std::size_t i = 0; i < legs.size(); ++i) {
        AffineInfo info = affine_info(g, legs[i], "rebalance_slopes");
        Interval Yi = sorted_interval(g.eval(legs[i].lo), g.eval(legs[i].hi));
        if (i == 0)
            Y = Yi;
        else if (!(Yi == Y))
            throw std::invalid_argument("rebalance_slopes: legs have different images");
        if (new_exponents[i] < 0)
            throw std::invalid_argument("rebalance_slopes: negative exponent");
        sum_old += Rational::pow2(-info.exp);
        sum_new += Rational::pow2(-new_exponents[i]);
        if (info.exp != new_exponents[i])
            pieces.push_back({legs[i], info.exp, new_exponents[i]});
    }
    if (sum_old != sum_new)
        throw std::invalid_argument("rebalance_slopes: exponent sums differ");
    PAMap f1 = build_retarget(std::move(pieces));
    PAMap g1 = compose(g, f1.inverse());
    if (compose(g1, f1) != g)
        throw std::logic_error("rebalance_slopes: recomposition mismatch");
    return {g1, f1};
}

std::pair<PAMap, PAMap> eliminate_type1_in_band(const PAMap& g, const Interval& Y) {
    if (!(Y.lo < Y.hi))
        throw std::invalid_argument("eliminate_type1_in_band: empty band");
    auto legs = preimage_interval(g, Y);
    if (legs.empty())
        throw std::invalid_argument("eliminate_type1_in_band: band not attained");
    for (const auto& leg : legs)
        if (!leg.onto)
            throw std::invalid_argument(
                "eliminate_type1_in_band: a fiber leaves the band sideways");
    const std::size_t m = legs.size();
    std::vector<long> target(m);
    if (m == 1) {
        target[0] = 0;
    } else {
        for (std::size_t i = 0; i + 1 < m; ++i)
            target[i] = (long)i + 1;
        target[m - 1] = (long)m - 1;
    }

    auto cuts = band_cuts(g, Y);
    std::vector<RetargetPiece> pieces;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        Interval S(cuts[j], cuts[j + 1]);
        for (std::size_t i = 0; i < m; ++i) {
            Rational xa = mono_solve(g, legs[i].iv, S.lo, "eliminate_type1_in_band");
            Rational xb = mono_solve(g, legs[i].iv, S.hi, "eliminate_type1_in_band");
            Interval piece = sorted_interval(xa, xb);
            AffineInfo info = affine_info(g, piece, "eliminate_type1_in_band");
            if (info.exp != target[i])
                pieces.push_back({piece, info.exp, target[i]});
        }
    }
    PAMap f1 = build_retarget(std::move(pieces));
    PAMap g1 = compose(g, f1.inverse());
    if (compose(g1, f1) != g)
        throw std::logic_error("eliminate_type1_in_band: recomposition mismatch");
    for (const auto& leg : legs) {
        Interval nl = sorted_interval(f1.eval(leg.iv.lo), f1.eval(leg.iv.hi));
        affine_info(g1, nl, "eliminate_type1_in_band (result)");
    }
    return {g1, f1};
}

std::pair<PAMap, PAMap> normalize_partial_band(const PAMap& g,
                                               const std::vector<Interval>& legs) {
    if (legs.empty())
        throw std::invalid_argument("normalize_partial_band: no legs");
    Interval Y;
    std::vector<long> k(legs.size());
    for (std::size_t i = 0; i < legs.size(); ++i) {
        AffineInfo info = affine_info(g, legs[i], "normalize_partial_band");
        Interval Yi = sorted_interval(g.eval(legs[i].lo), g.eval(legs[i].hi));
        if (i == 0)
            Y = Yi;
        else if (!(Yi == Y))
            throw std::invalid_argument(
                "normalize_partial_band: legs have different images");
        k[i] = info.exp;
    }
    const std::vector<long> orig = k;

    // Halve-and-merge until the leg lengths sum to a single power of two.
    auto total = [&] {
        Rational s = kZero;
        for (long e : k)
            s += Rational::pow2(-e);
        return s;
    };
    auto pick_subset = [&](const std::vector<std::size_t>& cand, Rational want) {
        // Greedy largest-first; exact because the values are powers of two.
        std::vector<std::size_t> order = cand;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return k[a] < k[b]; });
        std::vector<std::size_t> out;
        Rational acc = kZero;
        for (std::size_t i : order) {
            Rational v = Rational::pow2(-k[i]);
            if (acc + v <= want) {
                acc += v;
                out.push_back(i);
                if (acc == want)
                    return out;
            }
        }
        throw std::logic_error("normalize_partial_band: no exact subset");
    };
    bool changed = false;
    for (int guard = 0;; ++guard) {
        if (guard > 10000)
            throw std::logic_error("normalize_partial_band: no convergence");
        Rational S = total();
        if (S >= kOne)
            throw std::invalid_argument("normalize_partial_band: legs fill the band");
        long K = (long)S.dyadic_exponent();
        if (S.num() == 1)
            break;
        std::vector<std::size_t> cand1, cand2;
        for (std::size_t i = 0; i < k.size(); ++i)
            cand1.push_back(i);
        auto phi1 = pick_subset(cand1, Rational::pow2(-K));
        std::vector<bool> in1(k.size(), false);
        for (std::size_t i : phi1)
            in1[i] = true;
        Rational rem = S - Rational::pow2(-K);
        long K2 = (long)rem.dyadic_exponent();
        for (std::size_t i = 0; i < k.size(); ++i)
            if (!in1[i])
                cand2.push_back(i);
        auto phi2 = pick_subset(cand2, Rational::pow2(-K2));
        for (std::size_t i : phi1)
            k[i] += K2 + 1 - K;
        for (std::size_t i : phi2)
            k[i] += 1;
        changed = true;
    }
    if (!changed)
        return {g, PAMap::identity()};

    const long Kfin = (long)total().dyadic_exponent();

    std::vector<RetargetPiece> pieces;
    for (std::size_t i = 0; i < legs.size(); ++i)
        if (orig[i] != k[i])
            pieces.push_back({legs[i], orig[i], k[i]});

    // The complement pieces of every fiber must absorb the freed length:
    // retarget them, sub-band by sub-band, to exponents summing to
    // 1 - 2^-Kfin.
    auto cuts = band_cuts(g, Y);
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        Interval S(cuts[j], cuts[j + 1]);
        auto fibs = preimage_interval(g, S);
        std::vector<std::pair<Interval, long>> outs;
        for (const auto& fib : fibs) {
            if (!fib.onto)
                throw std::invalid_argument(
                    "normalize_partial_band: partial fiber in the band");
            bool inside = false;
            for (const auto& leg : legs)
                if (leg.lo <= fib.iv.lo && fib.iv.hi <= leg.hi) {
                    inside = true;
                    break;
                }
            if (inside)
                continue;
            AffineInfo info = affine_info(g, fib.iv, "normalize_partial_band");
            outs.push_back({fib.iv, info.exp});
        }
        if (outs.empty())
            throw std::invalid_argument(
                "normalize_partial_band: a fiber stays inside the legs");
        auto target = dyadic_split(kOne - Rational::pow2(-Kfin), outs.size());
        for (std::size_t i = 0; i < outs.size(); ++i)
            if (outs[i].second != target[i])
                pieces.push_back({outs[i].first, outs[i].second, target[i]});
    }

    PAMap f1 = build_retarget(std::move(pieces));
    PAMap g1 = compose(g, f1.inverse());
    if (compose(g1, f1) != g)
        throw std::logic_error("normalize_partial_band: recomposition mismatch");
    return {g1, f1};
}

std::pair<PAMap, PAMap> factor_out_window(const PAMap& g, const Interval& I) {
    if (!(I.lo < I.hi) || I.lo < kZero || I.hi > kOne)
        throw std::invalid_argument("factor_out_window: bad interval");
    std::vector<Rational> xs{I.lo};
    for (const auto& p : g.points())
        if (I.lo < p.x && p.x < I.hi)
            xs.push_back(p.x);
    xs.push_back(I.hi);
    const std::size_t m = xs.size() - 1;
    if (m == 1)
        return {g, PAMap::identity()};

    Interval Y;
    std::vector<long> q(m);
    long K = 0;
    for (std::size_t i = 0; i < m; ++i) {
        Interval leg(xs[i], xs[i + 1]);
        AffineInfo info = affine_info(g, leg, "factor_out_window");
        Interval Yi = sorted_interval(g.eval(leg.lo), g.eval(leg.hi));
        if (i == 0)
            Y = Yi;
        else if (!(Yi == Y))
            throw std::invalid_argument("factor_out_window: legs have different images");
        auto qi = (I.length() / leg.length()).log2_exact();
        if (!qi || *qi < 0)
            throw std::invalid_argument(
                "factor_out_window: leg width is not a binary fraction of the window");
        q[i] = *qi;
        if (i == 0)
            K = info.exp - q[i];
        else if (info.exp - q[i] != K)
            throw std::invalid_argument("factor_out_window: leg slopes inconsistent");
        if (i > 0) {
            AffineInfo prev = affine_info(g, {xs[i - 1], xs[i]}, "factor_out_window");
            if (prev.sign == info.sign)
                throw std::invalid_argument("factor_out_window: legs do not alternate");
        }
    }

    // Candidate straightened values at the window's endpoints.
    std::vector<std::pair<Rational, Rational>> cand;
    Rational glo = g.eval(I.lo), ghi = g.eval(I.hi);
    if (glo != ghi)
        cand.push_back({glo, ghi});
    auto other = [&](const Rational& v) { return v == Y.lo ? Y.hi : Y.lo; };
    if (I.lo == kZero)
        cand.push_back({other(ghi), ghi});
    if (I.hi == kOne)
        cand.push_back({glo, other(glo)});
    for (const auto& [vlo, vhi] : cand) {
        Rational rise = vhi - vlo;
        if (rise.is_zero())
            continue;
        auto e = (rise.abs() / I.length()).log2_exact();
        if (!e || *e != K)
            continue;
        PAMap g1 = splice(g, I, {{I.lo, vlo}, {I.hi, vhi}});
        for (bool rising : {true, false}) {
            PAMap w1;
            try {
                w1 = make_window({I, q, rising});
            } catch (const std::invalid_argument&) {
                continue;
            }
            if (compose(g1, w1) == g)
                return {g1, w1};
        }
    }
    throw std::invalid_argument("factor_out_window: not a window over the interval");
}

// ---------------------------------------------------------------------------
// Decomposition into basic maps
// ---------------------------------------------------------------------------

DecompositionWord decompose(const PAMap& g) {
    if (!is_in_G(g))
        throw std::invalid_argument("decompose: map is not measure preserving");

    PAMap cur = g;
    std::vector<Factor> out;
    int guard = 0;
    while (true) {
        if (++guard > 4096)
            throw std::logic_error("decompose: no progress");
        if (cur == PAMap::identity())
            break;
        if (cur == PAMap::reflection()) {
            out.insert(out.begin(), Factor::basic(FactorKind::G0Minus));
            break;
        }

        // Walk the junction breakpoints and find the first failure of the
        // strict nesting pattern; that pinpoints a window to peel off.
        std::vector<Point> A;
        A.push_back(cur.points().front());
        for (const auto& cb : classify_breakpoints(cur))
            if (cb.kind == BreakpointKind::TypeII)
                A.push_back({cb.x, cur.eval(cb.x)});
        A.push_back(cur.points().back());
        const std::size_t n = A.size() - 1;
        if (n < 2)
            throw std::logic_error("decompose: monotone map is not reduced");
        const int sigma = cur.slope(0).sign();
        auto u = [&](std::size_t i) { return A[i].y * sigma; };

        std::size_t kv = 0;
        for (std::size_t kk = 2; kk <= n; ++kk) {
            bool odd = (kk % 2) == 1;
            if (odd ? (u(kk) >= u(kk - 2)) : (u(kk) <= u(kk - 2))) {
                kv = kk;
                break;
            }
        }

        Interval I, Y;
        std::size_t m;
        auto run = [&](std::size_t i) { return Interval(A[i].x, A[i + 1].x); };
        if (kv == 2) {
            Rational bx = mono_solve(cur, run(1), A[0].y, "decompose");
            I = Interval(kZero, bx);
            Y = sorted_interval(A[0].y, A[1].y);
            m = 2;
        } else if (kv >= 3) {
            Rational bax = mono_solve(cur, run(kv - 3), A[kv - 1].y, "decompose");
            Rational bbx = mono_solve(cur, run(kv - 1), A[kv - 2].y, "decompose");
            I = Interval(bax, bbx);
            Y = sorted_interval(A[kv - 2].y, A[kv - 1].y);
            m = 3;
        } else {
            Rational bax = mono_solve(cur, run(n - 2), A[n].y, "decompose");
            I = Interval(bax, kOne);
            Y = sorted_interval(A[n - 1].y, A[n].y);
            m = 2;
        }

        // Straighten the fibers of Y so the window legs carry canonical
        // slopes and the complement pieces sum to half of each sub-band.
        const std::vector<long> q =
            (m == 2) ? std::vector<long>{1, 1} : std::vector<long>{1, 2, 2};
        auto cuts = band_cuts(cur, Y);
        std::vector<long> Ks(cuts.size() - 1, 0);
        std::vector<RetargetPiece> pieces;
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            Interval S(cuts[j], cuts[j + 1]);
            auto fibs = preimage_interval(cur, S);
            std::vector<std::pair<Interval, long>> ins, outs;
            for (const auto& fib : fibs) {
                if (!fib.onto)
                    throw std::logic_error("decompose: partial fiber in a sub-band");
                AffineInfo info = affine_info(cur, fib.iv, "decompose");
                if (I.lo <= fib.iv.lo && fib.iv.hi <= I.hi)
                    ins.push_back({fib.iv, info.exp});
                else if (fib.iv.hi <= I.lo || I.hi <= fib.iv.lo)
                    outs.push_back({fib.iv, info.exp});
                else
                    throw std::logic_error("decompose: fiber straddles the window");
            }
            if (ins.size() != m)
                throw std::logic_error("decompose: unexpected window fiber count");
            Ks[j] = outs.empty() ? 0 : 1;
            for (std::size_t i = 0; i < m; ++i)
                if (ins[i].second != q[i] + Ks[j])
                    pieces.push_back({ins[i].first, ins[i].second, q[i] + Ks[j]});
            if (!outs.empty()) {
                auto target = half_exponents(outs.size());
                for (std::size_t i = 0; i < outs.size(); ++i)
                    if (outs[i].second != target[i])
                        pieces.push_back({outs[i].first, outs[i].second, target[i]});
            }
        }
        PAMap f1 = build_retarget(std::move(pieces));
        PAMap cur2 = compose(cur, f1.inverse());
        if (compose(cur2, f1) != cur)
            throw std::logic_error("decompose: straightening mismatch");

        // Replace the window by an affine profile and peel the window off.
        Interval Iw(f1.eval(I.lo), f1.eval(I.hi));
        Rational a0 = cur2.eval(Iw.lo), a1 = cur2.eval(Iw.hi);
        std::vector<bool> dirs;
        if (a0 != a1)
            dirs = {a1 > a0};
        else if (Iw.lo == kZero && Iw.hi == kOne)
            dirs = {true, false};
        else if (Iw.lo == kZero)
            dirs = {a1 == Y.hi};
        else if (Iw.hi == kOne)
            dirs = {a0 == Y.lo};
        else
            throw std::logic_error("decompose: interior window with flat profile");

        bool peeled = false;
        PAMap cur3;
        bool w1_rising = true;
        for (bool dir : dirs) {
            std::vector<Point> prof;
            Rational x = Iw.lo;
            prof.push_back({x, dir ? Y.lo : Y.hi});
            if (dir) {
                for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
                    x += (cuts[j + 1] - cuts[j]) * Rational::pow2(-Ks[j]);
                    prof.push_back({x, cuts[j + 1]});
                }
            } else {
                for (std::size_t j = cuts.size() - 1; j-- > 0;) {
                    x += (cuts[j + 1] - cuts[j]) * Rational::pow2(-Ks[j]);
                    prof.push_back({x, cuts[j]});
                }
            }
            if (x != Iw.hi)
                throw std::logic_error("decompose: profile width mismatch");
            PAMap cand = splice(cur2, Iw, prof);
            for (bool rising : {true, false}) {
                PAMap w1;
                try {
                    w1 = make_window({Iw, q, rising});
                } catch (const std::invalid_argument&) {
                    continue;
                }
                if (compose(cand, w1) == cur2) {
                    cur3 = cand;
                    w1_rising = rising;
                    peeled = true;
                    break;
                }
            }
            if (peeled)
                break;
        }
        if (!peeled)
            throw std::logic_error("decompose: window peel failed");
        if (count_type2(cur3) >= count_type2(cur))
            throw std::logic_error("decompose: junction count did not drop");

        std::vector<Factor> chunk = normalize_window(Iw, q, w1_rising);
        if (f1 != PAMap::identity())
            chunk.push_back(Factor::fmap(f1));
        out.insert(out.begin(), chunk.begin(), chunk.end());
        cur = cur3;
    }

    // Drop identity factors and cancel adjacent reflections.
    for (bool again = true; again;) {
        again = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i].kind == FactorKind::G0Plus ||
                (out[i].kind == FactorKind::FMap && out[i].map == PAMap::identity())) {
                out.erase(out.begin() + i);
                again = true;
                break;
            }
            if (i + 1 < out.size() && out[i].kind == FactorKind::G0Minus &&
                out[i + 1].kind == FactorKind::G0Minus) {
                out.erase(out.begin() + i, out.begin() + i + 2);
                again = true;
                break;
            }
        }
    }

    DecompositionWord w{std::move(out)};
    if (w.recompose() != g)
        throw std::logic_error("decompose: recomposition mismatch");
    return w;
}

// ---------------------------------------------------------------------------
// Words over the two Thompson generators
// ---------------------------------------------------------------------------

namespace {

bool is_integer(const Rational& r) { return r.den() == 1; }

/// [a,b] equals [j 2^-k, (j+1) 2^-k] for integers j, k >= 0.
bool is_standard(const Rational& a, const Rational& b) {
    Rational len = b - a;
    if (len.sign() <= 0)
        return false;
    auto e = len.log2_exact();
    if (!e || *e > 0)
        return false;
    return is_integer(a / len);
}

/// The dyadic point in (a,b) with the smallest exponent.
Rational coarsest_cut(const Rational& a, const Rational& b) {
    for (long k = 0; k <= 4096; ++k) {
        Rational step = Rational::pow2(-k);
        Rational q = a / step;
        Rational c = (Rational(q.num() / q.den()) + 1) * step;
        if (c > a && c < b)
            return c;
    }
    throw std::logic_error("coarsest_cut: not found");
}

/// Number of tree vertices hanging on the left arm above the leaf
/// [lo, lo+w) whose subtree does not reach the right edge of [0,1].
unsigned leaf_exponent(const Rational& lo, const Rational& w_leaf) {
    unsigned c = 0;
    for (Rational w = w_leaf * 2; w <= kOne; w += w) {
        if (!is_integer(lo / w))
            break;
        if (lo + w >= kOne)
            break;
        ++c;
    }
    return c;
}

GenWord x_generator(std::size_t i, bool alt) {
    if (i == 0)
        return {1};
    GenWord w;
    long c = (long)i - 1;
    int outer = alt ? 1 : -1;
    for (long t = 0; t < c; ++t)
        w.push_back(outer);
    w.push_back(2);
    for (long t = 0; t < c; ++t)
        w.push_back(-outer);
    return w;
}

GenWord inverse_word(const GenWord& w) {
    GenWord r(w.rbegin(), w.rend());
    for (int& c : r)
        c = -c;
    return r;
}

GenWord assemble_word(const std::vector<unsigned>& pos,
                      const std::vector<unsigned>& neg, bool alt) {
    GenWord w;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        GenWord xi = x_generator(i, alt);
        for (unsigned t = 0; t < pos[i]; ++t)
            w.insert(w.end(), xi.begin(), xi.end());
    }
    for (std::size_t i = neg.size(); i-- > 0;) {
        GenWord xi = inverse_word(x_generator(i, alt));
        for (unsigned t = 0; t < neg[i]; ++t)
            w.insert(w.end(), xi.begin(), xi.end());
    }
    return w;
}

}  // namespace

GenWord f_to_generator_word(const PAMap& f) {
    if (!is_in_F(f))
        throw std::invalid_argument("f_to_generator_word: map is not in F");
    if (f == PAMap::identity())
        return {};

    // Refine the breakpoints until every piece is a standard dyadic
    // interval mapped onto a standard dyadic interval.
    std::vector<Rational> P;
    {
        std::deque<std::pair<Rational, Rational>> queue;
        const auto& pts = f.points();
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            queue.push_back({pts[i].x, pts[i + 1].x});
        for (const auto& p : pts)
            P.push_back(p.x);
        int fuel = 1 << 20;
        while (!queue.empty()) {
            if (--fuel < 0)
                throw std::logic_error("f_to_generator_word: refinement diverged");
            auto [a, b] = queue.front();
            queue.pop_front();
            if (is_standard(a, b) && is_standard(f.eval(a), f.eval(b)))
                continue;
            Rational cut = is_standard(a, b) ? (a + b) / 2 : coarsest_cut(a, b);
            P.push_back(cut);
            queue.push_back({a, cut});
            queue.push_back({cut, b});
        }
        std::sort(P.begin(), P.end());
        P.erase(std::unique(P.begin(), P.end()), P.end());
    }
    std::vector<Rational> Q;
    for (const auto& x : P)
        Q.push_back(f.eval(x));

    // Cancel matching sibling pairs on both sides.
    auto siblings = [](const Rational& a, const Rational& mid, const Rational& b) {
        return is_standard(a, b) && mid == (a + b) / 2;
    };
    for (bool again = true; again;) {
        again = false;
        for (std::size_t i = 0; i + 2 < P.size(); ++i) {
            if (siblings(P[i], P[i + 1], P[i + 2]) &&
                siblings(Q[i], Q[i + 1], Q[i + 2])) {
                P.erase(P.begin() + i + 1);
                Q.erase(Q.begin() + i + 1);
                again = true;
                break;
            }
        }
    }

    auto exponents = [](const std::vector<Rational>& C) {
        std::vector<unsigned> a(C.size() - 1);
        for (std::size_t k = 0; k + 1 < C.size(); ++k)
            a[k] = leaf_exponent(C[k], C[k + 1] - C[k]);
        return a;
    };
    const auto da = exponents(P);
    const auto ra = exponents(Q);

    for (bool alt : {false, true}) {
        for (bool swapped : {false, true}) {
            GenWord w = swapped ? assemble_word(ra, da, alt)
                                : assemble_word(da, ra, alt);
            if (generator_word_to_map(w) == f)
                return w;
        }
    }
    throw std::logic_error("f_to_generator_word: no assembly matched");
}

PAMap generator_word_to_map(const GenWord& word) {
    const PAMap A = f_A(), B = f_B();
    const PAMap Ai = A.inverse(), Bi = B.inverse();
    PAMap acc = PAMap::identity();
    for (int c : word) {
        const PAMap* m = nullptr;
        switch (c) {
            case 1: m = &A; break;
            case -1: m = &Ai; break;
            case 2: m = &B; break;
            case -2: m = &Bi; break;
            default:
                throw std::invalid_argument("generator_word_to_map: bad letter");
        }
        acc = compose(acc, *m);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Band-visit sequences and the equivalence relation
// ---------------------------------------------------------------------------

CharSeq evolution_sequence(const PAMap& g, const std::vector<Rational>& boundaries) {
    if (boundaries.size() < 2 || boundaries.front() != kZero ||
        boundaries.back() != kOne)
        throw std::invalid_argument("evolution_sequence: bad boundaries");
    std::map<Rational, std::size_t> index;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (i > 0 && !(boundaries[i - 1] < boundaries[i]))
            throw std::invalid_argument("evolution_sequence: boundaries not increasing");
        index[boundaries[i]] = i;
    }
    const auto& pts = g.points();
    for (const auto& p : pts)
        if (!index.count(p.y))
            throw std::invalid_argument(
                "evolution_sequence: breakpoint image inside a band");

    CharSeq cs;
    cs.band_count = boundaries.size() - 1;
    cs.sign = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        std::size_t ia = index[pts[i].y], ib = index[pts[i + 1].y];
        if (cs.sign == 0 && ia != ib)
            cs.sign = ib > ia ? +1 : -1;
        if (ib > ia)
            for (std::size_t j = ia + 1; j <= ib; ++j)
                cs.indices.push_back(j);
        else
            for (std::size_t j = ia; j > ib; --j)
                cs.indices.push_back(j);
    }
    if (cs.sign == 0)
        cs.sign = +1;
    return cs;
}

CharSeq characteristic_sequence(const PAMap& g) {
    std::vector<Rational> b{kZero, kOne};
    for (const auto& p : g.points())
        b.push_back(p.y);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return evolution_sequence(g, b);
}

CharSeq class_characteristic_sequence(const PAMap& g) {
    std::vector<Rational> bands{kZero, kOne, g.points().front().y,
                                g.points().back().y};
    std::vector<Rational> junctions;
    for (const auto& cb : classify_breakpoints(g))
        if (cb.kind == BreakpointKind::TypeII) {
            junctions.push_back(cb.x);
            bands.push_back(g.eval(cb.x));
        }
    std::sort(bands.begin(), bands.end());
    bands.erase(std::unique(bands.begin(), bands.end()), bands.end());
    std::map<Rational, std::size_t> index;
    for (std::size_t i = 0; i < bands.size(); ++i)
        index[bands[i]] = i;

    std::vector<Rational> xs{kZero};
    xs.insert(xs.end(), junctions.begin(), junctions.end());
    xs.push_back(kOne);

    CharSeq cs;
    cs.band_count = bands.size() - 1;
    cs.sign = g.slope(0).sign() < 0 ? -1 : +1;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        auto ita = index.find(g.eval(xs[i]));
        auto itb = index.find(g.eval(xs[i + 1]));
        if (ita == index.end() || itb == index.end())
            throw std::logic_error(
                "class_characteristic_sequence: run end off the band grid");
        std::size_t ia = ita->second, ib = itb->second;
        if (ib > ia)
            for (std::size_t j = ia + 1; j <= ib; ++j)
                cs.indices.push_back(j);
        else
            for (std::size_t j = ia; j > ib; --j)
                cs.indices.push_back(j);
    }
    return cs;
}

bool same_equivalence_class(const PAMap& g1, const PAMap& g2) {
    return class_characteristic_sequence(g1) == class_characteristic_sequence(g2);
}

PAMap normalize_right(const PAMap& f1, const PAMap& g) {
    if (!is_in_F(f1))
        throw std::invalid_argument("normalize_right: left factor is not in F");
    if (!is_in_G(g))
        throw std::invalid_argument("normalize_right: middle factor is not in G");

    struct Part {
        Interval iv;
        Rational scale;
    };
    std::vector<Part> parts;
    const auto& pts = f1.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Interval piece(pts[i].x, pts[i + 1].x);
        Rational s = (pts[i + 1].y - pts[i].y) / piece.length();
        for (const auto& leg : preimage_interval(g, piece))
            parts.push_back({leg.iv, s});
    }
    std::sort(parts.begin(), parts.end(),
              [](const Part& a, const Part& b) { return a.iv.lo < b.iv.lo; });

    std::vector<Point> f2pts;
    f2pts.push_back({kZero, kZero});
    Rational x = kZero;
    for (const auto& part : parts) {
        if (part.iv.lo != f2pts.back().y)
            throw std::logic_error("normalize_right: fibers do not tile [0,1]");
        x += part.scale * part.iv.length();
        f2pts.push_back({x, part.iv.hi});
    }
    PAMap f2(std::move(f2pts));
    PAMap h = compose(compose(f1, g), f2);
    if (!is_in_G(h))
        throw std::logic_error("normalize_right: result is not measure preserving");
    return f2;
}

}  // namespace gmap
