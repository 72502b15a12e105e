#include "gmap/conjugacy.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "gmap/algebra.hpp"
#include "gmap/dynamics.hpp"

namespace gmap {

namespace {

void validate_skeleton(const MarkovSkeleton& sk) {
    if (sk.points.size() < 2)
        throw std::invalid_argument("skeleton: need at least two points");
    if (sk.points.size() != sk.values.size())
        throw std::invalid_argument("skeleton: points/values size mismatch");
    if (sk.points.front() != Rational(0) || sk.points.back() != Rational(1))
        throw std::invalid_argument("skeleton: partition must run from 0 to 1");
    for (std::size_t i = 0; i + 1 < sk.points.size(); ++i)
        if (!(sk.points[i] < sk.points[i + 1]))
            throw std::invalid_argument("skeleton: points must be strictly increasing");
}

std::size_t point_index(const std::vector<Rational>& pts, const Rational& v,
                        const char* what) {
    auto it = std::lower_bound(pts.begin(), pts.end(), v);
    if (it == pts.end() || !(*it == v))
        throw std::invalid_argument(std::string(what) + ": value " + v.str() +
                                    " is not a partition point");
    return static_cast<std::size_t>(it - pts.begin());
}

void validate_index_map(const IndexMap& s) {
    if (s.size() < 2)
        throw std::invalid_argument("index map: need at least two entries");
    std::size_t n = s.size() - 1;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] > n)
            throw std::invalid_argument("index map: entry out of range");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] == s[i - 1])
            throw std::invalid_argument("index map: piece " + std::to_string(i) +
                                        " is constant");
}

void validate_matrix(const SlopeMatrix& A) {
    std::size_t n = A.size();
    if (n == 0) throw std::invalid_argument("matrix: empty");
    for (const auto& row : A)
        if (row.size() != n)
            throw std::invalid_argument("matrix: must be square");
    for (std::size_t j = 0; j < n; ++j) {
        Rational colsum(0);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (A[i][j].sign() < 0)
                throw std::invalid_argument("matrix: negative entry");
            if (!A[i][j].is_zero()) any = true;
            colsum += A[i][j];
        }
        if (!any)
            throw std::invalid_argument("matrix: column " + std::to_string(j + 1) +
                                        " is empty");
        if (colsum != Rational(1))
            throw std::invalid_argument("matrix: column " + std::to_string(j + 1) +
                                        " does not sum to 1");
    }
}

// Strongly connected components of the transition digraph (arc j -> i for
// every support entry (i, j)).  Returns component ids in [0, K).
std::vector<std::size_t> scc_ids(const AStar& a, std::size_t& count) {
    std::size_t n = a.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a[i][j]) adj[j].push_back(i);

    // Tarjan, iterative.
    std::vector<std::size_t> idx(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
    std::vector<bool> onstack(n, false);
    std::vector<std::size_t> stack;
    std::size_t next = 0;
    count = 0;
    struct Frame { std::size_t v; std::size_t child; };
    for (std::size_t root = 0; root < n; ++root) {
        if (idx[root] != SIZE_MAX) continue;
        std::vector<Frame> frames{{root, 0}};
        idx[root] = low[root] = next++;
        stack.push_back(root);
        onstack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < adj[f.v].size()) {
                std::size_t w = adj[f.v][f.child++];
                if (idx[w] == SIZE_MAX) {
                    idx[w] = low[w] = next++;
                    stack.push_back(w);
                    onstack[w] = true;
                    frames.push_back({w, 0});
                } else if (onstack[w]) {
                    low[f.v] = std::min(low[f.v], idx[w]);
                }
            } else {
                if (low[f.v] == idx[f.v]) {
                    while (true) {
                        std::size_t w = stack.back();
                        stack.pop_back();
                        onstack[w] = false;
                        comp[w] = count;
                        if (w == f.v) break;
                    }
                    ++count;
                }
                std::size_t v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return comp;
}

// Unique stationary vector of an irreducible column-stochastic block given by
// the listed cell indices: exact Gaussian elimination of (A - Id)v = 0 with
// the normalization row sum(v) = 1.
std::vector<Rational> solve_block(const SlopeMatrix& A,
                                  const std::vector<std::size_t>& cells) {
    std::size_t n = cells.size();
    // Rows 0..n-2 from (A - Id), last row all ones; rhs = e_n.
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1, Rational(0)));
    for (std::size_t r = 0; r + 1 < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            m[r][c] = A[cells[r]][cells[c]];
            if (r == c) m[r][c] -= Rational(1);
        }
    }
    for (std::size_t c = 0; c < n; ++c) m[n - 1][c] = Rational(1);
    m[n - 1][n] = Rational(1);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && m[piv][col].is_zero()) ++piv;
        if (piv == n)
            throw std::logic_error("stationary: singular system on a closed component");
        std::swap(m[col], m[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || m[r][col].is_zero()) continue;
            Rational f = m[r][col] / m[col][col];
            for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    std::vector<Rational> v(n);
    for (std::size_t r = 0; r < n; ++r) v[r] = m[r][n] / m[r][r];
    for (const auto& e : v)
        if (!(e > Rational(0)))
            throw std::logic_error("stationary: non-positive component in closed block");
    return v;
}

struct UnitEntry {
    std::size_t i0 = 0;  // 1-based piece index
    std::size_t j0 = 0;  // 1-based cell index
};

// Sub-piece boundaries of the map determined by a positive cell-length vector
// and the slope data; shared by the expanding and the slope-one direct cases.
PAMap assemble(const IndexMap& s, const SlopeMatrix& A,
               const std::vector<Rational>& len) {
    std::size_t n = A.size();
    std::vector<Rational> x(n + 1, Rational(0));
    for (std::size_t i = 1; i <= n; ++i) x[i] = x[i - 1] + len[i - 1];
    if (x[n] != Rational(1))
        throw std::logic_error("construct: cell lengths do not sum to 1");

    std::vector<Point> pts;
    pts.push_back({Rational(0), x[s[0]]});
    Rational cur(0);
    for (std::size_t i = 1; i <= n; ++i) {
        bool rising = s[i - 1] < s[i];
        std::size_t jlo = std::min(s[i - 1], s[i]) + 1;  // 1-based cells swept
        std::size_t jhi = std::max(s[i - 1], s[i]);
        for (std::size_t k = jlo; k <= jhi; ++k) {
            std::size_t j = rising ? k : jhi + jlo - k;  // traversal order
            const Rational& recip = A[i - 1][j - 1];
            if (recip.is_zero())
                throw std::logic_error("construct: support hole inside a sweep");
            cur += recip * len[j - 1];
            pts.push_back({cur, rising ? x[j] : x[j - 1]});
        }
        if (cur != x[i])
            throw std::logic_error("construct: piece width mismatch");
    }
    return PAMap(std::move(pts));
}

// Endpoint check t(x_i) = x_{s[i]} over the partition induced by `len`.
void verify_skeleton(const PAMap& t, const IndexMap& s,
                     const std::vector<Rational>& len) {
    std::size_t n = len.size();
    std::vector<Rational> x(n + 1, Rational(0));
    for (std::size_t i = 1; i <= n; ++i) x[i] = x[i - 1] + len[i - 1];
    for (std::size_t i = 0; i <= n; ++i)
        if (t.eval(x[i]) != x[s[i]])
            throw std::logic_error("construct: skeleton endpoint check failed");
    if (!is_lambda_preserving(t))
        throw std::logic_error("construct: output is not measure preserving");
}

UnitEntry find_unit_entry(const SlopeMatrix& A) {
    std::size_t n = A.size();
    UnitEntry u;
    std::size_t found = 0;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t support = 0, row = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (!A[i][j].is_zero()) { ++support; row = i; }
        if (support == 1) {
            ++found;
            u.i0 = row + 1;
            u.j0 = j + 1;
        }
    }
    if (found == 0)
        throw std::invalid_argument(
            "slope-one construction: no single-entry column; use construct_conjugate");
    if (found > 1)
        throw std::domain_error(
            "slope-one construction: multiple single-entry columns are unsupported");
    for (std::size_t j = 0; j < A.size(); ++j)
        if (j != u.j0 - 1 && !A[u.i0 - 1][j].is_zero())
            throw std::domain_error(
                "slope-one construction: the slope-one piece must sweep a single cell");
    return u;
}

// Remove the slope-one piece i0 (merging partition indices i0-1 and i0) and
// the cell j0 = i0.  Returns the contracted index map.
IndexMap contract_index(const IndexMap& s, std::size_t i0) {
    auto remap = [&](std::size_t v) { return v < i0 ? v : v - 1; };
    IndexMap out;
    out.reserve(s.size() - 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == i0) continue;  // coalesces with i0-1
        out.push_back(remap(s[i]));
    }
    if (remap(s[i0 - 1]) != remap(s[i0]))
        throw std::logic_error("slope-one construction: contraction is inconsistent");
    return out;
}

SlopeMatrix contract_matrix(const SlopeMatrix& A, std::size_t i0, std::size_t j0) {
    SlopeMatrix out;
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (i == i0 - 1) continue;
        std::vector<Rational> row;
        for (std::size_t j = 0; j < A.size(); ++j) {
            if (j == j0 - 1) continue;
            row.push_back(A[i][j]);
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace

std::string MarkovSkeleton::to_text() const {
    validate_skeleton(*this);
    std::ostringstream os;
    os << "skeleton/1\n";
    for (std::size_t i = 0; i < points.size(); ++i)
        os << points[i].str() << ' ' << values[i].str() << '\n';
    return os.str();
}

MarkovSkeleton MarkovSkeleton::parse_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "skeleton/1")
        throw std::invalid_argument("skeleton: missing skeleton/1 header");
    MarkovSkeleton sk;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string xs, vs, extra;
        if (!(ls >> xs >> vs) || (ls >> extra))
            throw std::invalid_argument("skeleton: line " + std::to_string(lineno) +
                                        ": expected two rationals");
        auto x = Rational::parse(xs);
        auto v = Rational::parse(vs);
        if (!x || !v)
            throw std::invalid_argument("skeleton: line " + std::to_string(lineno) +
                                        ": bad rational");
        sk.points.push_back(*x);
        sk.values.push_back(*v);
    }
    validate_skeleton(sk);
    return sk;
}

MarkovSkeleton MarkovSkeleton::from_map(const PAMap& g) {
    MarkovSkeleton sk;
    sk.points = markov_partition(g);
    sk.values.reserve(sk.points.size());
    for (const auto& x : sk.points) sk.values.push_back(g.eval(x));
    validate_skeleton(sk);
    return sk;
}

IndexMap index_map(const MarkovSkeleton& sk) {
    validate_skeleton(sk);
    IndexMap s;
    s.reserve(sk.values.size());
    for (const auto& v : sk.values)
        s.push_back(point_index(sk.points, v, "index_map"));
    return s;
}

IndexMap reverse_index(const IndexMap& s) {
    validate_index_map(s);
    std::size_t n = s.size() - 1;
    IndexMap out(s.size());
    for (std::size_t i = 0; i <= n; ++i) out[i] = n - s[n - i];
    return out;
}

AStar a_star(const IndexMap& s) {
    validate_index_map(s);
    std::size_t n = s.size() - 1;
    AStar a(n, std::vector<int>(n, 0));
    for (std::size_t i = 1; i <= n; ++i) {
        std::size_t lo = std::min(s[i - 1], s[i]);
        std::size_t hi = std::max(s[i - 1], s[i]);
        for (std::size_t j = lo + 1; j <= hi; ++j) a[i - 1][j - 1] = 1;
    }
    return a;
}

AStar support_of(const SlopeMatrix& A) {
    AStar a(A.size(), std::vector<int>(A.size(), 0));
    for (std::size_t i = 0; i < A.size(); ++i) {
        if (A[i].size() != A.size())
            throw std::invalid_argument("matrix: must be square");
        for (std::size_t j = 0; j < A.size(); ++j)
            if (!A[i][j].is_zero()) a[i][j] = 1;
    }
    return a;
}

std::string matrix_to_text(const SlopeMatrix& A) {
    std::ostringstream os;
    for (const auto& row : A) {
        for (std::size_t j = 0; j < row.size(); ++j)
            os << (j ? " " : "") << row[j].str();
        os << '\n';
    }
    return os.str();
}

SlopeMatrix parse_matrix(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    SlopeMatrix A;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<Rational> row;
        while (ls >> tok) {
            auto r = Rational::parse(tok);
            if (!r)
                throw std::invalid_argument("matrix: line " + std::to_string(lineno) +
                                            ": bad rational '" + tok + "'");
            row.push_back(*r);
        }
        A.push_back(std::move(row));
    }
    if (A.empty()) throw std::invalid_argument("matrix: empty input");
    for (const auto& row : A)
        if (row.size() != A.size())
            throw std::invalid_argument("matrix: must be square");
    return A;
}

RecurrenceClass classify(const AStar& a) {
    std::size_t n = a.size();
    if (n == 0) throw std::invalid_argument("classify: empty matrix");
    for (const auto& row : a)
        if (row.size() != n)
            throw std::invalid_argument("classify: must be square");
    std::size_t count = 0;
    std::vector<std::size_t> comp = scc_ids(a, count);
    // A component is transient when some cell in it can step outside.
    std::vector<bool> leaves(count, false);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a[i][j] && comp[i] != comp[j]) leaves[comp[j]] = true;
    bool transient = std::find(leaves.begin(), leaves.end(), true) != leaves.end();
    RecurrenceClass rc;
    rc.component_count = count;
    if (transient)
        rc.kind = RecurrenceKind::HasTransient;
    else
        rc.kind = count == 1 ? RecurrenceKind::Irreducible
                             : RecurrenceKind::MultipleRecurrent;
    return rc;
}

SlopeMatrix default_slopes(const AStar& a, SlopeMode mode) {
    std::size_t n = a.size();
    for (const auto& row : a)
        if (row.size() != n)
            throw std::invalid_argument("default_slopes: must be square");
    SlopeMatrix A(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i)
            if (a[i][j]) rows.push_back(i);
        if (rows.empty())
            throw std::invalid_argument("default_slopes: column " +
                                        std::to_string(j + 1) + " is empty");
        std::size_t c = rows.size();
        if (c == 1) {
            A[rows[0]][j] = Rational(1);
        } else if (mode == SlopeMode::Uniform) {
            for (std::size_t i : rows) A[i][j] = Rational(1, static_cast<long>(c));
        } else {
            for (std::size_t k = 0; k < c; ++k) {
                long e = static_cast<long>(k + 1 == c ? c - 1 : k + 1);
                A[rows[k]][j] = Rational::pow2(-e);
            }
        }
    }
    return A;
}

StationaryResult stationary(const SlopeMatrix& A) {
    validate_matrix(A);
    std::size_t n = A.size();
    RecurrenceClass rc = classify(support_of(A));
    if (rc.kind == RecurrenceKind::HasTransient)
        throw std::domain_error(
            "stationary: transient cells admit no positive solution");

    std::size_t count = 0;
    AStar supp = support_of(A);
    std::vector<std::size_t> comp = scc_ids(supp, count);

    StationaryResult res;
    res.unique = rc.kind == RecurrenceKind::Irreducible;
    for (std::size_t c = 0; c < count; ++c) {
        std::vector<std::size_t> cells;
        for (std::size_t i = 0; i < n; ++i)
            if (comp[i] == c) cells.push_back(i);
        std::vector<Rational> blockv = solve_block(A, cells);
        std::vector<Rational> v(n, Rational(0));
        for (std::size_t k = 0; k < cells.size(); ++k) v[cells[k]] = blockv[k];
        res.basis.push_back(std::move(v));
    }
    res.lengths.assign(n, Rational(0));
    Rational w(1, static_cast<long>(count));
    for (const auto& b : res.basis)
        for (std::size_t i = 0; i < n; ++i) res.lengths[i] += w * b[i];

    // Re-substitution: A v = v and sum(v) = 1, exactly.
    Rational total(0);
    for (std::size_t i = 0; i < n; ++i) {
        Rational row(0);
        for (std::size_t j = 0; j < n; ++j) row += A[i][j] * res.lengths[j];
        if (row != res.lengths[i])
            throw std::logic_error("stationary: re-substitution failed");
        total += res.lengths[i];
    }
    if (total != Rational(1))
        throw std::logic_error("stationary: normalization failed");
    return res;
}

PAMap construct_conjugate(const IndexMap& s, const SlopeMatrix& A) {
    validate_index_map(s);
    validate_matrix(A);
    std::size_t n = A.size();
    if (s.size() != n + 1)
        throw std::invalid_argument("construct: index map and matrix sizes disagree");
    if (support_of(A) != a_star(s))
        throw std::invalid_argument("construct: matrix support does not match the index map");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!A[i][j].is_zero() && !(A[i][j] < Rational(1)))
                throw std::invalid_argument(
                    "construct: slope magnitude 1 entry; use construct_conjugate_slope1");

    std::vector<Rational> len = stationary(A).lengths;
    PAMap t = assemble(s, A, len);
    verify_skeleton(t, s, len);
    for (std::size_t i = 0; i < t.segment_count(); ++i)
        if (!(t.slope(i).abs() > Rational(1)))
            throw std::logic_error("construct: output is not expanding");
    return t;
}

PAMap construct_conjugate_slope1(const IndexMap& s, const SlopeMatrix& A) {
    validate_index_map(s);
    validate_matrix(A);
    std::size_t n = A.size();
    if (s.size() != n + 1)
        throw std::invalid_argument("construct: index map and matrix sizes disagree");
    if (support_of(A) != a_star(s))
        throw std::invalid_argument("construct: matrix support does not match the index map");
    UnitEntry u = find_unit_entry(A);
    if (A[u.i0 - 1][u.j0 - 1] != Rational(1))
        throw std::logic_error("slope-one construction: single-entry column must hold 1");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!A[i][j].is_zero() && !(i == u.i0 - 1 && j == u.j0 - 1) &&
                !(A[i][j] < Rational(1)))
                throw std::domain_error(
                    "slope-one construction: only one slope magnitude may be 1");

    bool rising = s[u.i0 - 1] < s[u.i0];

    if (u.i0 != u.j0) {
        if (rising)
            throw std::domain_error(
                "slope-one construction: slope +1 requires the piece to fix its cell");
        // Direct synthesis; the stationary system already carries the
        // slope-one identity |I_i0| = |I_j0|.
        std::vector<Rational> len = stationary(A).lengths;
        PAMap t = assemble(s, A, len);
        verify_skeleton(t, s, len);
        // The cells traded by the slope -1 piece sit symmetrically about 1/2.
        std::vector<Rational> x(n + 1, Rational(0));
        for (std::size_t i = 1; i <= n; ++i) x[i] = x[i - 1] + len[i - 1];
        if (x[u.i0 - 1] + x[u.j0] != Rational(1) || x[u.i0] + x[u.j0 - 1] != Rational(1))
            throw std::logic_error("slope-one construction: cells are not symmetric");
        // The second iterate must be expanding wherever its slope exists.
        PAMap tt = compose(t, t);
        for (std::size_t i = 0; i < tt.segment_count(); ++i)
            if (!(tt.slope(i).abs() > Rational(1)))
                throw std::logic_error(
                    "slope-one construction: second iterate is not expanding");
        return t;
    }

    // i0 == j0: remove the fixed piece, build the reduced map, re-insert.
    if (rising) {
        if (s[u.i0 - 1] != u.i0 - 1 || s[u.i0] != u.i0)
            throw std::domain_error(
                "slope-one construction: slope +1 piece must fix both endpoints");
    } else {
        if (s[u.i0 - 1] != u.i0 || s[u.i0] != u.i0 - 1)
            throw std::domain_error(
                "slope-one construction: slope -1 piece must swap its endpoints");
    }
    if (n == 1) return rising ? PAMap::identity() : PAMap::reflection();

    IndexMap s2 = contract_index(s, u.i0);
    SlopeMatrix A2 = contract_matrix(A, u.i0, u.j0);
    PAMap t2 = construct_conjugate(s2, A2);
    std::vector<Rational> len2 = stationary(A2).lengths;
    std::vector<Rational> x2(len2.size() + 1, Rational(0));
    for (std::size_t i = 1; i <= len2.size(); ++i) x2[i] = x2[i - 1] + len2[i - 1];
    Rational beta = x2[u.i0 - 1];  // split point of the reduced map

    // Scale both halves of the reduced map by 1/2 and splice a slope +-1
    // stretch of length 1/2 between them.  Slopes are unchanged, so the
    // result stays measure preserving; the splice length is a free choice
    // and 1/2 keeps dyadic data dyadic.
    Rational half(1, 2);
    Rational a = half * beta;               // right end of the shrunk left half
    Rational b = half * (Rational(1) + beta);  // left end of the shifted right half
    auto left_x = [&](const Rational& v) { return half * v; };
    auto right_x = [&](const Rational& v) { return half * (Rational(1) + v); };

    std::vector<Point> pts;
    std::vector<Rational> xs;  // resulting partition, for the endpoint check
    if (rising) {
        // Each half of the reduced map must map into itself.
        for (const auto& p : t2.points()) {
            if ((p.x < beta && p.y > beta) || (p.x > beta && p.y < beta))
                throw std::logic_error(
                    "slope-one construction: reduced map halves are not closed");
            if (p.x < beta) pts.push_back({left_x(p.x), left_x(p.y)});
        }
        pts.push_back({a, a});
        pts.push_back({b, b});
        for (const auto& p : t2.points())
            if (p.x > beta) pts.push_back({right_x(p.x), right_x(p.y)});
    } else {
        // The halves must swap, which forces the split point to be 1/2.
        if (beta != half)
            throw std::logic_error(
                "slope-one construction: swap point must be the midpoint");
        for (const auto& p : t2.points()) {
            if ((p.x < beta && p.y < beta) || (p.x > beta && p.y > beta))
                throw std::logic_error(
                    "slope-one construction: reduced map halves do not swap");
            if (p.x < beta) pts.push_back({left_x(p.x), right_x(p.y)});
        }
        pts.push_back({a, b});
        pts.push_back({b, a});
        for (const auto& p : t2.points())
            if (p.x > beta) pts.push_back({right_x(p.x), left_x(p.y)});
    }
    for (std::size_t i = 0; i < u.i0; ++i) xs.push_back(left_x(x2[i]));
    xs.push_back(b);
    for (std::size_t i = u.i0; i <= len2.size(); ++i) xs.push_back(right_x(x2[i]));

    PAMap t(std::move(pts));
    if (!is_lambda_preserving(t))
        throw std::logic_error("slope-one construction: output is not measure preserving");
    if (xs.size() != s.size())
        throw std::logic_error("slope-one construction: partition size mismatch");
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (t.eval(xs[i]) != xs[s[i]])
            throw std::logic_error("slope-one construction: endpoint check failed");
    return t;
}

bool conjugate_by_index(const IndexMap& s1, const IndexMap& s2) {
    validate_index_map(s1);
    validate_index_map(s2);
    if (s1.size() != s2.size()) return false;
    return s1 == s2 || s1 == reverse_index(s2);
}

bool same_class_from_index(const PAMap& g1, const PAMap& g2) {
    if (!is_in_G(g1) || !is_in_G(g2))
        throw std::invalid_argument("same_class_from_index: maps must be in G");
    IndexMap s1 = index_map(MarkovSkeleton::from_map(g1));
    IndexMap s2 = index_map(MarkovSkeleton::from_map(g2));
    if (s1 != s2) return false;
    if (!same_equivalence_class(g1, g2))
        throw std::logic_error(
            "same_class_from_index: equal index maps but different classes");
    return true;
}

}  // namespace gmap
