#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmap/algebra.hpp"
#include "gmap/basics.hpp"
#include "gmap/conjugacy.hpp"
#include "gmap/construct.hpp"
#include "gmap/dynamics.hpp"
#include "gmap/pamap.hpp"

using json = nlohmann::json;
using namespace gmap;

namespace {

std::string g_format = "text";

bool structured() { return g_format == "structured"; }

std::size_t default_budget() {
    if (const char* e = std::getenv("GMAP_SEGMENT_BUDGET"))
        return static_cast<std::size_t>(std::stoull(e));
    return kDefaultSegmentBudget;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

PAMap load_map(const std::string& path) { return PAMap::parse_text(slurp(path)); }

Rational parse_rational(const std::string& s, const char* what) {
    auto r = Rational::parse(s);
    if (!r) throw std::invalid_argument(std::string(what) + ": bad rational '" + s + "'");
    return *r;
}

std::vector<Rational> parse_rational_list(const std::string& s, const char* what) {
    std::vector<Rational> out;
    std::string tok;
    std::istringstream is(s);
    while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(parse_rational(tok, what));
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

IndexMap parse_index_list(const std::string& s) {
    IndexMap out;
    std::string tok;
    std::istringstream is(s);
    while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(static_cast<std::size_t>(std::stoull(tok)));
    return out;
}

// Key/value report that renders as text lines or one JSON object.
struct Report {
    json j = json::object();
    std::ostringstream text;

    void add(const std::string& k, const std::string& v) {
        j[k] = v;
        text << k << ": " << v << "\n";
    }
    void add(const std::string& k, bool v) {
        j[k] = v;
        text << k << ": " << (v ? "true" : "false") << "\n";
    }
    void add(const std::string& k, std::size_t v) {
        j[k] = v;
        text << k << ": " << v << "\n";
    }
    void flush() const {
        if (structured())
            std::cout << j.dump(2) << "\n";
        else
            std::cout << text.str();
    }
};

// Map-producing commands print the map text (or write it to -o); structured
// mode wraps the same text in JSON so it stays bit-exact.
void emit_map(const PAMap& m, const std::string& out_path) {
    std::string text = m.to_text();
    if (!out_path.empty()) spill(out_path, text);
    if (structured()) {
        json j;
        j["map"] = text;
        std::cout << j.dump(2) << "\n";
    } else if (out_path.empty()) {
        std::cout << text;
    }
}

std::string join_rationals(const std::vector<Rational>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += v[i].str();
    }
    return out;
}

std::string interval_str(const Interval& iv) {
    return "[" + iv.lo.str() + "," + iv.hi.str() + "]";
}

std::string fixed12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12f", v);
    return buf;
}

std::string svg_polyline(const std::vector<Point>& pts, const char* stroke,
                         const char* width) {
    std::string s = "<polyline fill=\"none\" stroke=\"";
    s += stroke;
    s += "\" stroke-width=\"";
    s += width;
    s += "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += ' ';
        s += fixed12(pts[i].x.to_double());
        s += ',';
        s += fixed12(1.0 - pts[i].y.to_double());  // SVG y grows downward
    }
    s += "\"/>\n";
    return s;
}

std::string render_svg(const PAMap& g, bool diagonal, unsigned iterates,
                       std::size_t budget) {
    static const char* kStrokes[] = {"#000000", "#3366cc", "#33aa55", "#aa7722"};
    std::string s =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" "
        "width=\"512\" height=\"512\">\n"
        "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"white\" "
        "stroke=\"black\" stroke-width=\"0.002\"/>\n";
    if (diagonal)
        s += svg_polyline({{Rational(0), Rational(0)}, {Rational(1), Rational(1)}},
                          "red", "0.004");
    PAMap cur = g;
    for (unsigned k = 1; k <= iterates; ++k) {
        if (k > 1) cur = compose(cur, g, budget);
        s += svg_polyline(cur.points(), kStrokes[(k - 1) % 4], "0.006");
    }
    s += "</svg>\n";
    return s;
}

// Shared inputs of the conjugacy commands: an index map given inline or via a
// skeleton file, and a slope matrix given as a file or synthesized.
struct ConjugacyInput {
    std::string index_csv;
    std::string skeleton_path;
    std::string matrix_path;
    std::string slope_mode = "pow2";

    IndexMap index() const {
        if (!index_csv.empty() && !skeleton_path.empty())
            throw std::invalid_argument("give either --index or --skeleton, not both");
        if (!index_csv.empty()) return parse_index_list(index_csv);
        if (!skeleton_path.empty())
            return index_map(MarkovSkeleton::parse_text(slurp(skeleton_path)));
        throw std::invalid_argument("need --index or --skeleton");
    }
    SlopeMatrix matrix(const IndexMap& s) const {
        if (!matrix_path.empty()) return parse_matrix(slurp(matrix_path));
        SlopeMode mode;
        if (slope_mode == "pow2")
            mode = SlopeMode::PowersOfTwo;
        else if (slope_mode == "uniform")
            mode = SlopeMode::Uniform;
        else
            throw std::invalid_argument("--slopes must be pow2 or uniform");
        return default_slopes(a_star(s), mode);
    }
};

bool has_unit_column(const SlopeMatrix& A) {
    for (std::size_t j = 0; j < A.size(); ++j) {
        std::size_t support = 0;
        for (std::size_t i = 0; i < A.size(); ++i)
            if (!A[i][j].is_zero()) ++support;
        if (support == 1) return true;
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact toolkit for measure-preserving piecewise-affine interval maps"};
    app.require_subcommand(1);
    app.add_option("--format", g_format, "output format: text or structured")
        ->check(CLI::IsMember({"text", "structured"}));

    std::size_t budget = default_budget();
    app.add_option("--segment-budget", budget, "segment budget for compositions");

    // Shared option storage; each subcommand binds the pieces it needs.
    std::string path1, path2, out_path, xarg, epsarg = "1/32";
    unsigned narg = 1, nmax = 7;
    std::uint64_t seed = 1;
    unsigned complexity = 4;
    bool flag_a = false;
    std::string lo = "0", hi = "1", exps = "1,1", carg = "2";
    std::string alpha_csv, beta_csv;
    ConjugacyInput cj;

    auto* c_check = app.add_subcommand("check", "report map properties");
    c_check->add_option("map", path1)->required();

    auto* c_eval = app.add_subcommand("eval", "evaluate the map at a rational point");
    c_eval->add_option("map", path1)->required();
    c_eval->add_option("x", xarg)->required();

    auto* c_compose = app.add_subcommand("compose", "left map after right map");
    c_compose->add_option("left", path1)->required();
    c_compose->add_option("right", path2)->required();
    c_compose->add_option("-o,--out", out_path);

    auto* c_iterate = app.add_subcommand("iterate", "n-th iterate of a map");
    c_iterate->add_option("map", path1)->required();
    c_iterate->add_option("n", narg)->required();
    c_iterate->add_option("-o,--out", out_path);

    auto* c_orbit = app.add_subcommand("orbit", "forward orbit of a point");
    c_orbit->add_option("map", path1)->required();
    c_orbit->add_option("x", xarg)->required();

    auto* c_markov = app.add_subcommand("markov", "breakpoint-orbit partition");
    c_markov->add_option("map", path1)->required();

    auto* c_periods = app.add_subcommand("periods", "periodic points up to a period");
    c_periods->add_option("map", path1)->required();
    c_periods->add_option("--nmax", nmax, "largest period to examine");

    auto* c_jcoll = app.add_subcommand("jcollection", "invariant interval family");
    c_jcoll->add_option("map", path1)->required();

    auto* c_mixing = app.add_subcommand("mixing", "topological mixing and leo flags");
    c_mixing->add_option("map", path1)->required();

    auto* c_entropy = app.add_subcommand("entropy", "entropy with respect to measure");
    c_entropy->add_option("map", path1)->required();

    auto* c_approxf = app.add_subcommand("approx-f", "approximate by an increasing dyadic map");
    c_approxf->add_option("map", path1)->required();
    c_approxf->add_option("--eps", epsarg);
    c_approxf->add_option("-o,--out", out_path);

    auto* c_approxg = app.add_subcommand("approx-g", "approximate by a member of G");
    c_approxg->add_option("map", path1)->required();
    c_approxg->add_option("--eps", epsarg);
    c_approxg->add_option("-o,--out", out_path);

    auto* c_leoize = app.add_subcommand("leoize", "nearby locally-eventually-onto map");
    c_leoize->add_option("map", path1)->required();
    c_leoize->add_option("--eps", epsarg);
    c_leoize->add_option("-o,--out", out_path);

    auto* c_window = app.add_subcommand("window", "window perturbation map");
    c_window->add_option("--lo", lo)->required();
    c_window->add_option("--hi", hi)->required();
    c_window->add_option("--exponents", exps, "comma list of leg exponents");
    c_window->add_flag("--falling", flag_a, "first leg falls");
    c_window->add_option("-o,--out", out_path);

    auto* c_target = app.add_subcommand("target-entropy", "nearby map with given entropy");
    c_target->add_option("map", path1)->required();
    c_target->add_option("--c", carg, "entropy target, at least 2");
    c_target->add_option("--eps", epsarg);
    c_target->add_option("-o,--out", out_path);

    auto* c_matching = app.add_subcommand("matching", "dynamic pump-bucket schedule");
    c_matching->add_option("--alpha", alpha_csv, "pump rates, descending")->required();
    c_matching->add_option("--beta", beta_csv, "bucket capacities, descending")->required();

    auto* c_decompose = app.add_subcommand("decompose", "factor into basic maps and F words");
    c_decompose->add_option("map", path1)->required();
    c_decompose->add_option("-o,--out", out_path);

    auto* c_recompose = app.add_subcommand("recompose", "multiply out a factor word");
    c_recompose->add_option("word", path1)->required();
    c_recompose->add_option("-o,--out", out_path);

    auto* c_eqclass = app.add_subcommand("eqclass", "equivalence-class test");
    c_eqclass->add_option("map1", path1)->required();
    c_eqclass->add_option("map2", path2)->required();

    auto* c_charseq = app.add_subcommand("charseq", "characteristic sequence");
    c_charseq->add_option("map", path1)->required();
    c_charseq->add_flag("--class", flag_a, "class form (type-I kinks removed)");

    auto* c_conj = app.add_subcommand("conjugate", "synthesize a conjugate map");
    c_conj->add_option("--index", cj.index_csv, "index map as a comma list");
    c_conj->add_option("--skeleton", cj.skeleton_path, "skeleton/1 file");
    c_conj->add_option("--matrix", cj.matrix_path, "slope matrix file");
    c_conj->add_option("--slopes", cj.slope_mode, "pow2 or uniform default slopes");
    c_conj->add_option("-o,--out", out_path);

    auto* c_classify = app.add_subcommand("classify", "recurrence structure");
    c_classify->add_option("--index", cj.index_csv, "index map as a comma list");
    c_classify->add_option("--skeleton", cj.skeleton_path, "skeleton/1 file");
    c_classify->add_option("--matrix", cj.matrix_path, "slope matrix file");

    auto* c_stationary = app.add_subcommand("stationary", "exact cell lengths");
    c_stationary->add_option("matrix", cj.matrix_path)->required();

    auto* c_plot = app.add_subcommand("plot", "deterministic SVG graph");
    c_plot->add_option("map", path1)->required();
    c_plot->add_option("out", out_path)->required();
    c_plot->add_flag("--diagonal", flag_a, "overlay the y=x line");
    c_plot->add_option("--iterate", narg, "draw iterates 1..n");

    auto* c_random = app.add_subcommand("random", "deterministic pseudo-random member of G");
    c_random->add_option("--seed", seed);
    c_random->add_option("--complexity", complexity);
    c_random->add_option("-o,--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_check->parsed()) {
            PAMap g = load_map(path1);
            Report r;
            r.add("segments", g.segment_count());
            r.add("in-G", is_in_G(g));
            r.add("in-F", is_in_F(g));
            r.add("lambda-preserving", is_lambda_preserving(g));
            r.add("onto", g.is_onto());
            r.add("type2", static_cast<std::size_t>(count_type2(g)));
            r.flush();
        } else if (c_eval->parsed()) {
            PAMap g = load_map(path1);
            Rational x = parse_rational(xarg, "eval");
            Report r;
            r.add("value", g.eval(x).str());
            if (structured())
                r.flush();
            else
                std::cout << g.eval(x).str() << "\n";
        } else if (c_compose->parsed()) {
            emit_map(compose(load_map(path1), load_map(path2), budget), out_path);
        } else if (c_iterate->parsed()) {
            emit_map(iterate(load_map(path1), narg, budget), out_path);
        } else if (c_orbit->parsed()) {
            OrbitResult o = orbit(load_map(path1), parse_rational(xarg, "orbit"));
            Report r;
            r.add("preperiod", o.preperiod);
            r.add("period", o.period);
            r.add("orbit", join_rationals(o.orbit));
            r.flush();
        } else if (c_markov->parsed()) {
            std::vector<Rational> p = markov_partition(load_map(path1));
            Report r;
            r.add("partition", join_rationals(p));
            if (structured())
                r.flush();
            else
                std::cout << join_rationals(p) << "\n";
        } else if (c_periods->parsed()) {
            PeriodReport rep = periodic_points(load_map(path1), nmax, budget);
            json entries = json::array();
            for (const auto& e : rep.entries) {
                std::ostringstream line;
                line << e.n << ": ";
                if (e.points.empty() && e.intervals.empty()) {
                    line << "none";
                } else {
                    line << "present";
                    for (const auto& p : e.points) line << ' ' << p.str();
                    for (const auto& iv : e.intervals) line << ' ' << interval_str(iv);
                }
                if (structured()) {
                    json je;
                    je["n"] = e.n;
                    je["points"] = json::array();
                    for (const auto& p : e.points) je["points"].push_back(p.str());
                    je["intervals"] = json::array();
                    for (const auto& iv : e.intervals)
                        je["intervals"].push_back(interval_str(iv));
                    entries.push_back(je);
                } else {
                    std::cout << line.str() << "\n";
                }
            }
            if (structured()) std::cout << json{{"periods", entries}}.dump(2) << "\n";
        } else if (c_jcoll->parsed()) {
            JCollection jc = j_collection(load_map(path1));
            Report r;
            r.add("mode", std::string(jc.mode == JCollection::Mode::Identity
                                          ? "identity"
                                          : "reflection"));
            std::string ivs;
            for (const auto& iv : jc.intervals) {
                if (!ivs.empty()) ivs += ' ';
                ivs += interval_str(iv);
            }
            r.add("intervals", ivs);
            r.flush();
        } else if (c_mixing->parsed()) {
            PAMap g = load_map(path1);
            Report r;
            r.add("TM", is_TM(g));
            r.add("LEO", is_LEO(g));
            r.flush();
        } else if (c_entropy->parsed()) {
            EntropyResult e = entropy(load_map(path1));
            Report r;
            r.add("exact", e.exact ? e.exact->str() : std::string("none"));
            std::ostringstream v;
            v.precision(17);
            v << e.value;
            r.add("value", v.str());
            r.flush();
        } else if (c_approxf->parsed()) {
            emit_map(approximate_increasing_in_F(load_map(path1),
                                                 parse_rational(epsarg, "eps")),
                     out_path);
        } else if (c_approxg->parsed()) {
            emit_map(approximate_in_G(load_map(path1), parse_rational(epsarg, "eps")),
                     out_path);
        } else if (c_leoize->parsed()) {
            emit_map(make_leo(load_map(path1), parse_rational(epsarg, "eps")), out_path);
        } else if (c_window->parsed()) {
            WindowSpec spec;
            spec.J = Interval(parse_rational(lo, "lo"), parse_rational(hi, "hi"));
            for (const auto& e : parse_rational_list(exps, "exponents")) {
                if (e.den() != 1)
                    throw std::invalid_argument("exponents must be integers");
                spec.exponents.push_back(static_cast<long>(e.num()));
            }
            spec.rising = !flag_a;
            emit_map(make_window(spec), out_path);
        } else if (c_target->parsed()) {
            emit_map(target_entropy(load_map(path1), parse_rational(carg, "c"),
                                    parse_rational(epsarg, "eps")),
                     out_path);
        } else if (c_matching->parsed()) {
            MatchingSchedule sched = solve_dynamic_matching(
                parse_rational_list(alpha_csv, "alpha"),
                parse_rational_list(beta_csv, "beta"));
            json entries = json::array();
            for (const auto& e : sched.entries) {
                std::ostringstream line;
                line << e.duration.str() << ":";
                json perm = json::array();
                for (std::size_t p : e.perm) {
                    line << ' ' << p;
                    perm.push_back(p);
                }
                if (structured())
                    entries.push_back({{"duration", e.duration.str()}, {"perm", perm}});
                else
                    std::cout << line.str() << "\n";
            }
            if (structured()) std::cout << json{{"schedule", entries}}.dump(2) << "\n";
        } else if (c_decompose->parsed()) {
            DecompositionWord w = decompose(load_map(path1));
            std::string text = w.to_text();
            if (!out_path.empty()) spill(out_path, text);
            if (structured())
                std::cout << json{{"word", text}}.dump(2) << "\n";
            else if (out_path.empty())
                std::cout << text;
        } else if (c_recompose->parsed()) {
            DecompositionWord w = DecompositionWord::parse_text(slurp(path1));
            emit_map(w.recompose(budget), out_path);
        } else if (c_eqclass->parsed()) {
            PAMap g1 = load_map(path1), g2 = load_map(path2);
            Report r;
            r.add("same-class", same_equivalence_class(g1, g2));
            r.add("class1", class_characteristic_sequence(g1).str());
            r.add("class2", class_characteristic_sequence(g2).str());
            r.flush();
        } else if (c_charseq->parsed()) {
            PAMap g = load_map(path1);
            CharSeq cs = flag_a ? class_characteristic_sequence(g)
                                : characteristic_sequence(g);
            Report r;
            r.add("sequence", cs.str());
            if (structured())
                r.flush();
            else
                std::cout << cs.str() << "\n";
        } else if (c_conj->parsed()) {
            IndexMap s = cj.index();
            SlopeMatrix A = cj.matrix(s);
            PAMap t = has_unit_column(A) ? construct_conjugate_slope1(s, A)
                                         : construct_conjugate(s, A);
            if (structured()) {
                json j;
                j["map"] = t.to_text();
                j["in-G"] = is_in_G(t);
                j["lambda-preserving"] = is_lambda_preserving(t);
                if (!out_path.empty()) spill(out_path, t.to_text());
                std::cout << j.dump(2) << "\n";
            } else {
                emit_map(t, out_path);
            }
        } else if (c_classify->parsed()) {
            AStar a;
            if (!cj.matrix_path.empty())
                a = support_of(parse_matrix(slurp(cj.matrix_path)));
            else
                a = a_star(cj.index());
            RecurrenceClass rc = classify(a);
            Report r;
            const char* kind = rc.kind == RecurrenceKind::Irreducible ? "irreducible"
                               : rc.kind == RecurrenceKind::MultipleRecurrent
                                   ? "multiple-recurrent"
                                   : "has-transient";
            r.add("classification", std::string(kind));
            r.add("components", rc.component_count);
            r.flush();
        } else if (c_stationary->parsed()) {
            StationaryResult st = stationary(parse_matrix(slurp(cj.matrix_path)));
            if (structured()) {
                json j;
                j["lengths"] = json::array();
                for (const auto& v : st.lengths) j["lengths"].push_back(v.str());
                j["unique"] = st.unique;
                j["basis"] = json::array();
                for (const auto& b : st.basis) {
                    json jb = json::array();
                    for (const auto& v : b) jb.push_back(v.str());
                    j["basis"].push_back(jb);
                }
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << join_rationals(st.lengths) << "\n";
                if (!st.unique) {
                    std::cout << "unique: false\n";
                    for (std::size_t i = 0; i < st.basis.size(); ++i)
                        std::cout << "basis " << i + 1 << ": "
                                  << join_rationals(st.basis[i]) << "\n";
                }
            }
        } else if (c_plot->parsed()) {
            PAMap g = load_map(path1);
            spill(out_path, render_svg(g, flag_a, narg, budget));
        } else if (c_random->parsed()) {
            emit_map(random_G(seed, complexity), out_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
