#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "gmap/basics.hpp"
#include "gmap/construct.hpp"
#include "gmap/dynamics.hpp"
#include "gmap/pamap.hpp"

using namespace gmap;

namespace {

Rational rat(long n, long d) { return Rational(n, d); }

// Four-leg map with a valley at the non-dyadic level 2/3 and type-I kinks
// on both outer legs at the same level; lambda-preserving by construction.
PAMap valley_two_thirds() {
    return PAMap({{Rational(0), Rational(0)},
                  {rat(1, 3), rat(2, 3)},
                  {rat(5, 12), Rational(1)},
                  {rat(1, 2), rat(2, 3)},
                  {rat(7, 12), Rational(1)},
                  {rat(2, 3), rat(2, 3)},
                  {Rational(1), Rational(0)}});
}

// Tent with its peak moved to x=1/3 (slopes 3 and -3/2).
PAMap skew_tent_third() {
    return PAMap({{Rational(0), Rational(0)},
                  {rat(1, 3), Rational(1)},
                  {Rational(1), Rational(0)}});
}

// Four full-height legs, all of |slope| 4.
PAMap four_leg_accordion() {
    return PAMap({{Rational(0), Rational(0)},
                  {rat(1, 4), Rational(1)},
                  {rat(1, 2), Rational(0)},
                  {rat(3, 4), Rational(1)},
                  {Rational(1), Rational(0)}});
}

// Slope multiset of g on the fiber over y (isolated preimages only).
std::vector<Rational> fiber_slopes(const PAMap& g, const Rational& y) {
    std::vector<Rational> out;
    PreimageResult pre = preimage_point(g, y);
    const auto& pts = g.points();
    for (const Rational& x : pre.points) {
        std::size_t j = 0;
        while (j + 1 < pts.size() && !(pts[j + 1].x > x))
            ++j;
        if (j >= g.segment_count())
            j = g.segment_count() - 1;
        Rational s = g.slope(j);
        out.push_back(s < 0 ? -s : s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool prefix_feasible(const std::vector<Rational>& alpha,
                     const std::vector<Rational>& beta) {
    Rational pref = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        pref += alpha[i] - beta[i];
        if (pref < 0)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("partition_point splits non-power-of-two slopes") {
    Point p = partition_point({Rational(0), Rational(0)}, {rat(1, 2), rat(3, 4)});
    CHECK(p.x == rat(1, 4));
    CHECK(p.y == rat(1, 2));

    CHECK_THROWS_AS(
        partition_point({Rational(0), Rational(0)}, {Rational(1), Rational(1)}),
        std::domain_error);

    Point q = partition_point({Rational(0), Rational(0)}, {rat(1, 4), rat(3, 4)});
    CHECK(q.x.is_dyadic());
    CHECK(q.y.is_dyadic());
    CHECK(q.y / q.x == Rational(4));
    CHECK((rat(3, 4) - q.y) / (rat(1, 4) - q.x) == Rational(2));
}

TEST_CASE("approximate_increasing_in_F") {
    SUBCASE("identity is returned unchanged") {
        CHECK(approximate_increasing_in_F(PAMap::identity(), rat(1, 8)) ==
              PAMap::identity());
    }
    SUBCASE("linearized square map") {
        PAMap a({{Rational(0), Rational(0)},
                 {rat(1, 4), rat(1, 16)},
                 {rat(1, 2), rat(1, 4)},
                 {rat(3, 4), rat(9, 16)},
                 {Rational(1), Rational(1)}});
        PAMap f = approximate_increasing_in_F(a, rat(1, 8));
        CHECK(is_in_F(f));
        CHECK(sup_distance(a, f) < rat(1, 8));
    }
    SUBCASE("non-dyadic breakpoint") {
        PAMap a({{Rational(0), Rational(0)},
                 {rat(1, 3), rat(1, 2)},
                 {Rational(1), Rational(1)}});
        PAMap f = approximate_increasing_in_F(a, rat(1, 16));
        CHECK(is_in_F(f));
        CHECK(sup_distance(a, f) < rat(1, 16));
    }
}

TEST_CASE("make_window reproduces the basic perturbations") {
    CHECK(make_window({{rat(1, 4), rat(1, 2)}, {1, 2, 2}, true}) == w3_basic());
    CHECK(make_window({{Rational(0), Rational(1)}, {1, 1}, true}) == tent());
    CHECK(make_window({{rat(3, 4), Rational(1)}, {1, 1}, true}) ==
          w2_right_quarter());

    // exponent weights must sum to one
    CHECK_THROWS_AS(make_window({{Rational(0), Rational(1)}, {1, 2}, true}),
                    std::invalid_argument);
    // an interior 2-fold window cannot reconnect to the identity
    CHECK_THROWS_AS(
        make_window({{rat(1, 4), rat(1, 2)}, {1, 1}, true}),
        std::invalid_argument);

    // entropy of a window is |J| * sum k_i 2^-k_i
    PAMap w = make_window({{rat(3, 4), Rational(1)}, {1, 2, 3, 3}, true});
    CHECK(is_in_G(w));
    REQUIRE(entropy(w).exact.has_value());
    CHECK(*entropy(w).exact ==
          rat(1, 4) * (rat(1, 2) + Rational(2) * rat(1, 4) +
                       Rational(6) * rat(1, 8)));
}

TEST_CASE("approximate_in_G") {
    SUBCASE("members of G pass through unchanged") {
        CHECK(approximate_in_G(tent(), rat(1, 16)) == tent());
        CHECK(approximate_in_G(w3_basic(), rat(1, 4)) == w3_basic());
    }
    SUBCASE("non-dyadic x and non-power-of-two slopes") {
        PAMap h = skew_tent_third();
        REQUIRE(is_lambda_preserving(h));
        PAMap g = approximate_in_G(h, rat(1, 16));
        CHECK(is_in_G(g));
        CHECK(sup_distance(h, g) < rat(1, 16));
    }
    SUBCASE("non-dyadic y at a type-II breakpoint") {
        PAMap h = valley_two_thirds();
        REQUIRE(is_lambda_preserving(h));
        PAMap g = approximate_in_G(h, rat(1, 8));
        CHECK(is_in_G(g));
        CHECK(sup_distance(h, g) < rat(1, 8));
    }
    SUBCASE("non-measure-preserving input is rejected") {
        PAMap bad({{Rational(0), Rational(0)},
                   {rat(1, 2), Rational(1)},
                   {Rational(1), Rational(1)}});
        CHECK_THROWS_AS(approximate_in_G(bad, rat(1, 4)), std::domain_error);
    }
}

TEST_CASE("make_leo") {
    SUBCASE("an already mixing map is returned unchanged") {
        CHECK(make_leo(tent(), rat(1, 4)) == tent());
    }
    SUBCASE("identity becomes locally eventually onto") {
        PAMap g = make_leo(PAMap::identity(), rat(1, 4));
        CHECK(is_in_G(g));
        CHECK(is_LEO(g));
        CHECK(sup_distance(PAMap::identity(), g) < rat(1, 4));
    }
    SUBCASE("reflection becomes locally eventually onto") {
        PAMap g = make_leo(g0_minus(), rat(1, 4));
        CHECK(is_in_G(g));
        CHECK(is_LEO(g));
        CHECK(sup_distance(g0_minus(), g) < rat(1, 4));
    }
    SUBCASE("two invariant blocks are welded together") {
        PAMap b({{Rational(0), rat(1, 2)},
                 {rat(1, 4), Rational(0)},
                 {rat(1, 2), rat(1, 2)},
                 {rat(3, 4), Rational(1)},
                 {Rational(1), rat(1, 2)}});
        REQUIRE_FALSE(is_TM(b));
        PAMap g = make_leo(b, rat(1, 8));
        CHECK(is_in_G(g));
        CHECK(is_TM(g));
        CHECK(is_LEO(g));
        CHECK(sup_distance(b, g) < rat(1, 8));
    }
}

TEST_CASE("solve_dynamic_matching") {
    SUBCASE("worked example") {
        std::vector<Rational> alpha = {rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)};
        std::vector<Rational> beta = {rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)};
        MatchingSchedule s = solve_dynamic_matching(alpha, beta);
        Rational total = 0;
        for (const auto& e : s.entries)
            total += e.duration;
        CHECK(total == Rational(1));
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            Rational fill = 0;
            for (const auto& e : s.entries)
                fill += e.duration * alpha[e.perm[i]];
            CHECK(fill == beta[i]);
        }
    }
    SUBCASE("equal inputs give the identity schedule") {
        std::vector<Rational> v = {rat(1, 2), rat(1, 4), rat(1, 4)};
        MatchingSchedule s = solve_dynamic_matching(v, v);
        REQUIRE(s.entries.size() == 1);
        CHECK(s.entries[0].duration == Rational(1));
        CHECK(s.entries[0].perm == std::vector<std::size_t>{0, 1, 2});
    }
    SUBCASE("oversized first bucket is infeasible at index 1") {
        std::vector<Rational> alpha = {rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)};
        std::vector<Rational> beta = {rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)};
        try {
            solve_dynamic_matching(alpha, beta);
            FAIL("expected infeasibility");
        } catch (const InfeasibleMatching& e) {
            CHECK(e.index == 1);
        }
    }
    SUBCASE("feasibility matches the prefix criterion on random instances") {
        std::mt19937 rng(20240817);
        for (int round = 0; round < 1000; ++round) {
            std::size_t m = 2 + rng() % 3;
            std::vector<Rational> alpha, beta;
            long sa = 0, sb = 0;
            std::vector<long> wa(m), wb(m);
            for (std::size_t i = 0; i < m; ++i) {
                wa[i] = 1 + (long)(rng() % 16);
                wb[i] = 1 + (long)(rng() % 16);
                sa += wa[i];
                sb += wb[i];
            }
            std::sort(wa.rbegin(), wa.rend());
            std::sort(wb.rbegin(), wb.rend());
            for (std::size_t i = 0; i < m; ++i) {
                alpha.push_back(Rational(wa[i], sa));
                beta.push_back(Rational(wb[i], sb));
            }
            bool expect = prefix_feasible(alpha, beta);
            bool got;
            try {
                MatchingSchedule s = solve_dynamic_matching(alpha, beta);
                got = true;
                for (std::size_t i = 0; i < m; ++i) {
                    Rational fill = 0;
                    for (const auto& e : s.entries)
                        fill += e.duration * alpha[e.perm[i]];
                    CHECK(fill == beta[i]);
                }
            } catch (const InfeasibleMatching&) {
                got = false;
            }
            CHECK(got == expect);
        }
    }
}

TEST_CASE("rewrite_slopes_min_entropy") {
    SUBCASE("two legs of slope 2 are already minimal") {
        CHECK(rewrite_slopes_min_entropy(tent(), {Rational(0), Rational(1)},
                                         rat(1, 4)) == tent());
    }
    SUBCASE("four legs of slope 4 become the multiset {2,4,8,8}") {
        PAMap g = four_leg_accordion();
        PAMap r = rewrite_slopes_min_entropy(g, {Rational(0), Rational(1)},
                                             rat(1, 4));
        CHECK(is_in_G(r));
        CHECK(sup_distance(g, r) < rat(1, 4));
        REQUIRE(entropy(r).exact.has_value());
        CHECK(*entropy(r).exact == c_min(4));
        CHECK(fiber_slopes(r, rat(1, 3)) ==
              std::vector<Rational>{Rational(2), Rational(4), Rational(8),
                                    Rational(8)});
    }
    SUBCASE("ten legs with slopes {8x6, 16x4}") {
        std::vector<long> ls = {3, 3, 3, 3, 3, 3, 4, 4, 4, 4};
        std::vector<Point> pts;
        Rational x = 0, y = 0;
        pts.push_back({x, y});
        for (std::size_t i = 0; i < ls.size(); ++i) {
            x += Rational::pow2(-ls[i]);
            y = (i % 2 == 0) ? Rational(1) : Rational(0);
            pts.push_back({x, y});
        }
        PAMap g(std::move(pts));
        REQUIRE(is_in_G(g));
        PAMap r = rewrite_slopes_min_entropy(g, {Rational(0), Rational(1)},
                                             rat(1, 4));
        CHECK(is_in_G(r));
        CHECK(sup_distance(g, r) < rat(1, 4));
        REQUIRE(entropy(r).exact.has_value());
        CHECK(*entropy(r).exact == c_min(10));
    }
    SUBCASE("a kinked leg is rejected") {
        PAMap g = compose(tent(), w3_basic());
        CHECK_THROWS_AS(rewrite_slopes_min_entropy(
                            g, {Rational(0), Rational(1)}, rat(1, 4)),
                        std::domain_error);
    }
}

TEST_CASE("target_entropy") {
    SUBCASE("tent raised to entropy 2") {
        PAMap g = target_entropy(tent(), Rational(2), rat(1, 4));
        CHECK(is_in_G(g));
        REQUIRE(entropy(g).exact.has_value());
        CHECK(*entropy(g).exact > rat(7, 4));
        CHECK(*entropy(g).exact < rat(9, 4));
        CHECK(sup_distance(tent(), g) < rat(1, 4));
    }
    SUBCASE("tent raised to entropy 3") {
        PAMap g = target_entropy(tent(), Rational(3), rat(1, 8));
        REQUIRE(entropy(g).exact.has_value());
        CHECK(*entropy(g).exact > rat(23, 8));
        CHECK(*entropy(g).exact < rat(25, 8));
        CHECK(sup_distance(tent(), g) < rat(1, 8));
    }
    SUBCASE("entropy lowered from 3 to near 2") {
        PAMap h = iterate(tent(), 3);
        REQUIRE(*entropy(h).exact == Rational(3));
        PAMap g = target_entropy(h, Rational(2), rat(1, 4));
        REQUIRE(entropy(g).exact.has_value());
        CHECK(*entropy(g).exact > rat(7, 4));
        CHECK(*entropy(g).exact < rat(9, 4));
        CHECK(sup_distance(h, g) < rat(1, 4));
    }
    SUBCASE("targets below 2 are rejected") {
        CHECK_THROWS_AS(target_entropy(tent(), Rational(1), rat(1, 4)),
                        std::domain_error);
    }
}

TEST_CASE("random_G") {
    SUBCASE("complexity one yields a basic map") {
        std::vector<PAMap> basics = {g0_plus(), g0_minus(), tent(),
                                     w2_right_quarter(), w3_basic()};
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            PAMap g = random_G(seed, 1);
            CHECK(std::count(basics.begin(), basics.end(), g) == 1);
        }
    }
    SUBCASE("always lands in G") {
        for (std::uint64_t seed = 0; seed < 25; ++seed)
            CHECK(is_in_G(random_G(seed, 1 + (unsigned)(seed % 4))));
    }
    SUBCASE("deterministic for a fixed seed") {
        CHECK(random_G(42, 3) == random_G(42, 3));
        CHECK(random_G(42, 3).to_text() == random_G(42, 3).to_text());
    }
}
