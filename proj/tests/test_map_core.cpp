#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gmap/basics.hpp"
#include "gmap/pamap.hpp"

using namespace gmap;

TEST_CASE("construction validates and canonicalizes") {
    CHECK_THROWS(PAMap({{Rational(0), Rational(0)}}));
    CHECK_THROWS(PAMap({{Rational(0), Rational(0)}, {Rational(1, 2), Rational(1)}}));
    CHECK_THROWS(PAMap({{Rational(0), Rational(0)}, {Rational(1), Rational(2)}}));
    // collinear interior point merges away
    PAMap m({{Rational(0), Rational(0)},
             {Rational(1, 2), Rational(1, 2)},
             {Rational(1), Rational(1)}});
    CHECK(m == PAMap::identity());
    CHECK(m.segment_count() == 1);
}

TEST_CASE("eval on named maps") {
    CHECK(f_A().eval(Rational(1, 2)) == Rational(1, 4));
    CHECK(f_A().eval(Rational(3, 4)) == Rational(1, 2));
    CHECK(g0_minus().eval(Rational(0)) == Rational(1));
    CHECK(tent().eval(Rational(1, 4)) == Rational(1, 2));
    CHECK(tent().eval(Rational(3, 4)) == Rational(1, 2));
    CHECK_THROWS(tent().eval(Rational(3, 2)));
}

TEST_CASE("compose") {
    PAMap t2 = compose(tent(), tent());
    CHECK(t2.eval(Rational(1, 4)) == Rational(1));
    CHECK(t2.segment_count() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(t2.slope(i).abs() == Rational(4));

    CHECK(compose(g0_minus(), g0_minus()) == PAMap::identity());
    CHECK(compose(f_A(), f_A().inverse()) == PAMap::identity());
    CHECK(compose(f_A().inverse(), f_A()) == PAMap::identity());

    // exact associativity on canonical forms
    PAMap a = f_A(), b = tent(), c = w2_right_quarter();
    CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
}

TEST_CASE("iterate") {
    CHECK(iterate(tent(), 0) == PAMap::identity());
    CHECK(iterate(g0_minus(), 2) == PAMap::identity());
    PAMap t2 = iterate(tent(), 2);
    CHECK(t2.segment_count() == 4);
    CHECK_THROWS_AS(iterate(tent(), 8, 100), BudgetExceeded);
}

TEST_CASE("preimage_point") {
    auto r = preimage_point(tent(), Rational(1));
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0] == Rational(1, 2));
    CHECK(r.plateaus.empty());

    r = preimage_point(tent(), Rational(1, 2));
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0] == Rational(1, 4));
    CHECK(r.points[1] == Rational(3, 4));

    r = preimage_point(PAMap::identity(), Rational(2, 7));
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0] == Rational(2, 7));

    // plateau detection
    PAMap flat({{Rational(0), Rational(0)},
                {Rational(1, 4), Rational(1, 2)},
                {Rational(1, 2), Rational(1, 2)},
                {Rational(1), Rational(1)}});
    r = preimage_point(flat, Rational(1, 2));
    CHECK(r.points.empty());
    REQUIRE(r.plateaus.size() == 1);
    CHECK(r.plateaus[0] == Interval(Rational(1, 4), Rational(1, 2)));
}

TEST_CASE("preimage_interval legs") {
    auto legs = preimage_interval(tent(), Interval(Rational(1, 2), Rational(1)));
    REQUIRE(legs.size() == 2);
    CHECK(legs[0].iv == Interval(Rational(1, 4), Rational(1, 2)));
    CHECK(legs[1].iv == Interval(Rational(1, 2), Rational(3, 4)));
    CHECK(legs[0].onto);
    CHECK(legs[1].onto);

    legs = preimage_interval(PAMap::identity(), Interval(Rational(1, 3), Rational(2, 3)));
    REQUIRE(legs.size() == 1);
    CHECK(legs[0].iv == Interval(Rational(1, 3), Rational(2, 3)));
    CHECK(legs[0].onto);

    legs = preimage_interval(f_A(), Interval(Rational(3, 4), Rational(1)));
    REQUIRE(legs.size() == 1);
    CHECK(legs[0].iv == Interval(Rational(7, 8), Rational(1)));

    // a leg that maps into but not onto the band
    legs = preimage_interval(f_A(), Interval(Rational(0), Rational(1, 2)));
    REQUIRE(legs.size() == 1);
    CHECK(legs[0].iv == Interval(Rational(0), Rational(3, 4)));
    CHECK(legs[0].onto);
}

TEST_CASE("breakpoint classification") {
    auto cb = classify_breakpoints(tent());
    REQUIRE(cb.size() == 3);
    CHECK(cb[0].kind == BreakpointKind::Endpoint);
    CHECK(cb[1].x == Rational(1, 2));
    CHECK(cb[1].kind == BreakpointKind::TypeII);
    CHECK(cb[2].kind == BreakpointKind::Endpoint);

    cb = classify_breakpoints(f_B());
    REQUIRE(cb.size() == 5);
    for (std::size_t i = 1; i + 1 < cb.size(); ++i)
        CHECK(cb[i].kind == BreakpointKind::TypeI);

    CHECK(classify_breakpoints(PAMap::identity()).size() == 2);

    CHECK(count_type2(tent()) == 1);
    CHECK(count_type2(w2_right_quarter()) == 1);
    CHECK(count_type2(PAMap::identity()) == 0);
    CHECK(count_type2(w3_basic()) == 2);
}

TEST_CASE("lambda preservation") {
    CHECK(is_lambda_preserving(tent()));
    CHECK(is_lambda_preserving(PAMap::identity()));
    CHECK(is_lambda_preserving(g0_minus()));
    CHECK(is_lambda_preserving(w3_basic()));
    CHECK(is_lambda_preserving(w2_right_quarter()));
    CHECK(!is_lambda_preserving(f_A()));
    PAMap notonto({{Rational(0), Rational(0)},
                   {Rational(1, 2), Rational(1, 2)},
                   {Rational(1), Rational(1, 2)}});
    CHECK_THROWS(is_lambda_preserving(notonto));
}

TEST_CASE("F and G membership") {
    CHECK(is_in_F(f_A()));
    CHECK(is_in_F(f_B()));
    CHECK(is_in_F(PAMap::identity()));
    CHECK(!is_in_F(tent()));
    // increasing, fixes endpoints, but slope 3 is not a power of two
    PAMap s3({{Rational(0), Rational(0)},
              {Rational(1, 4), Rational(3, 4)},
              {Rational(1), Rational(1)}});
    CHECK(!is_in_F(s3));

    CHECK(is_in_G(tent()));
    CHECK(is_in_G(PAMap::identity()));
    CHECK(is_in_G(g0_minus()));
    CHECK(is_in_G(w3_basic()));
    CHECK(!is_in_G(f_A()));
    // G closure under composition
    PAMap c = compose(tent(), w3_basic());
    CHECK(is_in_G(c));
    CHECK(is_in_G(compose(c, w2_right_quarter())));
}

TEST_CASE("type-II superadditivity on a sample") {
    PAMap g1 = tent(), g2 = w3_basic();
    CHECK(count_type2(compose(g1, g2)) >= count_type2(g1) + count_type2(g2));
    CHECK(count_type2(compose(g2, g1)) >= count_type2(g1) + count_type2(g2));
}

TEST_CASE("sup_distance") {
    CHECK(sup_distance(tent(), PAMap::identity()) == Rational(1));
    CHECK(sup_distance(tent(), tent()) == Rational(0));
    CHECK(sup_distance(g0_plus(), g0_minus()) == Rational(1));
    CHECK(sup_distance(f_A(), PAMap::identity()) == Rational(1, 4));
}

TEST_CASE("file format round trip") {
    for (const PAMap& m : {tent(), f_A(), f_B(), w3_basic(), w2_right_quarter()}) {
        std::string text = m.to_text();
        CHECK(PAMap::parse_text(text) == m);
    }
    CHECK_THROWS(PAMap::parse_text("nope\n0 0\n1 1\n"));
    CHECK_THROWS(PAMap::parse_text("pamap/1\n0 zebra\n1 1\n"));
}

TEST_CASE("measure inequality |A| <= |g(A)| for g in G") {
    PAMap g = compose(tent(), w3_basic());
    // image of an interval is [min,max] over its endpoint values and interior
    // breakpoint values
    auto image = [&](const Interval& A) {
        Rational lo = g.eval(A.lo), hi = g.eval(A.lo);
        auto upd = [&](const Rational& v) {
            if (v < lo) lo = v;
            if (v > hi) hi = v;
        };
        upd(g.eval(A.hi));
        for (const auto& p : g.points())
            if (A.lo < p.x && p.x < A.hi)
                upd(p.y);
        return Interval(lo, hi);
    };
    for (long a = 0; a < 8; ++a)
        for (long b = a + 1; b <= 8; ++b) {
            Interval A(Rational(a, 8), Rational(b, 8));
            CHECK(A.length() <= image(A).length());
        }
}
