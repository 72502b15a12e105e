#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gmap/rational.hpp"

using gmap::Dyadic;
using gmap::Int;
using gmap::Rational;

TEST_CASE("arithmetic is exact and canonical") {
    CHECK(Rational(1, 2) + Rational(1, 4) == Rational(3, 4));
    CHECK(Rational(6, 8) == Rational(3, 4));
    CHECK(Rational(3, 4) / Rational(1, 2) == Rational(3, 2));
    CHECK(Rational(1, 3) - Rational(1, 3) == Rational(0));
    CHECK((Rational(-2, 4)).num() == Int(-1));
    CHECK((Rational(1, -2)).den() == Int(2));
    CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
}

TEST_CASE("ordering is total and consistent") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(0));
    CHECK(Rational(7, 8) <= Rational(7, 8));
    CHECK(Rational(2, 3) > Rational(3, 5));
}

TEST_CASE("commutativity and round-trip properties") {
    Rational a(7, 12), b(-3, 5);
    CHECK(a + b == b + a);
    CHECK(a * (b / a) == b);
}

TEST_CASE("is_dyadic") {
    CHECK(Rational(3, 8).is_dyadic());
    CHECK(!Rational(1, 3).is_dyadic());
    CHECK(Rational(0).is_dyadic());
    CHECK(Rational(5).is_dyadic());
    CHECK(Rational(-7, 16).is_dyadic());
    CHECK(!Rational(5, 6).is_dyadic());
}

TEST_CASE("dyadic closure under +,-,*") {
    Rational a(3, 8), b(5, 16);
    CHECK((a + b).is_dyadic());
    CHECK((a - b).is_dyadic());
    CHECK((a * b).is_dyadic());
    // dyadic times power of two stays dyadic
    CHECK((a * Rational::pow2(-5)).is_dyadic());
}

TEST_CASE("log2_exact") {
    CHECK(Rational(4).log2_exact() == 2);
    CHECK(Rational(1, 8).log2_exact() == -3);
    CHECK(!Rational(3, 2).log2_exact());
    CHECK(Rational(1).log2_exact() == 0);
    CHECK(!Rational(6).log2_exact());
    CHECK_THROWS_AS(Rational(0).log2_exact(), std::domain_error);
    CHECK_THROWS_AS(Rational(-4).log2_exact(), std::domain_error);
}

TEST_CASE("floor_log2") {
    CHECK(Rational(1).floor_log2() == 0);
    CHECK(Rational(3, 2).floor_log2() == 0);
    CHECK(Rational(2).floor_log2() == 1);
    CHECK(Rational(7, 8).floor_log2() == -1);
    CHECK(Rational(1, 8).floor_log2() == -3);
    CHECK(Rational(9, 8).floor_log2() == 0);
    CHECK(Rational(31, 4).floor_log2() == 2);
}

TEST_CASE("pow2 and dyadic_exponent") {
    CHECK(Rational::pow2(3) == Rational(8));
    CHECK(Rational::pow2(-2) == Rational(1, 4));
    CHECK(Rational(5, 32).dyadic_exponent() == 5);
    CHECK(Rational(3).dyadic_exponent() == 0);
    CHECK_THROWS_AS(Rational(1, 3).dyadic_exponent(), std::domain_error);
}

TEST_CASE("Dyadic view") {
    auto d = Dyadic::from(Rational(5, 32));
    REQUIRE(d.has_value());
    CHECK(d->p == Int(5));
    CHECK(d->k == 5);
    CHECK(d->value() == Rational(5, 32));
    CHECK(!Dyadic::from(Rational(1, 3)));
}

TEST_CASE("canonical text form and parsing") {
    CHECK(Rational(3, 4).str() == "3/4");
    CHECK(Rational(5).str() == "5");
    CHECK(Rational(-1, 2).str() == "-1/2");
    CHECK(Rational::parse("3/4") == Rational(3, 4));
    CHECK(Rational::parse("-7") == Rational(-7));
    CHECK(Rational::parse("5/2^3") == Rational(5, 8));
    CHECK(!Rational::parse(""));
    CHECK(!Rational::parse("1/0"));
    CHECK(!Rational::parse("x"));
    // print-then-parse is the identity on canonical strings
    for (long n = -5; n <= 5; ++n)
        for (long d = 1; d <= 7; ++d) {
            Rational r(n, d);
            CHECK(Rational::parse(r.str()) == r);
        }
}
