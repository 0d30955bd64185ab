#include "circlefac/numeric.hpp"

#include <doctest.h>

using namespace circlefac;

TEST_CASE("floor and frac follow the mathematical convention") {
    CHECK(floor(Rational(7, 2)) == 3);
    CHECK(floor(Rational(-7, 2)) == -4);
    CHECK(frac(Rational(-1, 4)) == Rational(3, 4));
    CHECK(frac(Rational(5, 1)) == 0);
    CHECK(floor_div(BigInt(-7), BigInt(2)) == -4);
}

TEST_CASE("rationals stay reduced") {
    Rational q(BigInt(6), BigInt(-8));
    CHECK(numerator(q) == -3);
    CHECK(denominator(q) == 4);
    CHECK(to_string(Rational(5)) == "5/1");
}

TEST_CASE("parse_rational accepts fractions, integers and decimals") {
    CHECK(parse_rational("3/9") == Rational(1, 3));
    CHECK(parse_rational(" -12 ") == -12);
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("-1.5") == Rational(-3, 2));
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("abc"));
}

TEST_CASE("floor_log2 is exact at powers of two") {
    CHECK(floor_log2(Rational(1)) == 0);
    CHECK(floor_log2(Rational(1, 8)) == -3);
    CHECK(floor_log2(Rational(9, 8)) == 0);
    CHECK(floor_log2(Rational(1023)) == 9);
    CHECK(floor_log2(Rational(1, 1000)) == -10);
}

TEST_CASE("round_down and round_up bracket the real value") {
    PrecisionScope ps(256);
    for (const char* s : {"0.1", "3.14159265358979323846", "1e-40", "12345.678"}) {
        Real x(s);
        CHECK(to_real(round_down(x)) <= x);
        CHECK(to_real(round_up(x)) >= x);
        CHECK(to_real(round_up(x) - round_down(x)) <= x * Real("1e-18"));
    }
}

TEST_CASE("precision scopes nest and restore") {
    unsigned before = current_precision_bits();
    {
        PrecisionScope a(512);
        CHECK(current_precision_bits() >= 512);
        {
            PrecisionScope b(1024);
            CHECK(current_precision_bits() >= 1024);
        }
        CHECK(current_precision_bits() >= 512);
        CHECK(current_precision_bits() < 1024);
    }
    CHECK(current_precision_bits() == before);
}

TEST_CASE("circle distance and powers") {
    CHECK(circle_distance(Rational(7, 8)) == Rational(1, 8));
    CHECK(circle_distance(Rational(-3, 10)) == Rational(3, 10));
    CHECK(rpow(Rational(2, 3), -2) == Rational(9, 4));
    CHECK(ipow(BigInt(10), 30) == BigInt("1000000000000000000000000000000"));
    CHECK(lcm(BigInt(4), BigInt(6)) == 12);
    CHECK(decimal_digits(BigInt(0)) == 1);
    CHECK(decimal_digits(BigInt(-1000)) == 4);
}
