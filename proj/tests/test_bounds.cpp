#include "circlefac/bounds.hpp"
#include "circlefac/generators.hpp"
#include "circlefac/norms.hpp"

#include <doctest.h>

#include <random>

using namespace circlefac;

namespace {

// Bell numbers as row sums of Stirling numbers of the second kind.
BigInt bell_ref(unsigned n) {
    std::vector<std::vector<BigInt>> S(n + 1, std::vector<BigInt>(n + 1, 0));
    S[0][0] = 1;
    for (unsigned i = 1; i <= n; ++i)
        for (unsigned k = 1; k <= i; ++k) S[i][k] = k * S[i - 1][k] + S[i - 1][k - 1];
    BigInt b = 0;
    for (unsigned k = 0; k <= n; ++k) b += S[n][k];
    return b;
}

PiecewiseMap random_map(std::mt19937_64& rng) {
    static const Rational lambdas[] = {4, 9, 16, Rational(25, 4)};
    Rational lambda = lambdas[rng() % 4];
    Rational delta(1, 50 + static_cast<long>(rng() % 350));
    auto h = make_stage_III_lambda(lambda, delta).map();
    long Q = 1 + static_cast<long>(rng() % 3);
    auto l = cyclic_lift(h, Q);
    if (rng() % 2) return compose(PiecewiseMap::rotation(Rational(static_cast<long>(rng() % 97), 97)), l);
    return l;
}

}  // namespace

TEST_CASE("explicit constant uses Bell numbers") {
    const long frozen[] = {1, 1, 2, 5, 15, 52, 203, 877};
    for (unsigned n = 0; n < 8; ++n) {
        CHECK(bell_number(n) == frozen[n]);
        CHECK(bell_number(n) == bell_ref(n));
    }
    CHECK(bell_number(20) == bell_ref(20));
    const long C[] = {2, 16, 240, 5760, 199680};
    for (unsigned r = 0; r < 5; ++r) {
        CHECK(explicit_C(r) == C[r]);
        CHECK(explicit_C(r) == factorial(r + 1) * (BigInt(1) << (r + 1)) * bell_ref(r + 1));
    }
}

TEST_CASE("identity composition bound is C(r)") {
    PrecisionScope ps(128);
    for (unsigned r = 0; r <= 4; ++r) {
        auto b = bound_compose(1, 0, 1, r);
        CHECK(b.abs_bound == to_real(explicit_C(r)));
        CHECK(b.diff_bound == 0);
        CHECK(b.abs_bound >= 1);
    }
}

TEST_CASE("conjugated rotation bound") {
    PrecisionScope ps(128);
    CHECK(bound_conjugated_rotations(5, 2, 0) == 0);
    Real gap("0.001");
    Real b = bound_conjugated_rotations(1, 2, gap);
    CHECK(b == to_real(explicit_C(2)) * gap);
    auto d = cr_dist(PiecewiseMap::rotation(Rational(1, 10)), PiecewiseMap::rotation(Rational(101, 1000)), 2);
    CHECK(d.value <= b);
}

TEST_CASE("polynomial helpers") {
    PrecisionScope ps(128);
    Poly a{1, 2}, b{0, 1, 3};
    auto s = poly_add(a, b);
    CHECK(s == Poly{1, 3, 3});
    auto m = poly_mul(a, b);
    CHECK(m == Poly{0, 1, 5, 6});
    CHECK(poly_eval(m, 2) == 2 + 20 + 48);
    CHECK(poly_coefficient_sum(m) == 12);
    CHECK(poly_degree(m) == 3);
    CHECK(poly_max(a, b) == Poly{1, 2, 3});
}

TEST_CASE("lifted bounds scale order j+1 by Q^j") {
    PrecisionScope ps(128);
    auto g = lifted_bounds({2, 3, 5}, 10, false);
    CHECK(g.D[0][0] == 2);
    CHECK(g.D[1][0] == 30);
    CHECK(g.D[2][0] == 500);
    auto s = lifted_bounds({2, 3, 5}, 10, true);
    CHECK(poly_degree(s.D[2]) == 2);
    CHECK(poly_eval(s.D[2], 1) == 500);
    CHECK(poly_eval(s.D[2], 3) == 4500);
}

TEST_CASE("Faa di Bruno bounds dominate derivatives of compositions") {
    PrecisionScope ps(96);
    NormOptions opt;
    opt.initial_grid = 128;
    opt.rel_tol = 1e-3;
    std::mt19937_64 rng(11);
    for (int k = 0; k < 4; ++k) {
        auto f = random_map(rng), g = random_map(rng);
        auto fs = derivative_sups(f, 4, opt), gs = derivative_sups(g, 4, opt);
        auto bound = compose_bounds(constant_bounds(fs), constant_bounds(gs));
        auto actual = derivative_sups(compose(f, g), 4, opt);
        for (unsigned j = 0; j < 4; ++j) CHECK(actual[j] <= poly_eval(bound.D[j], 1) * Real("1.000001"));
    }
}

TEST_CASE("randomized soundness of the composition and conjugation bounds") {
    // Coarse norm estimates: the bounds exceed the norms by orders of magnitude.
    PrecisionScope ps(96);
    NormOptions opt;
    opt.initial_grid = 128;
    opt.rel_tol = 1e-3;
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 5; ++k) {
        unsigned r = 1 + k % 4;
        auto f = random_map(rng), g = random_map(rng);
        Real fa = cr_norm(f, r, NormMode::MapAbs, opt).value;
        Real fd = cr_norm(f, r, NormMode::DifferenceFromIdentity, opt).value;
        Real ga = cr_norm(g, r, NormMode::MapAbs, opt).value;
        auto b = bound_compose(fa, fd, ga, r);
        CHECK(cr_norm(compose(f, g), r, NormMode::MapAbs, opt).value <= b.abs_bound);
    }
    for (int k = 0; k < 2; ++k) {
        unsigned r = 1 + k;
        auto H = random_map(rng);
        Rational a(static_cast<long>(rng() % 1000), 1000), gap(1, 1000 + static_cast<long>(rng() % 9000));
        auto f1 = compose(compose(H, PiecewiseMap::rotation(a)), H.inverse());
        auto f2 = compose(compose(H, PiecewiseMap::rotation(a + gap)), H.inverse());
        Real Habs = cr_norm(H, r + 1, NormMode::MapAbs, opt).value;
        CHECK(cr_dist(f1, f2, r, opt).value <= bound_conjugated_rotations(Habs, r, to_real(gap)));
    }
}
