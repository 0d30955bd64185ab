#include "circlefac/ergodic.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace circlefac;

namespace {

ConstructionConfig base_config(StageType type, unsigned stages) {
    ConstructionConfig c;
    c.family.type = type;
    c.family.lambda = 4;
    c.r = 1;
    c.max_stages = stages;
    c.oracle.kind = "factorial_series";
    c.oracle.base = 10;
    return c;
}

const ConstructionTrace& flagship() {
    static const ConstructionTrace tr = run(base_config(StageType::III_lambda, 2));
    return tr;
}

const ConstructionTrace& two_stage_II_infty() {
    static const ConstructionTrace tr = run(base_config(StageType::II_infty, 2));
    return tr;
}

bool close(const Real& a, const Real& b, const Real& tol) { return Real(abs(a - b)) <= tol * Real(abs(b)); }

}  // namespace

TEST_CASE("flagship trace is complete") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    REQUIRE(tr.stages.size() == 2);
    REQUIRE(tr.lookahead.has_value());
}

TEST_CASE("X_1 has two components per cell and X_2 nests inside it") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    const BigInt Q1 = tr.stage(1).Q;
    CHECK(Q1 == BigInt(1000000));

    auto X1 = build_level_sets(tr, 1, LevelKind::X);
    CHECK(X1.total_count == 2 * Q1);
    CHECK(X1.window.hi == Rational(BigInt(1), Q1));
    REQUIRE(X1.components.size() == 2);
    std::sort(X1.components.begin(), X1.components.end(),
              [](const RationalInterval& u, const RationalInterval& v) { return u.lo < v.lo; });
    // In cell coordinates the components are the cores I+ and I-.
    const auto& g = tr.stage(1).generator;
    CHECK(X1.components[0].lo * Rational(Q1) == g.I_plus.lo);
    CHECK(X1.components[0].hi * Rational(Q1) == g.I_plus.hi);
    CHECK(X1.components[1].lo * Rational(Q1) == g.I_minus.lo);
    CHECK(X1.components[1].hi * Rational(Q1) == g.I_minus.hi);
    for (const auto& c : X1.components) {
        Rational mid = (c.lo + c.hi) / 2;
        CHECK(in_X(tr, 1, mid));
    }
    CHECK_FALSE(in_X(tr, 1, Rational(0)));

    // The whole circle at depth 2 is far too large to enumerate.
    CHECK_THROWS_AS(build_level_sets(tr, 2, LevelKind::X, 1000, RationalInterval{0, 1}), ComponentExplosion);

    const auto& C = X1.components[0];
    const Rational Q2(tr.stage(2).Q);
    RationalInterval window{C.lo, C.lo + Rational(7) / Q2};
    auto X2 = build_level_sets(tr, 2, LevelKind::X, 1000, window);
    CHECK(X2.total_count > X1.total_count);
    REQUIRE(X2.components.size() >= 10);
    for (const auto& c : X2.components) {
        CHECK(c.lo >= C.lo);
        CHECK(c.hi <= C.hi);
        std::vector<int> sides;
        CHECK(in_X(tr, 2, (c.lo + c.hi) / 2, &sides));
        CHECK(sides.size() == 2);
        CHECK(sides[0] == 1);
    }
}

TEST_CASE("measure of Xi_n matches the product formula") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    auto m1 = xi_measure(tr, 1);
    CHECK(m1.exact == Rational(191, 201));
    CHECK(m1.direct == m1.exact);
    CHECK(m1.match);
    CHECK(m1.equal_measure);
    auto m2 = xi_measure(tr, 2);
    CHECK(m2.exact == Rational(75827, 80802));
    CHECK(m2.direct == m2.exact);
    CHECK(m2.match);
    CHECK(m2.equal_measure);
    REQUIRE(m2.partial_products.size() == 2);
    for (const auto& p : m2.partial_products) CHECK(p > Rational(9, 10));
    for (const auto& p : m2.paths) CHECK(p.equal_across_representatives);
    CHECK_THROWS_AS(xi_measure(tr, 3), std::out_of_range);
}

TEST_CASE("cocycle at i = 0 is trivial and exponents compose") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    const auto C = build_level_sets(tr, 1, LevelKind::X).components.at(0);
    Rational x = (C.lo + 2 * C.hi) / 3;
    auto v0 = derivative_cocycle(tr, 1, x, 0);
    CHECK(v0.zero());
    CHECK(v0.exact);
    CHECK(v0.resolved() == 1);

    const Rational& a2 = tr.alpha(2);
    for (long i : {1L, 7L, 123L}) {
        for (long j : {2L, 55L}) {
            auto vi = derivative_cocycle(tr, 1, x, BigInt(i));
            Rational y = x + Rational(i) * a2;
            y -= Rational(floor(y));
            auto vj = derivative_cocycle(tr, 1, y, BigInt(j));
            auto vij = derivative_cocycle(tr, 1, x, BigInt(i + j));
            if (!vi.exact || !vj.exact || !vij.exact) continue;
            auto prod = vi;
            prod *= vj;
            CHECK(prod.exponents == vij.exponents);
            auto back = vi;
            back *= vi.inverse();
            CHECK(back.zero());
        }
    }
}

TEST_CASE("depth-1 pair scan is exhaustive with values 1/4, 1, 4") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    PrecisionScope ps(tr.working_bits());
    auto scan = component_pair_scan(tr, 1);
    CHECK(scan.exhaustive);
    CHECK(scan.violations == 0);
    CHECK(scan.realised == scan.pairs);
    // Ordered pairs of distinct components; C -> C returns are trivially 1.
    CHECK(scan.pairs == scan.components * (scan.components - 1));
    REQUIRE_FALSE(scan.samples.empty());
    bool saw[3] = {false, false, false};
    for (const auto& s : scan.samples) {
        Real v = s.value.resolved();
        bool ok = false;
        const Real allowed[3] = {Real(1) / 4, Real(1), Real(4)};
        for (int k = 0; k < 3; ++k)
            if (v == allowed[k]) ok = saw[k] = true;
        CHECK_MESSAGE(ok, s.value.describe());
        CHECK(ratio_rule_violation(StageType::III_lambda, 1, s.value).empty());
        // The jet evaluation of H_1'(y)/H_1'(x) agrees with the exponent vector.
        Real num = numeric_derivative(tr, 1, s.x, s.i);
        CHECK_MESSAGE(close(num, v, Real("1e-8")), s.value.describe());
    }
    CHECK(saw[0]);
    CHECK(saw[2]);
}

TEST_CASE("depth-2 pair scan stays inside lambda^Z") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    auto scan = component_pair_scan(tr, 2);
    CHECK(scan.violations == 0);
    CHECK(scan.realised == scan.pairs);
    CHECK(scan.pairs > 0);
    auto mem = ratio_membership(tr, 2, component_midpoints(tr, 2, 2), 200);
    CHECK(mem.violations == 0);
    CHECK(mem.returns > 0);
}

TEST_CASE("return pairs for the stage ratio, the identity and an off-lattice target") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    PrecisionScope ps(tr.working_bits());
    auto four = find_return_pair(tr, 1, Rational(4));
    REQUIRE(four.found);
    CHECK(four.value.resolved() == 4);
    CHECK(four.i != 0);
    Rational y = four.x + Rational(four.i) * tr.alpha(2);
    CHECK(y - Rational(floor(y)) == four.y - Rational(floor(four.y)));
    CHECK(in_X(tr, 1, four.x));
    CHECK(in_X(tr, 1, four.y));
    CHECK(close(numeric_derivative(tr, 1, four.x, four.i), Real(4), Real("1e-8")));

    auto quarter = find_return_pair(tr, 1, Rational(1, 4));
    REQUIRE(quarter.found);
    CHECK(quarter.value.resolved() == Real(1) / 4);

    auto one = find_return_pair(tr, 1, Rational(1));
    REQUIRE(one.found);
    CHECK(one.i == 0);
    CHECK(one.value.zero());

    auto three = find_return_pair(tr, 1, Rational(3));
    CHECK_FALSE(three.found);
    CHECK(three.diagnostic.find("exponent lattice") != std::string::npos);
}

TEST_CASE("membership scan from component midpoints") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    PrecisionScope ps(tr.working_bits());
    auto starts = component_midpoints(tr, 1, 4);
    CHECK(starts.size() == 2);
    const auto& g = tr.stage(1).generator;
    const Rational Q1(tr.stage(1).Q);
    for (long c = 1; c < 4; ++c)
        for (const auto* I : {&g.I_minus, &g.I_plus}) starts.push_back((Rational(c) + (I->lo + I->hi) / 2) / Q1);
    auto mem = ratio_membership(tr, 1, starts, 300);
    CHECK(mem.scanned > 0);
    CHECK(mem.returns > 0);
    CHECK(mem.violations == 0);
    for (const auto& s : mem.samples) {
        if (!s.value.exact) continue;
        CHECK(close(numeric_derivative(tr, 1, s.x, s.i), s.value.resolved(), Real("1e-8")));
    }
}

TEST_CASE("type rules on synthetic exponent vectors") {
    CocycleValue v;
    v.bases["3"] = 3;
    v.exponents["3"] = 0;
    CHECK(ratio_rule_violation(StageType::III_0, 2, v).empty());
    for (long e : {1L, 2L, -2L}) {
        v.exponents["3"] = e;
        CHECK_FALSE(ratio_rule_violation(StageType::III_0, 2, v).empty());
    }
    for (long e : {3L, -3L, 4L, 30L}) {
        v.exponents["3"] = e;
        CHECK(ratio_rule_violation(StageType::III_0, 2, v).empty());
    }
    v.exponents["3"] = 8;
    CHECK_FALSE(ratio_rule_violation(StageType::III_0, 3, v).empty());
    v.exponents["3"] = 9;
    CHECK(ratio_rule_violation(StageType::III_0, 3, v).empty());

    CocycleValue w;
    w.bases["lambda^(1/2)"] = 2;
    w.exponents["lambda^(1/2)"] = 1;
    CHECK_FALSE(ratio_rule_violation(StageType::III_lambda, 1, w).empty());
    w.exponents["lambda^(1/2)"] = -4;
    CHECK(ratio_rule_violation(StageType::III_lambda, 1, w).empty());
    w.exact = false;
    CHECK_FALSE(ratio_rule_violation(StageType::III_lambda, 1, w).empty());

    CocycleValue p;
    p.bases["2^7"] = 128;
    p.exponents["2^7"] = 0;
    CHECK(ratio_rule_violation(StageType::II_infty, 1, p).empty());
    p.exponents["2^7"] = 1;
    CHECK_FALSE(ratio_rule_violation(StageType::II_infty, 1, p).empty());
}

TEST_CASE("rotation number of rotations and conjugates") {
    PrecisionScope ps(128);
    for (auto [p, q] : {std::pair{1L, 3L}, std::pair{2L, 7L}, std::pair{5L, 11L}}) {
        auto est = rotation_number(PiecewiseMap::rotation(Rational(p, q)), static_cast<std::size_t>(q));
        CHECK(Real(abs(est.value - to_real(Rational(p, q)))) < Real("1e-30"));
        CHECK(est.error_bound == Real(1) / Real(q));
    }
    CHECK_THROWS_AS(rotation_number(PiecewiseMap::identity(), 0), std::invalid_argument);

    std::mt19937_64 rng(11);
    const Rational angle(3, 7);
    for (int k = 0; k < 10; ++k) {
        Rational delta(1, 40 + static_cast<long>(rng() % 200));
        auto g = cyclic_lift(make_stage_III_lambda(Rational(4), delta).map(), 1 + static_cast<long>(rng() % 3));
        if (rng() % 2) g = compose(PiecewiseMap::rotation(Rational(static_cast<long>(rng() % 50), 50)), g);
        auto f = compose(compose(g, PiecewiseMap::rotation(angle)), g.inverse());
        const std::size_t n = 700;
        auto est = rotation_number(f, n, Real("0.123"));
        // Lifts of the conjugate may differ from R_angle by an integer.
        CHECK(circle_distance(Real(est.value - to_real(angle))) <= est.error_bound);
    }
}

TEST_CASE("II_infty singularity diagnostic") {
    const auto& tr = two_stage_II_infty();
    REQUIRE(tr.passed());
    auto s = singularity_diagnostic(tr, 2);
    CHECK(s.verdict);
    CHECK(s.decreasing);
    CHECK(s.formula_match);
    REQUIRE(s.x_plus.size() == 2);
    CHECK(s.x_plus[1] < s.x_plus[0]);
    CHECK(s.ratio_21 <= Rational(1, 4));
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(s.xi_plus[k] == s.xi_plus_formula[k]);
        CHECK(s.xi_plus[k] > Rational(4, 5));
        CHECK(s.xi_plus[k] <= s.xi_total[k]);
    }
    // Frozen from the product formula with offset 3: slopes 2^4 and 2^5.
    const auto& g1 = tr.stage(1).generator;
    const auto& g2 = tr.stage(2).generator;
    CHECK(g1.slopes.slope_plus == 16);
    CHECK(g2.slopes.slope_plus == 32);
    CHECK(s.xi_plus[1] == 16 * (g1.I_plus.hi - g1.I_plus.lo) * 32 * (g2.I_plus.hi - g2.I_plus.lo));

    auto scan = component_pair_scan(tr, 1);
    CHECK(scan.violations == 0);
    CHECK(scan.realised == scan.pairs);
    auto mem = ratio_membership(tr, 2, component_midpoints(tr, 2, 2, true), 200);
    CHECK(mem.violations == 0);

    CHECK_FALSE(singularity_diagnostic(flagship(), 2).verdict);
}
