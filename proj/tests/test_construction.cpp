#include "circlefac/construction.hpp"

#include <doctest.h>

using namespace circlefac;

namespace {

ConstructionConfig flagship_config() {
    ConstructionConfig c;
    c.family.type = StageType::III_lambda;
    c.family.lambda = 4;
    c.r = 1;
    c.max_stages = 2;
    c.oracle.kind = "factorial_series";
    c.oracle.base = 10;
    return c;
}

const ConstructionTrace& flagship() {
    static const ConstructionTrace tr = run(flagship_config());
    return tr;
}

BigInt pow10(unsigned long e) { return ipow(BigInt(10), e); }

const CheckResult* find_check(const StageRecord& st, const std::string& name) {
    for (const auto& c : st.checks)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("alpha threshold arithmetic") {
    PrecisionScope ps(128);
    auto [eps, N] = alpha_threshold(1, 1, Real(1), 2);
    CHECK(eps == Rational(1, 8));
    CHECK(N == 2);
    auto [eps2, N2] = alpha_threshold(1, 1, Real(2), 2);
    CHECK(eps2 == eps / 2);
    CHECK(N2 == 2);
    auto [eps3, N3] = alpha_threshold(2, 3, Real(3), 5);
    CHECK(to_real(eps3) * 3 <= Real(1) / 64);
    CHECK(to_real(eps3) * 3 > Real(1) / 64 * Real("0.999999"));
    CHECK(N3 == 5);
}

TEST_CASE("vacuous constraints reduce to the convergent search") {
    GoldenRatioOracle g;
    AlphaConstraints c;
    c.eps = 1;
    c.N = 1;
    c.q_floor = BigInt(2);
    auto s = select_alpha(g, c);
    CHECK(s.alpha == convergents(g, 3)[2]);
    CHECK(s.alpha == liouville_search(g, 1, 1, 2).approx);
    for (const auto& chk : check_alpha(g, c, s)) CHECK_MESSAGE(chk.passed, chk.name);
    // The factorial series walks its truncations first.
    FactorialSeriesOracle a(10);
    c.q_floor.reset();
    auto t = select_alpha(a, c);
    CHECK(t.alpha == liouville_search(a, 1, 1, 1).approx);
    CHECK(t.alpha == Rational(1, 10));
}

TEST_CASE("stage-one selection is a factorial truncation") {
    FactorialSeriesOracle a(10);
    AlphaConstraints c;
    c.eps = Rational(1, 8);
    c.N = 2;
    c.first_stage_gap = true;
    auto s = select_alpha(a, c);
    CHECK(s.alpha == Rational(11, 100));
    CHECK(s.gap_bound < Rational(1, 8) / 10000);
    for (const auto& chk : check_alpha(a, c, s)) CHECK_MESSAGE(chk.passed, chk.name);
}

TEST_CASE("flagship run passes every stage check") {
    const auto& tr = flagship();
    REQUIRE_MESSAGE(tr.passed(), tr.failure_message);
    REQUIRE(tr.stages.size() == 2);
    for (const auto& st : tr.stages)
        for (const auto& c : st.checks) CHECK_MESSAGE(c.passed, "stage ", st.n, " ", c.name, ": ", c.detail);
    CHECK(tr.stage(1).passed());
    CHECK(tr.stage(2).passed());
}

TEST_CASE("flagship denominators and cover bookkeeping") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    const auto& s1 = tr.stage(1);
    const auto& s2 = tr.stage(2);
    CHECK(s1.q() == pow10(6));  // 10^(3!)
    CHECK(s1.alpha() == Rational(110001, 1000000));
    CHECK(s2.q() == pow10(24));  // 10^(4!)
    REQUIRE(tr.lookahead);
    CHECK(tr.lookahead->q() == pow10(120));  // 10^(5!)
    CHECK(s1.K == 1);
    CHECK(s1.Q == s1.q());
    CHECK(s2.K == s1.q() * s1.generator.K_prime);
    CHECK(s2.Q == s2.K * s2.q());
    CHECK(s2.Q % (s1.q() * s1.generator.K_prime) == 0);
    CHECK(s1.generator.delta == Rational(1, 201));
    CHECK(s2.generator.delta == Rational(1, 804));
}

TEST_CASE("flagship gaps decrease and the first gap is small") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    FactorialSeriesOracle a(10);
    CHECK(gap_below(a, tr.alpha(1), Rational(1, 4)));
    CHECK(gap_smaller(a, tr.alpha(2), tr.alpha(1)));
    CHECK(gap_smaller(a, tr.lookahead->alpha(), tr.alpha(2)));
}

TEST_CASE("ledger constants are nondecreasing across stages") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    const auto& l1 = tr.stage(1).ledger;
    const auto& l2 = tr.stage(2).ledger;
    const auto& l3 = tr.lookahead->ledger;
    CHECK(l1.C <= l2.C);
    CHECK(l2.C <= l3.C);
    CHECK(l1.N <= l2.N);
    CHECK(l2.N <= l3.N);
    CHECK(l1.coarse_N_norm == tr.config.r + 1);
    // n = 1: the coarse chain constant is |hhat_1|_{r+2}, from inflated sampled sups.
    PrecisionScope ps(160);
    Real direct = cr_norm(tr.stage(1).generator.map(), tr.config.r + 2, NormMode::MapAbs).value;
    CHECK(l1.coarse_C_norm >= direct);
    CHECK(l1.coarse_C_norm <= direct * sup_inflation() * Real("1.001"));
}

TEST_CASE("empirical distance at least halves from stage 1 to stage 2") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    auto* c1 = find_check(tr.stage(1), "distance_empirical");
    auto* c2 = find_check(tr.stage(2), "distance_empirical");
    REQUIRE(c1);
    REQUIRE(c2);
    PrecisionScope ps(128);
    // margin = empirical / 2^{-n-r-1}
    Real e1 = Real(c1->margin) / 8 / 2, e2 = Real(c2->margin) / 16 / 2;
    CHECK(e2 <= e1 / 2);
    auto* b1 = find_check(tr.stage(1), "distance_ledger");
    auto* b2 = find_check(tr.stage(2), "distance_ledger");
    REQUIRE(b1);
    REQUIRE(b2);
    CHECK(Real(b1->margin) >= Real(c1->margin));
    CHECK(Real(b2->margin) >= Real(c2->margin));
}

TEST_CASE("level-one boundary points are fixed by h_2 exactly") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    const auto& s1 = tr.stage(1);
    const auto& h2 = tr.stage(2).h;
    std::size_t checked = 0;
    for (long j : {0L, 1L, 2L, 999999L, 123456L})
        for (const auto& b : s1.generator.boundary_points()) {
            Rational x = (Rational(j) + b) / Rational(s1.Q);
            auto y = h2.eval_exact(x);
            REQUIRE(y);
            CHECK(*y == x);
            ++checked;
        }
    CHECK(checked == 40);
}

TEST_CASE("commutation with the stage rotation") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    std::vector<Rational> xs;
    for (int k = 1; k < 50; ++k) xs.push_back(Rational(k, 53));
    auto c = check_commutation(tr.stage(1).h, tr.alpha(1), xs);
    CHECK(c.passed);
    auto id = check_commutation(PiecewiseMap::identity(), Rational(1, 3), xs);
    CHECK(id.passed);
}

TEST_CASE("re-verification reproduces the stored verdicts") {
    const auto& tr = flagship();
    REQUIRE(tr.passed());
    auto again = verify_stage(tr, 1);
    REQUIRE(again.size() == tr.stage(1).checks.size());
    for (std::size_t k = 0; k < again.size(); ++k) {
        CHECK(again[k].name == tr.stage(1).checks[k].name);
        CHECK(again[k].passed == tr.stage(1).checks[k].passed);
    }
}

TEST_CASE("a tiny denominator cap is reported as a budget failure") {
    auto c = flagship_config();
    c.max_stages = 1;
    c.limits.denominator_cap = BigInt(10);
    auto tr = run(c);
    CHECK(tr.failure == FailureKind::Budget);
    CHECK(tr.failed_stage == 1);
}
