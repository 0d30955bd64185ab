#include "circlefac/generators.hpp"
#include "circlefac/norms.hpp"

#include <doctest.h>

#include <cmath>

using namespace circlefac;

namespace {

// Independent model of the join transition, used for the maximal displacement
// of the lambda = 4 map: it is reached inside the join at a, where the slope
// 2 + (1/2 - 2) sigma(u) falls to 1, i.e. sigma(u*) = 2/3.
double tau_ref(double v) {
    if (v <= 0) return 0;
    if (v >= 1) return 1;
    return 1 / (1 + std::exp(1 / v - 1 / (1 - v)));
}

double sigma_ref(double u) { return u <= 0.5 ? tau_ref(2 * u) / 2 : 0.5 + tau_ref(2 * u - 1) / 2; }

double max_displacement_ref(double a, double delta) {
    double lo = 0, hi = 1;
    for (int k = 0; k < 200; ++k) {
        double m = (lo + hi) / 2;
        (sigma_ref(m) < 2.0 / 3 ? lo : hi) = m;
    }
    const int n = 20000;
    double h = lo / n, acc = 0;
    auto g = [](double u) { return 1 - 1.5 * sigma_ref(u); };
    acc = g(0) + g(lo);
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4 : 2) * g(k * h);
    return (a - delta) - 3 * delta / 8 + 2 * delta * acc * h / 3;
}

Real rel(const Real& a, const Real& b) { return b == 0 ? Real(abs(a)) : Real(abs(a - b) / abs(b)); }

}  // namespace

TEST_CASE("identity has map norm exactly 1") {
    PrecisionScope ps(128);
    for (unsigned r = 0; r <= 4; ++r) CHECK(cr_norm(PiecewiseMap::identity(), r, NormMode::MapAbs).value == 1);
}

TEST_CASE("rotation displacement is the circle distance") {
    PrecisionScope ps(128);
    for (Rational a : {Rational(1, 10), Rational(3, 4), Rational(1, 2), Rational(-2, 7)}) {
        auto rep = cr_norm(PiecewiseMap::rotation(a), 0, NormMode::DifferenceFromIdentity);
        CHECK(abs(rep.value - to_real(circle_distance(a))) < Real("1e-30"));
        auto d = cr_dist(PiecewiseMap::rotation(a), PiecewiseMap::rotation(Rational(1, 5)), 0);
        CHECK(abs(d.value - to_real(circle_distance(a - Rational(1, 5)))) < Real("1e-30"));
    }
}

TEST_CASE("lambda = 4 displacement stays below a, checked on a dense grid") {
    auto h = make_stage_III_lambda(4, Rational(1, 100)).map();
    Real adaptive;
    {
        PrecisionScope ps(128);
        adaptive = cr_norm(h, 0, NormMode::DifferenceFromIdentity).value;
    }
    PrecisionScope ps(64);
    double lo = 1, hi = -1;
    const int n = 1000000;
    for (int k = 0; k < n; ++k) {
        Real x = Real(k) / n;
        double d = static_cast<double>(h.eval(x) - x);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    double brute = std::max(std::abs(lo), std::abs(hi));
    CHECK(brute < 1.0 / 3);
    CHECK(static_cast<double>(adaptive) < 1.0 / 3);
    CHECK(static_cast<double>(adaptive) == doctest::Approx(brute).epsilon(1e-6));
    CHECK(brute == doctest::Approx(max_displacement_ref(1.0 / 3, 0.01)).epsilon(1e-7));
    CHECK(brute > 1.0 / 3 - 0.01 - 0.03 / 8);
}

TEST_CASE("distance of a map to itself vanishes") {
    PrecisionScope ps(128);
    auto h = make_stage_III_lambda(4, Rational(1, 100)).map();
    NormOptions opt;
    opt.initial_grid = 64;
    opt.rel_tol = 1e-3;
    for (unsigned r = 0; r <= 3; ++r) CHECK(cr_dist(h, h, r, opt).value == 0);
}

TEST_CASE("cyclic lift scales each derivative order by Q^(i-1)") {
    PrecisionScope ps(192);
    std::vector<PiecewiseMap> maps{make_stage_III_lambda(4, Rational(1, 100)).map(),
                                   make_stage_III_lambda(9, Rational(1, 200)).map(),
                                   make_stage_III_0(1, Rational(1, 1000)).map()};
    for (const auto& hhat : maps) {
        auto base = cr_norm(hhat, 3, NormMode::DifferenceFromIdentity);
        for (long Q : {2L, 5L, 12L}) {
            auto lifted = cr_norm(cyclic_lift(hhat, Q), 3, NormMode::DifferenceFromIdentity);
            for (unsigned i = 0; i <= 3; ++i) {
                Real expect = base.per_order[i] * to_real(rpow(Rational(Q), static_cast<long>(i) - 1));
                CHECK(rel(lifted.per_order[i], expect) < Real("1e-9"));
            }
            // Generators have their top order dominant, so the full norms obey the law too.
            for (unsigned r = 0; r <= 3; ++r) {
                auto a = cr_norm(cyclic_lift(hhat, Q), r, NormMode::DifferenceFromIdentity).value;
                auto b = cr_norm(hhat, r, NormMode::DifferenceFromIdentity).value;
                CHECK(rel(a, b * to_real(rpow(Rational(Q), static_cast<long>(r) - 1))) < Real("1e-9"));
            }
        }
    }
}

TEST_CASE("chain period of a lift") {
    auto h = cyclic_lift(make_stage_III_lambda(4, Rational(1, 100)).map(), 6);
    CHECK(chain_period(h) == 6);
    CHECK(chain_period(PiecewiseMap::rotation(Rational(1, 3))) == 1);
}

TEST_CASE("affine_at distinguishes cores from joins") {
    PrecisionScope ps(128);
    auto h = make_stage_III_lambda(4, Rational(1, 100)).map();
    CHECK(affine_at(h, Real("0.2")));
    CHECK_FALSE(affine_at(h, Real(1) / 3));
}
