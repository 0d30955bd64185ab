// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include "circlefac/bounds.hpp"
#include "circlefac/ergodic.hpp"
#include "circlefac/norms.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace circlefac;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void need(bool cond, const std::string& what) {
        if (!cond) {
            if (ok) detail << "first failure: " << what << "; ";
            ok = false;
        }
    }
};

ConstructionConfig config_for(StageType type) {
    ConstructionConfig c;
    c.family.type = type;
    c.family.lambda = 4;
    c.r = 1;
    c.max_stages = 2;
    c.oracle.kind = "factorial_series";
    c.oracle.base = 10;
    return c;
}

const ConstructionTrace& trace_for(StageType type) {
    static std::map<StageType, ConstructionTrace> cache;
    auto it = cache.find(type);
    if (it == cache.end()) it = cache.emplace(type, run(config_for(type))).first;
    return it->second;
}

const CheckResult* find_check(const std::vector<CheckResult>& checks, const std::string& name) {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

// The number printed after " = " in a check detail.
Real value_after_equals(const std::string& detail) {
    auto p = detail.find(" = ");
    if (p == std::string::npos) throw std::runtime_error("no value in '" + detail + "'");
    std::istringstream in(detail.substr(p + 3));
    std::string word;
    in >> word;
    return Real(word);
}

bool all_passed(const std::vector<CheckResult>& checks, Outcome& o, const std::string& where) {
    bool ok = true;
    for (const auto& c : checks)
        if (!c.passed) {
            o.need(false, where + "." + c.name + " " + c.detail);
            ok = false;
        }
    return ok;
}

// 1. Flagship run with every stage check, empirical and a priori distance below 2^{-n-r-1}.
void flagship(Outcome& o) {
    const auto& tr = trace_for(StageType::III_lambda);
    o.need(tr.passed(), "construction: " + tr.failure_message);
    o.need(tr.stages.size() == 2, "two stages");
    const unsigned r = tr.config.r;
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto checks = verify_stage(tr, n);
        all_passed(checks, o, "stage" + std::to_string(n));
        Real threshold = pow(Real(2), -static_cast<int>(n + r + 1));
        const auto* emp = find_check(checks, "distance_empirical");
        const auto* led = find_check(checks, "distance_ledger");
        o.need(emp && led, "distance checks present");
        if (!emp || !led) continue;
        Real d = value_after_equals(emp->detail), b = value_after_equals(led->detail);
        o.need(d < threshold, "empirical distance below threshold at n = " + std::to_string(n));
        o.need(b < threshold, "ledger bound below threshold at n = " + std::to_string(n));
        o.need(d <= b, "ledger bound dominates the empirical distance");
        o.detail << "n=" << n << ": d=" << d.str(3) << " ledger=" << b.str(3) << " threshold=" << threshold.str(3)
                 << "; ";
    }
}

// 2. Exact measure identity at depths 1 and 2 with partial products above 9/10.
void measures(Outcome& o) {
    const auto& tr = trace_for(StageType::III_lambda);
    Rational product = 1;
    for (unsigned n = 1; n <= 2; ++n) {
        auto m = xi_measure(tr, n);
        product *= 1 - tr.stage(n).generator.delta_prime;
        o.need(m.exact == product, "product formula at depth " + std::to_string(n));
        o.need(m.direct == m.exact && m.match, "direct image sum at depth " + std::to_string(n));
        o.need(m.equal_measure, "equal image lengths across representatives");
        for (const auto& p : m.partial_products) o.need(p > Rational(9, 10), "partial product above 9/10");
        o.detail << "m(Xi_" << n << ") = " << to_string(m.direct) << "; ";
    }
}

// 3. Exhaustive depth-1 pair scan in lambda^Z and a return pair with derivative lambda.
void ratio_III_lambda(Outcome& o) {
    const auto& tr = trace_for(StageType::III_lambda);
    auto scan = component_pair_scan(tr, 1);
    o.need(scan.exhaustive, "depth-1 scan exhaustive");
    o.need(scan.pairs > 0 && scan.realised == scan.pairs, "every ordered pair realised");
    o.need(scan.violations == 0, "no lambda^Z violation at depth 1");
    for (const auto& s : scan.samples)
        o.need(ratio_rule_violation(StageType::III_lambda, 1, s.value).empty(), "sample " + s.value.describe());
    auto scan2 = component_pair_scan(tr, 2);
    o.need(scan2.violations == 0 && scan2.realised == scan2.pairs, "depth-2 representatives");
    auto mem = ratio_membership(tr, 1, component_midpoints(tr, 1, 4), 500);
    o.need(mem.violations == 0 && mem.returns > 0, "membership scan");
    auto rp = find_return_pair(tr, 1, tr.config.family.lambda);
    o.need(rp.found, "return pair with derivative lambda: " + rp.diagnostic);
    if (rp.found) {
        o.need(rp.value.exponent("lambda^(1/2)") == 2 && rp.value.exact, "exponent of the return pair");
        PrecisionScope ps(tr.working_bits());
        Real num = numeric_derivative(tr, 1, rp.x, rp.i);
        o.need(abs(num - 4) < Real("1e-9"), "jet evaluation of the return derivative");
    }
    o.detail << scan.summary << "; return pair value " << rp.value.describe();
}

// 4. II_infty: plus-returns have zero exponents; singularity diagnostic.
void two_infinity(Outcome& o) {
    const auto& tr = trace_for(StageType::II_infty);
    o.need(tr.passed(), "II_infty construction: " + tr.failure_message);
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto scan = component_pair_scan(tr, n);
        o.need(scan.violations == 0 && scan.realised == scan.pairs && scan.pairs > 0, "plus pair scan");
        for (const auto& s : scan.samples) o.need(s.value.zero(), "zero exponent vector");
        auto mem = ratio_membership(tr, n, component_midpoints(tr, n, 4, true), 500);
        o.need(mem.violations == 0 && mem.returns > 0, "plus membership scan");
        for (const auto& s : mem.samples) o.need(s.value.zero(), "zero exponent vector on scanned returns");
    }
    auto s = singularity_diagnostic(tr, 2);
    o.need(s.verdict, "singularity verdict");
    o.need(s.x_plus.size() == 2 && s.x_plus[1] < s.x_plus[0], "m(X^+) strictly decreasing");
    o.need(s.ratio_21 <= Rational(1, 4), "m(X_2^+)/m(X_1^+) <= 1/4");
    for (std::size_t k = 0; k < s.xi_plus.size(); ++k) {
        o.need(s.xi_plus[k] > Rational(4, 5), "m(Xi^+) above 0.8");
        o.need(s.xi_plus[k] == s.xi_plus_formula[k], "interval images match the slope formula");
    }
    // Independent depth-1 check: sum the exact images of the X_1^+ components of four domains.
    auto L = build_level_sets(tr, 1, LevelKind::X_plus, 1000, RationalInterval{0, Rational(BigInt(4), tr.stage(1).Q)});
    Rational sum = 0;
    for (const auto& c : L.components) {
        auto img = image_of_component(tr, 1, c);
        o.need(img.has_value(), "exact image of an X_1^+ component");
        if (img) sum += img->hi - img->lo;
    }
    o.need(!L.components.empty() && sum * Rational(L.total_count) / Rational(BigInt(L.components.size())) == s.xi_plus[0],
           "depth-1 image oracle");
    o.detail << s.summary << "ratio " << to_string(s.ratio_21);
}

// 5. III_0 gap law at depth 2.
void three_zero(Outcome& o) {
    const auto& tr = trace_for(StageType::III_0);
    o.need(tr.passed(), "III_0 construction: " + tr.failure_message);
    std::size_t nontrivial = 0;
    long smallest = 0;
    auto judge = [&](const CocycleValue& v) {
        o.need(v.exact, "exact return value");
        long e = std::labs(v.exponent("3"));
        if (e == 0) return;
        ++nontrivial;
        smallest = smallest == 0 ? e : std::min(smallest, e);
        o.need(e >= 3, "|log_3| >= 3 for " + v.describe());
        o.need(ratio_rule_violation(StageType::III_0, 2, v).empty(), "gap rule");
    };
    auto scan = component_pair_scan(tr, 2);
    o.need(scan.violations == 0 && scan.realised == scan.pairs, "depth-2 pair scan");
    for (const auto& s : scan.samples) judge(s.value);
    auto mem = ratio_membership(tr, 2, component_midpoints(tr, 2, 4), 500);
    o.need(mem.violations == 0, "depth-2 membership scan");
    for (const auto& s : mem.samples) judge(s.value);
    o.need(nontrivial > 0, "at least one nontrivial return");
    o.detail << nontrivial << " nontrivial returns, smallest |log_3| = " << smallest;
}

// 6. ||h - Id||_r = ||hhat - Id||_r Q^(r-1) for five generators.
void lift_scaling(Outcome& o) {
    PrecisionScope ps(192);
    std::vector<PiecewiseMap> maps{make_stage_III_lambda(4, Rational(1, 100)).map(),
                                   make_stage_III_lambda(9, Rational(1, 300)).map(),
                                   make_stage_III_infty(1, 2, 3, Rational(1, 100)).map(),
                                   make_stage_III_0(1, Rational(1, 1000)).map(),
                                   make_stage_II_infty(4, Rational(1, 2000)).map()};
    Real worst = 0;
    for (const auto& hhat : maps)
        for (unsigned r = 0; r <= 3; ++r) {
            Real base = cr_norm(hhat, r, NormMode::DifferenceFromIdentity).value;
            for (long Q : {2L, 5L, 12L}) {
                Real lifted = cr_norm(cyclic_lift(hhat, Q), r, NormMode::DifferenceFromIdentity).value;
                Real expect = base * to_real(rpow(Rational(Q), static_cast<long>(r) - 1));
                Real rel = abs(lifted - expect) / expect;
                if (rel > worst) worst = rel;
                o.need(rel < Real("1e-9"), "scaling law at r = " + std::to_string(r) + ", Q = " + std::to_string(Q));
            }
        }
    o.detail << "60 cases, worst relative error " << worst.str(3);
}

PiecewiseMap random_map(std::mt19937_64& rng) {
    static const Rational lambdas[] = {4, 9, 16, Rational(25, 4)};
    Rational lambda = lambdas[rng() % 4];
    Rational delta(1, 50 + static_cast<long>(rng() % 350));
    auto l = cyclic_lift(make_stage_III_lambda(lambda, delta).map(), 1 + static_cast<long>(rng() % 3));
    if (rng() % 2) return compose(PiecewiseMap::rotation(Rational(static_cast<long>(rng() % 97), 97)), l);
    return l;
}

// 7. Composition and conjugated-rotation bounds on randomized maps.
void bound_soundness(Outcome& o) {
    PrecisionScope ps(96);
    NormOptions opt;
    opt.initial_grid = 128;
    opt.rel_tol = 1e-3;
    std::mt19937_64 rng(1);
    Real tightest = -1;
    for (int k = 0; k < 50; ++k) {
        unsigned r = 1 + k % 4;
        auto f = random_map(rng), g = random_map(rng);
        auto b = bound_compose(cr_norm(f, r, NormMode::MapAbs, opt).value,
                               cr_norm(f, r, NormMode::DifferenceFromIdentity, opt).value,
                               cr_norm(g, r, NormMode::MapAbs, opt).value, r);
        Real got = cr_norm(compose(f, g), r, NormMode::MapAbs, opt).value;
        o.need(got <= b.abs_bound, "composition pair " + std::to_string(k));
        Real ratio = got / b.abs_bound;
        if (ratio > tightest) tightest = ratio;
    }
    for (int k = 0; k < 20; ++k) {
        unsigned r = 1 + k % 3;
        auto H = random_map(rng);
        Rational a(static_cast<long>(rng() % 1000), 1000), gap(1, 1000 + static_cast<long>(rng() % 9000));
        auto f1 = compose(compose(H, PiecewiseMap::rotation(a)), H.inverse());
        auto f2 = compose(compose(H, PiecewiseMap::rotation(a + gap)), H.inverse());
        Real bound = bound_conjugated_rotations(cr_norm(H, r + 1, NormMode::MapAbs, opt).value, r, to_real(gap));
        Real got = cr_dist(f1, f2, r, opt).value;
        o.need(got <= bound, "conjugated rotation " + std::to_string(k));
        Real ratio = got / bound;
        if (ratio > tightest) tightest = ratio;
    }
    o.detail << "50 pairs and 20 conjugators, largest norm/bound " << tightest.str(3);
}

// 8. Every selected alpha re-verifies; 100 generated witnesses round-trip.
void liouville(Outcome& o) {
    std::size_t verified = 0;
    for (auto type : {StageType::III_lambda, StageType::II_infty, StageType::III_0}) {
        const auto& tr = trace_for(type);
        if (!tr.passed()) continue;
        auto oracle = make_oracle(tr.config.oracle);
        std::vector<const StageRecord*> records;
        for (const auto& st : tr.stages) records.push_back(&st);
        if (tr.lookahead) records.push_back(&*tr.lookahead);
        for (std::size_t k = 0; k < records.size(); ++k) {
            const auto& st = *records[k];
            all_passed(check_alpha(*oracle, st.constraints, st.selection, tr.config.limits), o,
                       to_string(type) + ".alpha" + std::to_string(k + 1));
            if (k > 0)
                o.need(gap_smaller(*oracle, st.alpha(), records[k - 1]->alpha(), tr.config.limits),
                       "strict gap decrease at alpha" + std::to_string(k + 1));
            ++verified;
        }
    }
    std::mt19937_64 rng(1);
    std::size_t round_trips = 0;
    for (int k = 0; k < 100; ++k) {
        std::shared_ptr<const IrrationalOracle> a;
        unsigned long N;
        Rational eps;
        if (k % 4 == 3) {
            // Badly approximable control: eps must stay above 1/sqrt(5).
            a = std::make_shared<GoldenRatioOracle>();
            N = 2;
            eps = Rational(5 + static_cast<long>(rng() % 5), 10);
        } else {
            a = std::make_shared<FactorialSeriesOracle>(BigInt(2 + static_cast<long>(rng() % 9)));
            N = 1 + rng() % 4;
            eps = Rational(1 + static_cast<long>(rng() % 9), 10);
        }
        BigInt q_min = 1 + static_cast<long>(rng() % 5000);
        auto w = liouville_search(*a, eps, N, q_min);
        bool ok = verify_witness(w, *a) && denominator(w.approx) > q_min;
        o.need(ok, "witness " + std::to_string(k));
        round_trips += ok;
    }
    o.detail << verified << " selected alphas re-verified, " << round_trips << "/100 witnesses";
}

// 9. Periodic orbit certificate and Birkhoff estimate.
void rotation(Outcome& o) {
    const auto& tr = trace_for(StageType::III_lambda);
    PrecisionScope ps(tr.working_bits());
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        const auto& H = tr.stage(n).H;
        const Rational& next = tr.alpha(n + 1);
        const BigInt p = numerator(next);
        // f_n^q = H_n R^q H_n^-1, and R^q moves H_n^-1(x0) by exactly p.
        Real x0 = H.eval(Real(0));
        Real back = H.inverse().eval(x0);
        Real orbit = H.eval(Real(back + to_real(Rational(p))));
        Real miss = abs(orbit - to_real(Rational(p)) - x0);
        o.need(miss < Real("1e-9"), "periodic orbit at n = " + std::to_string(n));
        auto est = rotation_number(tr.f(n), 1000);
        Real err = abs(est.value - to_real(next));
        o.need(err <= est.error_bound, "Birkhoff estimate at n = " + std::to_string(n));
        auto checks = verify_stage(tr, n);
        for (const char* name : {"periodic_orbit", "rotation_number", "orbit_consistency"}) {
            const auto* c = find_check(checks, name);
            o.need(c && c->passed, std::string(name) + " at n = " + std::to_string(n));
        }
        o.detail << "n=" << n << ": orbit miss " << miss.str(3) << ", Birkhoff error " << err.str(3) << " <= "
                 << est.error_bound.str(3) << "; ";
    }
}

}  // namespace

int main(int argc, char** argv) {
    // Optional arguments select criteria by number.
    std::set<std::string> only(argv + 1, argv + argc);
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"1 flagship run and distance thresholds", flagship},
        {"2 exact measure identity", measures},
        {"3 III_lambda ratio membership and return pair", ratio_III_lambda},
        {"4 II_infty plus-returns and singularity", two_infinity},
        {"5 III_0 gap law at depth 2", three_zero},
        {"6 lift scaling law", lift_scaling},
        {"7 bound soundness", bound_soundness},
        {"8 Liouville certification", liouville},
        {"9 periodic orbit and rotation number", rotation},
    };
    int failures = 0;
    for (const auto& [name, body] : criteria) {
        if (!only.empty() && !only.count(name.substr(0, name.find(' ')))) continue;
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            body(o);
        } catch (const std::exception& e) {
            o.need(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.ok ? "PASS " : "FAIL ") << name << "  (" << o.detail.str() << " " << static_cast<long>(secs)
                  << " s)" << std::endl;
        failures += !o.ok;
    }
    return failures == 0 ? 0 : 1;
}
