#include "circlefac/construction.hpp"

#include "circlefac/ergodic.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace circlefac {

namespace bmp = boost::multiprecision;

namespace {

std::string fmt(const Real& x) { return x.str(8, std::ios_base::scientific); }

Real abs_real(const Real& x) { return x < 0 ? Real(-x) : x; }

Rational abs_rat(const Rational& x) { return x < 0 ? Rational(-x) : x; }

Rational pow2(long e) { return rpow(Rational(2), e); }

CheckResult make_check(std::string name, bool ok, std::string margin, std::string detail = {}) {
    return {std::move(name), ok, std::move(margin), std::move(detail)};
}

std::vector<Real> truncate(const std::vector<Real>& v, unsigned n) {
    std::vector<Real> out(v.begin(), v.begin() + std::min<std::size_t>(n, v.size()));
    while (out.size() < n) out.push_back(Real(0));
    return out;
}

GradedBounds identity_bounds(unsigned orders) {
    std::vector<Real> v(orders, Real(0));
    v[0] = 1;
    return constant_bounds(v);
}

// |f|_s <= max(1, D_1 + 1, D_j) from derivative bounds of f and f^-1.
Real abs_norm_bound(const std::vector<Real>& fwd, const std::vector<Real>& inv, unsigned s) {
    Real m = 1;
    for (unsigned j = 0; j < s && j < fwd.size(); ++j) {
        Real a = j == 0 ? Real(fwd[j] + 1) : fwd[j];
        Real b = j == 0 ? Real(inv[j] + 1) : inv[j];
        m = std::max({m, a, b});
    }
    return m;
}

Real poly_abs_bound(const GradedBounds& H, const GradedBounds& Hi, unsigned s) {
    std::vector<Real> f, g;
    for (unsigned j = 0; j < s; ++j) {
        f.push_back(poly_eval(H.D[j], Real(1)));
        g.push_back(poly_eval(Hi.D[j], Real(1)));
    }
    return abs_norm_bound(f, g, s);
}

}  // namespace

bool StageRecord::passed() const {
    if (checks.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const Rational& ConstructionTrace::alpha(unsigned n) const {
    if (n >= 1 && n <= stages.size()) return stages[n - 1].alpha();
    if (n == stages.size() + 1 && lookahead) return lookahead->alpha();
    throw std::out_of_range("alpha index out of range");
}

PiecewiseMap ConstructionTrace::f(unsigned n) const {
    if (n == 0) return PiecewiseMap::rotation(alpha(1));
    const auto& H = stage(n).H;
    return compose(H, compose(PiecewiseMap::rotation(alpha(n + 1)), H.inverse()));
}

unsigned ConstructionTrace::working_bits() const {
    BigInt Q = 1;
    for (const auto& s : stages) Q = std::max(Q, s.Q);
    return precision_for_scale(Q, config.precision_bits);
}

// ---------------------------------------------------------------- bounds

Real sup_inflation() { return Real(101) / 100; }

GeneratorSups generator_sups(const StageGenerator& g, unsigned orders, const NormOptions& opt) {
    GeneratorSups s;
    auto h = g.map();
    s.forward = derivative_sups(h, orders, opt);
    s.inverse = inverse_derivative_sups(h, orders, opt);
    for (auto& v : s.forward) v *= sup_inflation();
    for (auto& v : s.inverse) v *= sup_inflation();
    return s;
}

BoundLedger plan_constants(const std::vector<StageRecord>& previous, const StageGenerator& gen,
                           const GeneratorSups& sups, const BigInt& K, unsigned n, unsigned r) {
    unsigned s = n + r;
    unsigned orders = s + 1;
    if (sups.forward.size() < orders || sups.inverse.size() < orders)
        throw std::invalid_argument("plan_constants: generator sups do not reach order n + r + 1");
    if (previous.size() + 1 < n) throw std::invalid_argument("plan_constants: earlier stages missing");

    GradedBounds H = identity_bounds(orders), Hi = identity_bounds(orders);
    for (unsigned k = 0; k + 1 < n; ++k) {
        const auto& st = previous[k];
        H = compose_bounds(H, lifted_bounds(truncate(st.sups.forward, orders), st.Q, false));
        Hi = compose_bounds(lifted_bounds(truncate(st.sups.inverse, orders), st.Q, false), Hi);
    }
    Real A = poly_abs_bound(H, Hi, orders);
    H = compose_bounds(H, lifted_bounds(truncate(sups.forward, orders), K, true));
    Hi = compose_bounds(lifted_bounds(truncate(sups.inverse, orders), K, true), Hi);

    BoundLedger L;
    L.n = n;
    L.r = r;
    L.distance_poly = distance_polynomial(H, Hi, s);
    L.C = 2 * poly_coefficient_sum(L.distance_poly);
    L.N = poly_degree(L.distance_poly);
    L.provenance.push_back("generator sups of orders 1.." + std::to_string(orders) + " sampled and inflated by " +
                           fmt(sup_inflation()));
    L.provenance.push_back("H_n and H_n^-1 bounded order by order through Faa di Bruno over the lift chain");
    L.provenance.push_back("distance: sup_i |d^i H'(H^-1 + t)| <= G(q_n), scheduled with C = 2 sum(G), N = deg G");

    // Coarse chain, kept for comparison only.
    unsigned sp = s + 1;
    Real hnorm = abs_norm_bound(sups.forward, sups.inverse, sp);
    Real Kr = to_real(K);
    Real lift = hnorm * bmp::pow(Kr, sp - 1);
    if (n == 1) {
        L.coarse_C_norm = lift;
        L.coarse_N_norm = sp - 1;
    } else {
        L.coarse_C_norm = to_real(explicit_C(sp)) * bmp::pow(A, sp) * bmp::pow(lift, sp);
        L.coarse_N_norm = sp * (sp - 1);
    }
    L.coarse_C_dist = 2 * to_real(explicit_C(s)) * bmp::pow(L.coarse_C_norm, sp);
    L.coarse_N_dist = sp * L.coarse_N_norm;
    L.provenance.push_back("coarse chain: lifted generator norm " + fmt(hnorm) + ", composition constant C(" +
                           std::to_string(sp) + ") = " + to_string(explicit_C(sp)));
    (void)gen;
    return L;
}

std::pair<Rational, unsigned long> alpha_threshold(unsigned n, unsigned r, const Real& C, unsigned N) {
    if (C <= 0) throw std::invalid_argument("alpha_threshold: C must be positive");
    Rational target = pow2(-static_cast<long>(n + r + 1));
    Rational eps = round_down(to_real(target) / C, 64);
    while (to_real(eps) * C > to_real(target)) eps *= Rational(BigInt(1) << 60, (BigInt(1) << 60) + 1);
    return {eps, std::max<unsigned long>(N, 1)};
}

// ---------------------------------------------------------------- alpha selection

Rational alpha_gap_bound(const AlphaConstraints& c, const BigInt& q) {
    Rational b = witness_threshold(c.eps, q, c.N);
    if (c.delta) {
        Rational Kq = Rational(c.K * q);
        Rational e = (*c.delta) * (*c.delta) / (Kq * Kq) / Rational(q);
        if (e < b) b = e;
    }
    if (c.first_stage_gap) {
        Rational e = pow2(-static_cast<long>(c.r + 1));
        if (e < b) b = e;
    }
    return b;
}

namespace {

BigInt q_lower_bound(const AlphaConstraints& c) {
    BigInt m = 0;
    if (c.q_floor) m = std::max(m, *c.q_floor);
    if (c.lip_prev > 0) m = std::max(m, floor(c.lip_prev * pow2(c.n)));
    return m;
}

}  // namespace

AlphaSelection select_alpha(const IrrationalOracle& alpha, const AlphaConstraints& c, const SearchLimits& lim) {
    if (c.eps <= 0) throw std::invalid_argument("select_alpha: eps must be positive");
    Rational gap;
    Rational found = search_candidates(alpha, q_lower_bound(c), lim, [&](const Rational& cand) {
        if (cand <= 0 || cand >= 1) return false;
        Rational g;
        if (!gap_below(alpha, cand, alpha_gap_bound(c, denominator(cand)), lim, &g)) return false;
        if (c.prev_alpha && !gap_smaller(alpha, cand, *c.prev_alpha, lim)) return false;
        gap = g;
        return true;
    });
    return {found, c.eps, c.N, gap};
}

std::vector<CheckResult> check_alpha(const IrrationalOracle& alpha, const AlphaConstraints& c,
                                     const AlphaSelection& s, const SearchLimits& lim) {
    std::vector<CheckResult> out;
    const Rational& a = s.alpha;
    BigInt q = denominator(a);
    out.push_back(make_check("alpha_in_unit_interval", a > 0 && a < 1, to_string(a)));

    Rational thr = witness_threshold(c.eps, q, c.N);
    Rational gap;
    bool ok = gap_below(alpha, a, thr, lim, &gap);
    out.push_back(make_check("liouville_threshold", ok && s.eps == c.eps && s.N == c.N,
                             ok ? fmt(to_real(gap / thr)) : "-", "|alpha - p/q| < eps q^-N"));
    LiouvilleWitness w{a, c.eps, c.N, s.gap_bound};
    out.push_back(make_check("witness_roundtrip", verify_witness(w, alpha, lim), fmt(to_real(s.gap_bound / thr))));

    if (c.q_floor) out.push_back(make_check("denominator_growth", q > *c.q_floor, to_string(*c.q_floor),
                                            "q_n > 2 Q_{n-1} / delta_{n-1}"));
    if (c.delta) {
        Rational Kq = Rational(c.K * q);
        Rational e = (*c.delta) * (*c.delta) / (Kq * Kq) / Rational(q);
        Rational g2;
        bool ok2 = gap_below(alpha, a, e, lim, &g2);
        out.push_back(make_check("core_gap", ok2, ok2 ? fmt(to_real(g2 / e)) : "-",
                                 "|alpha_n - alpha| < delta_n^2 Q_n^-2 q_n^-1"));
    }
    if (c.prev_alpha)
        out.push_back(make_check("gap_decrease", gap_smaller(alpha, a, *c.prev_alpha, lim), "-",
                                 "|alpha_n - alpha| < |alpha_{n-1} - alpha|"));
    if (c.lip_prev > 0) {
        Rational need = c.lip_prev * pow2(c.n);
        out.push_back(make_check("uniform_convergence_budget", Rational(q) > need, to_string(need),
                                 "q_n > Lip(H_{n-1}) 2^n"));
    }
    if (c.first_stage_gap) {
        Rational e = pow2(-static_cast<long>(c.r + 1));
        out.push_back(make_check("first_stage_gap", gap_below(alpha, a, e, lim), to_string(e),
                                 "|alpha - alpha_1| < 2^{-r-1}"));
    }
    return out;
}

// ---------------------------------------------------------------- run

namespace {

AlphaConstraints stage_constraints(const std::vector<StageRecord>& prev, const StageRecord& st, unsigned r) {
    AlphaConstraints c;
    c.n = st.n;
    c.r = r;
    auto th = alpha_threshold(st.n, r, st.ledger.C, st.ledger.N);
    c.eps = th.first;
    c.N = th.second;
    c.delta = st.generator.delta;
    c.K = st.K;
    c.lip_prev = st.lip_prev;
    if (st.n == 1) {
        c.first_stage_gap = true;
    } else {
        const auto& p = prev[st.n - 2];
        c.q_floor = floor(2 * Rational(p.Q) / p.generator.delta);
        c.prev_alpha = p.alpha();
    }
    return c;
}

}  // namespace

void rebuild_maps(ConstructionTrace& trace) {
    PiecewiseMap Hprev;
    for (auto& st : trace.stages) {
        st.h = cyclic_lift(st.generator.map(), st.Q, true);
        st.H = compose(Hprev, st.h);
        st.built = true;
        Hprev = st.H;
    }
}

ConstructionTrace run(const ConstructionConfig& cfg) {
    if (cfg.max_stages < 1) throw std::invalid_argument("max_stages must be >= 1");
    if (cfg.r < 1) throw std::invalid_argument("r must be >= 1");
    cfg.family.validate();

    ConstructionTrace tr;
    tr.config = cfg;
    auto oracle = make_oracle(cfg.oracle);
    unsigned M = cfg.max_stages + 1;
    unsigned orders = M + cfg.r + 1;

    auto fail = [&](FailureKind k, unsigned n, const std::string& msg) {
        tr.failure = k;
        tr.failed_stage = n;
        tr.failure_message = msg;
        return tr;
    };

    std::vector<DeltaChoice> sched;
    try {
        sched = schedule_deltas(cfg.family, M, cfg.target_product);
    } catch (const std::exception& e) {
        return fail(FailureKind::Construction, 1, e.what());
    }
    for (std::size_t i = 0; i < cfg.delta_overrides.size() && i < sched.size(); ++i)
        sched[i] = {cfg.delta_overrides[i], 0, 0};

    Rational lip = 1;
    PiecewiseMap Hprev;
    for (unsigned n = 1; n <= M; ++n) {
        StageRecord st;
        st.n = n;
        st.schedule = sched[n - 1];
        try {
            st.generator = cfg.family.make(n, st.schedule.delta, st.schedule.denominator);
        } catch (const BudgetExceeded& e) {
            return fail(FailureKind::Budget, n, e.what());
        } catch (const std::exception& e) {
            return fail(FailureKind::Construction, n, e.what());
        }
        st.schedule.delta = st.generator.delta;
        st.schedule.delta_prime = st.generator.delta_prime;
        if (st.schedule.denominator == 0) st.schedule.denominator = st.generator.K_prime;
        {
            PrecisionScope ps(cfg.precision_bits);
            st.sups = generator_sups(st.generator, orders, cfg.norms);
        }
        if (n > 1) {
            const auto& p = tr.stages.back();
            st.K_prime_prev = p.generator.K_prime;
            st.K = p.Q * p.generator.K_prime;
        }
        st.lip_prev = lip;
        st.ledger = plan_constants(tr.stages, st.generator, st.sups, st.K, n, cfg.r);
        st.constraints = stage_constraints(tr.stages, st, cfg.r);
        try {
            st.selection = select_alpha(*oracle, st.constraints, cfg.limits);
        } catch (const SearchBudgetExceeded& e) {
            return fail(FailureKind::Budget, n, std::string("stage ") + std::to_string(n) + ": " + e.what());
        } catch (const PrecisionExhausted& e) {
            return fail(FailureKind::Budget, n, std::string("stage ") + std::to_string(n) + ": " + e.what());
        }
        if (n == M) {
            tr.lookahead = st;
            break;
        }
        st.Q = st.K * st.q();
        st.h = cyclic_lift(st.generator.map(), st.Q, true);
        st.H = compose(Hprev, st.h);
        st.built = true;
        Hprev = st.H;
        lip *= st.generator.table->max_slope();
        tr.stages.push_back(std::move(st));
    }

    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        tr.stages[n - 1].checks = verify_stage(tr, n);
        if (!tr.stages[n - 1].passed()) {
            std::string first;
            for (const auto& c : tr.stages[n - 1].checks)
                if (!c.passed) {
                    first = c.name;
                    break;
                }
            return fail(FailureKind::Verification, n, "stage " + std::to_string(n) + " check '" + first + "' failed");
        }
    }
    return tr;
}

// ---------------------------------------------------------------- verification pieces

CheckResult check_commutation(const PiecewiseMap& h, const Rational& a, const std::vector<Rational>& xs) {
    std::size_t tested = 0;
    for (const auto& x : xs) {
        auto lhs = h.eval_exact(x + a);
        auto rhs = h.eval_exact(x);
        if (!lhs || !rhs) continue;
        ++tested;
        if (*lhs != *rhs + a)
            return make_check("commutation", false, "0", "h(x + a) != h(x) + a at x = " + to_string(x));
    }
    bool ok = tested > 0 || xs.empty();
    return make_check("commutation", ok, std::to_string(tested) + " exact points",
                      ok ? "" : "no point evaluated exactly");
}

namespace {

std::vector<Real> local_positions(const StageGenerator& g, std::size_t m, std::size_t interior) {
    Real d = to_real(g.delta), a = to_real(g.a);
    std::vector<Real> u;
    for (std::size_t i = 0; i < m; ++i) {
        Real t = (Real(i) + Real(1) / 2) / Real(m);
        u.push_back(t * d);
        u.push_back(1 - d + t * d);
        u.push_back(a - d + 2 * d * t);
    }
    for (std::size_t k = 1; k <= interior; ++k) {
        Real t = Real(k) / Real(interior + 1);
        u.push_back(d + (a - 2 * d) * t);
        u.push_back(a + d + (1 - a - 2 * d) * t);
    }
    u.push_back(Real(0));
    u.push_back(a);
    return u;
}

std::vector<Real> stride(const std::vector<Real>& v, std::size_t cap) {
    if (v.size() <= cap) return v;
    std::vector<Real> out;
    for (std::size_t i = 0; i < cap; ++i) out.push_back(v[i * v.size() / cap]);
    return out;
}

struct SampleProfile {
    std::vector<Real> sup;                // per order
    std::vector<Real> per_sample;         // max over orders, per sample
};

SampleProfile profile_conjugated(const PiecewiseMap& H, const Real& t, unsigned s, const std::vector<Real>& ys) {
    SampleProfile p;
    p.sup.assign(s + 1, Real(0));
    for (const auto& y : ys) {
        Jet Jy = H.eval_jet(Jet::variable(y, s));
        Jet inv = Jy.revert(y);
        Real best = 0;
        for (int sign = -1; sign <= 1; sign += 2) {
            Real shift = sign * t;
            Jet Hz = H.eval_jet(Jet::variable(y + shift, s + 1)).differentiate();
            Jet phi = Jet::compose(Hz, inv + shift);
            for (unsigned i = 0; i <= s; ++i) {
                Real v = abs_real(phi.derivative(i));
                if (v > p.sup[i]) p.sup[i] = v;
                if (v > best) best = v;
            }
        }
        p.per_sample.push_back(best);
    }
    return p;
}

}  // namespace

std::vector<Real> stage_samples(const ConstructionTrace& trace, unsigned n, std::size_t per_window) {
    std::vector<Real> ys;
    for (unsigned k = 1; k <= n; ++k) {
        const auto& st = trace.stage(k);
        bool top = k == n;
        auto u = local_positions(st.generator, top ? per_window : 12, top ? 16 : 4);
        Real Q = to_real(st.Q);
        if (k == 1) {
            for (const auto& v : u) ys.push_back(v / Q);
            continue;
        }
        auto coarse = stride(ys, 48);
        ys.clear();
        for (const auto& y : coarse) {
            Real cell = bmp::floor(y * Q);
            for (const auto& v : u) ys.push_back((cell + v) / Q);
        }
    }
    return ys;
}

std::vector<Real> conjugated_rotation_sups(const PiecewiseMap& H, const Real& t, unsigned s,
                                           const std::vector<Real>& ys) {
    return profile_conjugated(H, t, s, ys).sup;
}

std::vector<Real> conjugated_rotation_difference(const PiecewiseMap& H, const Rational& b, const Rational& c,
                                                 unsigned s, const Real& y) {
    Jet Jy = H.eval_jet(Jet::variable(y, s));
    Jet inv = Jy.revert(y);
    Real rb = to_real(b), rc = to_real(c);
    Jet Fb = Jet::compose(H.eval_jet(Jet::variable(y + rb, s)), inv + rb);
    Jet Fc = Jet::compose(H.eval_jet(Jet::variable(y + rc, s)), inv + rc);
    Jet D = Fb - Fc;
    std::vector<Real> out;
    for (unsigned i = 0; i <= s; ++i) out.push_back(abs_real(D.derivative(i)));
    return out;
}

// ---------------------------------------------------------------- verify_stage

namespace {

std::vector<Rational> commutation_points(const StageRecord& st, std::size_t count, std::uint64_t seed) {
    const auto& g = st.generator;
    std::vector<Rational> us{Rational(0), g.delta, g.a - g.delta, g.a, g.a + g.delta, 1 - g.delta};
    for (int k = 1; k <= 20; ++k) {
        us.push_back(g.J_plus.lo + (g.J_plus.hi - g.J_plus.lo) * Rational(k, 21));
        us.push_back(g.J_minus.lo + (g.J_minus.hi - g.J_minus.lo) * Rational(k, 21));
    }
    std::mt19937_64 rng(seed);
    std::vector<Rational> xs;
    for (std::size_t i = 0; i < count; ++i) {
        BigInt cell = BigInt(rng()) * BigInt(rng()) % st.Q;
        xs.push_back((Rational(cell) + us[i % us.size()]) / Rational(st.Q));
    }
    return xs;
}

CheckResult check_boundary_fixed(const ConstructionTrace& tr, unsigned n) {
    const auto& st = tr.stage(n);
    const auto& cfg = tr.config;
    std::size_t evaluated = 0;
    for (unsigned k = 1; k < n; ++k) {
        const auto& sk = tr.stage(k);
        if (st.Q % sk.Q != 0)
            return make_check("boundary_fixed", false, "-", "Q_" + std::to_string(k) + " does not divide Q_n");
        BigInt ratio = st.Q / sk.Q;
        auto pts = sk.generator.boundary_points();
        pts.push_back(Rational(0));
        for (const auto& b : pts)
            if (Rational(ratio) * b != Rational(floor(Rational(ratio) * b)))
                return make_check("boundary_fixed", false, "-",
                                  "level-" + std::to_string(k) + " point " + to_string(b) + " not on the Q_n grid");
        auto test = [&](const BigInt& j, const Rational& b) {
            Rational x = (Rational(j) + b) / Rational(sk.Q);
            auto v = st.h.eval_exact(x);
            ++evaluated;
            return v && *v == x;
        };
        BigInt total = sk.Q * pts.size();
        if (total <= BigInt(cfg.boundary_enumeration_limit)) {
            for (BigInt j = 0; j < sk.Q; ++j)
                for (const auto& b : pts)
                    if (!test(j, b))
                        return make_check("boundary_fixed", false, "-",
                                          "h_n moves (" + to_string(j) + " + " + to_string(b) + ")/Q_" +
                                              std::to_string(k));
        } else {
            std::mt19937_64 rng(cfg.seed + k);
            for (std::size_t i = 0; i < cfg.boundary_samples; ++i) {
                BigInt j = BigInt(rng()) * BigInt(rng()) % sk.Q;
                const auto& b = pts[i % pts.size()];
                if (!test(j, b))
                    return make_check("boundary_fixed", false, "-",
                                      "h_n moves (" + to_string(j) + " + " + to_string(b) + ")/Q_" +
                                          std::to_string(k));
            }
        }
    }
    return make_check("boundary_fixed", true, std::to_string(evaluated) + " exact points",
                      n == 1 ? "no earlier levels" : "grid divisibility certified for every earlier level");
}

}  // namespace

std::vector<CheckResult> verify_stage(const ConstructionTrace& tr, unsigned n) {
    if (n < 1 || n > tr.stages.size()) throw std::out_of_range("verify_stage: no such stage");
    const auto& cfg = tr.config;
    const auto& st = tr.stage(n);
    const unsigned r = cfg.r;
    const unsigned s = n + r;
    PrecisionScope ps(tr.working_bits());
    std::vector<CheckResult> out;
    auto oracle = make_oracle(cfg.oracle);

    // Generator and cover bookkeeping.
    {
        auto bad = st.generator.check();
        bool ok = bad.empty() && st.generator.delta_prime == st.schedule.delta_prime;
        out.push_back(make_check("generator", ok, to_string(st.generator.delta_prime), bad.empty() ? "" : bad.front()));
        BigInt K = 1;
        if (n > 1) K = tr.stage(n - 1).Q * tr.stage(n - 1).generator.K_prime;
        bool ok2 = st.K == K && st.Q == st.K * st.q();
        out.push_back(make_check("cover_bookkeeping", ok2, to_string(st.Q),
                                 ok2 ? "Q_n = K(n) q_n, K(n) = Q_{n-1} K'(n-1)" : "K(n) or Q_n inconsistent"));
    }

    // Commutation with the stage rotation.
    {
        auto c = check_commutation(st.h, st.alpha(), commutation_points(st, cfg.commutation_points, cfg.seed + n));
        out.push_back(c);
    }

    // Distance of successive approximants.
    const Rational& an = tr.alpha(n);
    const Rational& an1 = tr.alpha(n + 1);
    Rational dalpha = abs_rat(an - an1);
    Real thr = to_real(pow2(-static_cast<long>(n + r + 1)));
    auto ys = stage_samples(tr, n, cfg.window_samples);
    Real t = to_real((an + an1) / 2);
    auto prof = profile_conjugated(st.H, t, s, ys);
    Real supmax = *std::max_element(prof.sup.begin(), prof.sup.end());
    Real empirical = to_real(dalpha) * supmax;
    out.push_back(make_check("distance_empirical", empirical < thr, fmt(empirical / thr),
                             "d_{n+r}(f_{n-1}, f_n) = " + fmt(empirical) + " over " + std::to_string(ys.size()) +
                                 " samples"));
    {
        // Direct differences at the largest samples, with enough extra bits to
        // resolve |alpha_n - alpha_{n+1}|.
        std::vector<std::size_t> idx(ys.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::size_t top = std::min<std::size_t>(8, idx.size());
        std::partial_sort(idx.begin(), idx.begin() + top, idx.end(),
                          [&](std::size_t a, std::size_t b) { return prof.per_sample[a] > prof.per_sample[b]; });
        long extra = -floor_log2(dalpha) + 96;
        PrecisionScope hi(tr.working_bits() + static_cast<unsigned>(std::max<long>(extra, 64)));
        Real worst = 0;
        Real scale = to_real(dalpha) * supmax;
        for (std::size_t k = 0; k < top; ++k) {
            Real y = ys[idx[k]];
            auto direct = conjugated_rotation_difference(st.H, an, an1, s, y);
            // The one-sided value is what the direct difference measures.
            Jet Jy = st.H.eval_jet(Jet::variable(y, s));
            Jet inv = Jy.revert(y);
            Real tt = to_real((an + an1) / 2);
            Jet phi = Jet::compose(st.H.eval_jet(Jet::variable(y + tt, s + 1)).differentiate(), inv + tt);
            for (unsigned i = 0; i <= s; ++i) {
                Real d = abs_real(direct[i] - to_real(dalpha) * abs_real(phi.derivative(i)));
                if (scale > 0 && d / scale > worst) worst = d / scale;
            }
        }
        out.push_back(make_check("distance_linearization", worst < Real(1e-6), fmt(worst),
                                 "direct difference vs linearised estimate, relative to the sup"));
    }
    {
        Real G = poly_eval(st.ledger.distance_poly, to_real(st.q()));
        Real bound = G * to_real(dalpha);
        bool ok = bound < thr && bound >= empirical;
        out.push_back(make_check("distance_ledger", ok, fmt(bound / thr),
                                 "G(q_n) |alpha_n - alpha_{n+1}| = " + fmt(bound) + " (a priori, >= empirical)"));
    }

    out.push_back(check_boundary_fixed(tr, n));

    // Uniform convergence: ||H_n - H_{n-1}||_0 <= Lip(H_{n-1}) / q_n.
    {
        PiecewiseMap Hprev = n == 1 ? PiecewiseMap::identity() : tr.stage(n - 1).H;
        Rational lip = Hprev.lipschitz_bound();
        Real worst = 0;
        for (const auto& y : ys) {
            Real d = abs_real(st.H.eval(y) - Hprev.eval(y));
            if (d > worst) worst = d;
        }
        NormOptions o = cfg.norms;
        Real disp = cr_norm(st.generator.map(), 0, NormMode::DifferenceFromIdentity, o).value;
        Real apriori = to_real(lip) * disp / to_real(st.Q);
        Real lim = to_real(lip / Rational(st.q()));
        bool ok = worst <= lim && apriori <= lim && lip == st.lip_prev;
        out.push_back(make_check("uniform_convergence", ok, fmt(worst / lim),
                                 "sampled " + fmt(worst) + ", a priori " + fmt(apriori) + ", limit " + fmt(lim)));
    }

    // Selection constraints, rebuilt from the trace.
    {
        std::vector<StageRecord> prev(tr.stages.begin(), tr.stages.begin() + (n - 1));
        auto c = stage_constraints(prev, st, r);
        for (auto& ch : check_alpha(*oracle, c, st.selection, cfg.limits)) {
            ch.name = "selection." + ch.name;
            out.push_back(ch);
        }
        if (n == tr.stages.size() && tr.lookahead) {
            auto cl = stage_constraints(tr.stages, *tr.lookahead, r);
            for (auto& ch : check_alpha(*oracle, cl, tr.lookahead->selection, cfg.limits)) {
                ch.name = "lookahead." + ch.name;
                out.push_back(ch);
            }
        }
    }

    // Periodic orbit and rotation number of f_n.
    {
        auto f = tr.f(n);
        BigInt qn1 = denominator(an1), pn1 = numerator(an1);
        std::size_t steps = std::max(cfg.orbit_cap, cfg.birkhoff_iterates);
        if (BigInt(steps) > qn1) steps = static_cast<std::size_t>(qn1.convert_to<unsigned long long>());
        Real x = 0;
        Real worst = 0;
        Real at_birkhoff = 0;
        for (std::size_t k = 1; k <= steps; ++k) {
            x = f.eval(x);
            Real merged = st.H.eval(to_real(an1 * k));
            Real d = abs_real(x - merged);
            if (d > worst) worst = d;
            if (k == cfg.birkhoff_iterates) at_birkhoff = x;
        }
        Real tol("1e-9");
        out.push_back(make_check("orbit_consistency", worst < tol, fmt(worst),
                                 std::to_string(steps) + " literal iterates vs H_n R^k H_n^-1"));
        Real closing;
        std::string how;
        if (BigInt(steps) == qn1) {
            closing = abs_real(x - to_real(pn1));
            how = "literal orbit of length q_{n+1}";
        } else {
            // f_n^q = H_n R_{q alpha} H_n^-1 and q alpha_{n+1} = p is an integer.
            closing = abs_real(st.H.eval(to_real(pn1)) - to_real(pn1));
            how = "conjugacy power f_n^q = H_n R_p H_n^-1";
        }
        out.push_back(make_check("periodic_orbit", closing < tol, fmt(closing), how));
        auto est = rotation_number(f, cfg.birkhoff_iterates);
        Real err = abs_real(est.value - to_real(an1));
        out.push_back(make_check("rotation_number", err <= est.error_bound, fmt(err),
                                 "Birkhoff estimate " + fmt(est.value) + " +- " + fmt(est.error_bound)));
        (void)at_birkhoff;
    }
    return out;
}

}  // namespace circlefac
