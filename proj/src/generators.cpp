#include "circlefac/generators.hpp"

#include <boost/multiprecision/integer.hpp>

namespace circlefac {

namespace bmp = boost::multiprecision;

std::string to_string(StageType t) {
    switch (t) {
        case StageType::III_lambda: return "III_lambda";
        case StageType::III_infty: return "III_inf";
        case StageType::III_0: return "III_0";
        case StageType::II_infty: return "II_inf";
    }
    return "?";
}

StageType parse_stage_type(const std::string& text) {
    if (text == "III_lambda") return StageType::III_lambda;
    if (text == "III_inf" || text == "III_infty") return StageType::III_infty;
    if (text == "III_0") return StageType::III_0;
    if (text == "II_inf" || text == "II_infty") return StageType::II_infty;
    throw std::invalid_argument("unknown type '" + text + "' (expected III_lambda, III_inf, III_0 or II_inf)");
}

SlopeData make_slopes(std::string symbol, const Rational& base, long exp_plus, long exp_minus) {
    SlopeData s;
    s.symbol = std::move(symbol);
    s.base = base;
    s.exp_plus = exp_plus;
    s.exp_minus = exp_minus;
    s.slope_plus = rpow(base, exp_plus);
    s.slope_minus = rpow(base, exp_minus);
    return s;
}

std::optional<Rational> exact_sqrt(const Rational& x) {
    if (x < 0) return std::nullopt;
    BigInt p = numerator(x), q = denominator(x);
    BigInt sp = bmp::sqrt(p), sq = bmp::sqrt(q);
    if (sp * sp != p || sq * sq != q) return std::nullopt;
    return Rational(sp, sq);
}

std::vector<Rational> StageGenerator::boundary_points() const {
    return {J_plus.lo, J_plus.hi, J_minus.lo, J_minus.hi, I_plus.lo, I_plus.hi, I_minus.lo, I_minus.hi};
}

Rational delta_prime_of(const SlopeData& s, const Rational& delta) {
    return 4 * delta * (s.slope_plus + s.slope_minus);
}

StageGenerator make_two_slope(StageType type, unsigned index, const SlopeData& slopes, const Rational& delta_in,
                              const BigInt& denominator) {
    const Rational& sp = slopes.slope_plus;
    const Rational& sm = slopes.slope_minus;
    if (!(sp > 1 && sm > 0 && sm < 1)) throw GeometryInfeasible("slopes must satisfy s- < 1 < s+");
    if (delta_in <= 0) throw GeometryInfeasible("delta must be positive");
    Rational a = (1 - sm) / (sp - sm);

    Rational d = delta_in;
    if (denominator > 0) {
        if (denominator % ::circlefac::denominator(a) != 0)
            throw GeometryInfeasible("crossing point a = " + to_string(a) + " is not on the breakpoint grid 1/" +
                                     to_string(denominator));
        d = Rational(floor(d * denominator), denominator);
        if (d <= 0) throw GeometryInfeasible("delta vanishes on the breakpoint grid");
    }
    if (!(4 * d < a && 4 * d < 1 - a))
        throw GeometryInfeasible("join windows overlap the cores: need 4 delta < min(a, 1 - a), delta = " +
                                 to_string(d) + ", a = " + to_string(a));

    // Join around 0 centred so that the value at 0 is 0 (S(1/2) = 1/8).
    Rational w = 2 * d;
    Rational sv0 = -(sm * d + (sp - sm) * d / 4);
    Rational ip = -(sp - sm) * d / 4;
    Rational va = sp * (a - d) + ip;
    Rational vad = va + sp * w + (sm - sp) * d;
    Rational im = vad - sm * (a + d);

    std::vector<Piece> pieces;
    pieces.push_back({0, d, JoinPiece{-d, w, sv0, sm, sp}});
    pieces.push_back({d, a - d, AffinePiece{sp, ip}});
    pieces.push_back({a - d, a + d, JoinPiece{a - d, w, va, sp, sm}});
    pieces.push_back({a + d, 1 - d, AffinePiece{sm, im}});
    pieces.push_back({1 - d, 1, JoinPiece{1 - d, w, sv0 + 1, sm, sp}});

    StageGenerator g;
    g.type = type;
    g.index = index;
    g.slopes = slopes;
    g.a = a;
    g.delta = d;
    g.J_plus = {d, a - d};
    g.J_minus = {a + d, 1 - d};
    g.I_plus = {2 * d, a - 2 * d};
    g.I_minus = {a + 2 * d, 1 - 2 * d};
    g.table = std::make_shared<PieceTable>(std::move(pieces), to_string(type) + "#" + std::to_string(index));
    Rational image = sp * (g.I_plus.hi - g.I_plus.lo) + sm * (g.I_minus.hi - g.I_minus.lo);
    g.delta_prime = 1 - image;
    BigInt K = 1;
    for (const auto& b : g.boundary_points()) K = lcm(K, ::circlefac::denominator(b));
    g.K_prime = K;
    return g;
}

std::vector<std::string> StageGenerator::check() const {
    std::vector<std::string> bad = table->validate();
    auto h = map();
    auto v0 = h.eval_exact(Rational(0));
    if (!v0 || *v0 != 0) bad.push_back("hhat(0) != 0");
    // Affinity on J+- at evenly spaced rationals.
    for (int side = 0; side < 2; ++side) {
        const auto& J = side ? J_minus : J_plus;
        const Rational& s = side ? slopes.slope_minus : slopes.slope_plus;
        for (int k = 0; k <= 500; ++k) {
            Rational x = J.lo + (J.hi - J.lo) * Rational(k, 500);
            if (x >= 1) continue;
            auto sl = h.exact_slope(x);
            if (!sl || *sl != s) {
                bad.push_back("slope on J" + std::string(side ? "-" : "+") + " at " + to_string(x) + " differs");
                break;
            }
        }
    }
    Rational image = slopes.slope_plus * (I_plus.hi - I_plus.lo) + slopes.slope_minus * (I_minus.hi - I_minus.lo);
    if (image + delta_prime != 1) bad.push_back("m(hhat(I- u I+)) + delta' != 1");
    for (const auto& b : boundary_points())
        if ((b * K_prime) != Rational(floor(b * K_prime))) bad.push_back("K' * " + to_string(b) + " not integral");
    if (I_plus.hi - I_plus.lo <= 0 || I_minus.hi - I_minus.lo <= 0) bad.push_back("empty core interval");
    if (J_plus.lo - I_plus.lo != -delta || J_plus.hi - I_plus.hi != delta || J_minus.lo - I_minus.lo != -delta ||
        J_minus.hi - I_minus.hi != delta)
        bad.push_back("J - I components do not have length delta");
    return bad;
}

StageGenerator make_stage_III_lambda(const Rational& lambda, const Rational& delta, const BigInt& denominator) {
    if (lambda <= 1) throw std::invalid_argument("lambda must be > 1");
    auto root = exact_sqrt(lambda);
    if (!root) throw std::invalid_argument("lambda must be the square of a rational (got " + to_string(lambda) + ")");
    return make_two_slope(StageType::III_lambda, 1, make_slopes("lambda^(1/2)", *root, 1, -1), delta, denominator);
}

StageGenerator make_stage_III_infty(unsigned n, const Rational& lambda1, const Rational& lambda2,
                                    const Rational& delta, const BigInt& denominator) {
    if (n < 1) throw std::invalid_argument("stage index must be >= 1");
    if (!(1 < lambda1 && lambda1 < lambda2)) throw std::invalid_argument("need 1 < lambda1 < lambda2");
    bool odd = n % 2 == 1;
    auto s = make_slopes(odd ? "lambda1" : "lambda2", odd ? lambda1 : lambda2, 1, -1);
    return make_two_slope(StageType::III_infty, n, s, delta, denominator);
}

StageGenerator make_stage_III_0(unsigned n, const Rational& delta, const BigInt& denominator) {
    if (n < 1) throw std::invalid_argument("stage index must be >= 1");
    if (n > 4) throw BudgetExceeded("III_0 generator: 3^(3^n) beyond the desk-scale budget (n <= 4)");
    long e = 1;
    for (unsigned i = 0; i < n; ++i) e *= 3;
    return make_two_slope(StageType::III_0, n, make_slopes("3", 3, e, -1), delta, denominator);
}

StageGenerator make_stage_II_infty(unsigned n, const Rational& delta, const BigInt& denominator) {
    if (n < 1) throw std::invalid_argument("stage index must be >= 1");
    if (n > 64) throw BudgetExceeded("II_inf generator: 2^n beyond the desk-scale budget (n <= 64)");
    long e = static_cast<long>(n);
    return make_two_slope(StageType::II_infty, n, make_slopes("2", 2, e, -e), delta, denominator);
}

// ---------------------------------------------------------------- family

void GeneratorFamily::validate() const {
    switch (type) {
        case StageType::III_lambda:
            if (lambda <= 1) throw std::invalid_argument("lambda must be > 1");
            if (!exact_sqrt(lambda)) throw std::invalid_argument("lambda must be the square of a rational");
            break;
        case StageType::III_infty:
            if (!(1 < lambda1 && lambda1 < lambda2)) throw std::invalid_argument("need 1 < lambda1 < lambda2");
            break;
        default: break;
    }
}

unsigned GeneratorFamily::generator_index(unsigned stage) const {
    return type == StageType::II_infty ? stage + offset : stage;
}

SlopeData GeneratorFamily::slopes(unsigned stage) const {
    switch (type) {
        case StageType::III_lambda: {
            auto root = exact_sqrt(lambda);
            if (!root) throw std::invalid_argument("lambda must be the square of a rational");
            return make_slopes("lambda^(1/2)", *root, 1, -1);
        }
        case StageType::III_infty:
            return make_slopes(stage % 2 ? "lambda1" : "lambda2", stage % 2 ? lambda1 : lambda2, 1, -1);
        case StageType::III_0: {
            if (stage > 4) throw BudgetExceeded("III_0 generator: 3^(3^n) beyond the desk-scale budget (n <= 4)");
            long e = 1;
            for (unsigned i = 0; i < stage; ++i) e *= 3;
            return make_slopes("3", 3, e, -1);
        }
        case StageType::II_infty: {
            long e = static_cast<long>(generator_index(stage));
            return make_slopes("2", 2, e, -e);
        }
    }
    throw std::logic_error("unreachable");
}

StageGenerator GeneratorFamily::make(unsigned stage, const Rational& delta, const BigInt& denominator) const {
    switch (type) {
        case StageType::III_lambda: {
            auto g = make_stage_III_lambda(lambda, delta, denominator);
            g.index = stage;
            return g;
        }
        case StageType::III_infty: return make_stage_III_infty(stage, lambda1, lambda2, delta, denominator);
        case StageType::III_0: return make_stage_III_0(stage, delta, denominator);
        case StageType::II_infty: {
            auto g = make_stage_II_infty(generator_index(stage), delta, denominator);
            return g;
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<DeltaChoice> schedule_deltas(const GeneratorFamily& family, unsigned max_stages,
                                         const Rational& target_product) {
    if (target_product >= 1) throw ScheduleInfeasible("target product must be < 1");
    Rational slack = target_product > 0 ? Rational(1 - target_product) : Rational(1);
    std::vector<DeltaChoice> out;
    BigInt prev_m = 1;
    for (unsigned n = 1; n <= max_stages; ++n) {
        SlopeData s = family.slopes(n);
        Rational a;
        a = (1 - s.slope_minus) / (s.slope_plus - s.slope_minus);
        Rational budget = slack / Rational(ipow(2, n));
        // delta' = 4 delta (s+ + s-) <= budget, and 4 delta < min(a, 1-a) with room.
        Rational dmax = budget / (4 * (s.slope_plus + s.slope_minus));
        Rational room = std::min(a, Rational(1 - a)) / 8;
        if (room < dmax) dmax = room;
        BigInt da = denominator(a);
        BigInt m = floor(Rational(1) / dmax);
        if (Rational(1, m) > dmax || m == 0) m += 1;
        if (m < 4 * prev_m) m = 4 * prev_m;
        m = ((m + da - 1) / da) * da;
        Rational delta(BigInt(1), m);
        if (delta_prime_of(s, delta) > budget) throw ScheduleInfeasible("stage " + std::to_string(n) + " budget");
        out.push_back({delta, m, delta_prime_of(s, delta)});
        prev_m = m;
    }
    return out;
}

}  // namespace circlefac
