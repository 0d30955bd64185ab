#include "circlefac/diophantine.hpp"

#include <algorithm>
#include <cmath>

namespace circlefac {

namespace bmp = boost::multiprecision;

Rational IrrationalOracle::approx(unsigned long bits) const {
    auto e = enclose(bits);
    return (e.lo + e.hi) / 2;
}

// ---------------------------------------------------------------- factorial series

FactorialSeriesOracle::FactorialSeriesOracle(BigInt base) : base_(std::move(base)) {
    if (base_ < 2) throw std::invalid_argument("factorial series base must be >= 2");
}

std::optional<Rational> FactorialSeriesOracle::truncation(unsigned k) const {
    if (k == 0) return Rational(0);
    // Denominator B^{k!}; numerator accumulates the digits-at-factorial pattern.
    unsigned long top = 1;
    for (unsigned i = 2; i <= k; ++i) top *= i;
    BigInt num = 0;
    unsigned long f = 1;
    for (unsigned i = 1; i <= k; ++i) {
        f *= i;
        num += ipow(base_, top - f);
    }
    return Rational(num, ipow(base_, top));
}

RationalInterval FactorialSeriesOracle::tail(unsigned K) const {
    unsigned long f = 1;
    for (unsigned i = 2; i <= K + 1; ++i) f *= i;
    Rational t(BigInt(1), ipow(base_, f));
    return {t, 2 * t};
}

RationalInterval FactorialSeriesOracle::enclose(unsigned long bits) const {
    double lb = std::log2(base_.convert_to<double>());
    unsigned K = 1;
    double f = 2;  // (K+1)!
    while (f * lb < static_cast<double>(bits) + 1) {
        ++K;
        f *= K + 1;
    }
    Rational s = *truncation(K);
    auto t = tail(K);
    return {s + t.lo, s + t.hi};
}

OracleSpec FactorialSeriesOracle::spec() const {
    OracleSpec s;
    s.kind = "factorial_series";
    s.base = base_;
    return s;
}

// ---------------------------------------------------------------- golden ratio

RationalInterval GoldenRatioOracle::enclose(unsigned long bits) const {
    unsigned long m = bits + 2;
    BigInt p2 = ipow(2, m);
    BigInt s = bmp::sqrt(BigInt(5 * p2 * p2));  // floor(sqrt(5) 2^m)
    BigInt den = 2 * p2;
    return {Rational(s - p2, den), Rational(s + 1 - p2, den)};
}

OracleSpec GoldenRatioOracle::spec() const {
    OracleSpec s;
    s.kind = "golden_ratio";
    return s;
}

OracleSpec RationalOracle::spec() const {
    OracleSpec s;
    s.kind = "rational";
    s.value = v_;
    return s;
}

std::shared_ptr<const IrrationalOracle> make_oracle(const OracleSpec& spec) {
    if (spec.kind == "factorial_series") return std::make_shared<FactorialSeriesOracle>(spec.base);
    if (spec.kind == "golden_ratio") return std::make_shared<GoldenRatioOracle>();
    if (spec.kind == "rational") return std::make_shared<RationalOracle>(spec.value);
    throw std::invalid_argument("unknown oracle kind '" + spec.kind + "'");
}

// ---------------------------------------------------------------- continued fractions

namespace {

// Partial quotients of a rational; the last one marks termination.
std::vector<BigInt> cf_of(const Rational& x, std::size_t limit) {
    std::vector<BigInt> out;
    BigInt p = numerator(x), q = denominator(x);
    while (q != 0 && out.size() < limit) {
        BigInt a = floor_div(p, q);
        out.push_back(a);
        BigInt r = p - a * q;
        p = q;
        q = r;
    }
    return out;
}

// Quotients certainly shared by every number in [lo, hi].
std::vector<BigInt> certain_quotients(const RationalInterval& e, std::size_t limit, bool& terminated) {
    terminated = false;
    if (e.lo == e.hi) {
        auto q = cf_of(e.lo, limit + 1);
        terminated = q.size() <= limit;
        if (q.size() > limit) q.resize(limit);
        return q;
    }
    auto a = cf_of(e.lo, limit + 1), b = cf_of(e.hi, limit + 1);
    std::vector<BigInt> out;
    for (std::size_t i = 0; i + 1 < a.size() && i + 1 < b.size() && out.size() < limit; ++i) {
        if (a[i] != b[i]) break;
        out.push_back(a[i]);
    }
    return out;
}

struct ConvergentBuilder {
    BigInt p1 = 1, q1 = 0, p2 = 0, q2 = 1;  // p_{k-1}, q_{k-1}, p_{k-2}, q_{k-2}
    std::vector<Rational> list;
    void push(const BigInt& a) {
        BigInt p = a * p1 + p2, q = a * q1 + q2;
        p2 = p1;
        q2 = q1;
        p1 = p;
        q1 = q;
        Rational c(p, q);
        if (!list.empty() && denominator(list.back()) == q) list.back() = c;
        else list.push_back(c);
    }
};

}  // namespace

std::vector<Rational> convergents(const IrrationalOracle& alpha, std::size_t depth, const SearchLimits& lim) {
    if (depth == 0) throw std::invalid_argument("convergents: depth must be >= 1");
    std::size_t want = depth + 2;  // a leading duplicate denominator may be merged away
    unsigned long bits = 64;
    for (;;) {
        bool terminated = false;
        auto qs = certain_quotients(alpha.enclose(bits), want, terminated);
        ConvergentBuilder b;
        for (const auto& a : qs) b.push(a);
        if (b.list.size() >= depth || terminated) {
            if (b.list.size() > depth) b.list.resize(depth);
            return b.list;
        }
        if (qs.size() >= want) want *= 2;
        if (bits >= lim.max_bits) throw PrecisionExhausted("convergents: cannot resolve partial quotients");
        bits = std::min(bits * 2, lim.max_bits);
    }
}

// ---------------------------------------------------------------- certification

namespace {

unsigned long bits_for(const Rational& bound) {
    if (bound <= 0) return 64;
    long e = floor_log2(bound);
    return static_cast<unsigned long>(std::max<long>(64, -e + 32));
}

Rational abs_r(const Rational& x) { return x < 0 ? Rational(-x) : x; }

struct GapEnclosure {
    Rational lo, hi;
};

GapEnclosure gap_enclosure(const IrrationalOracle& alpha, const Rational& x, unsigned long bits) {
    auto e = alpha.enclose(bits);
    Rational a = abs_r(e.lo - x), b = abs_r(e.hi - x);
    GapEnclosure g;
    g.hi = std::max(a, b);
    g.lo = (e.lo <= x && x <= e.hi) ? Rational(0) : std::min(a, b);
    return g;
}

}  // namespace

bool gap_below(const IrrationalOracle& alpha, const Rational& x, const Rational& bound, const SearchLimits& lim,
               Rational* gap_upper) {
    if (bound <= 0) return false;
    unsigned long bits = bits_for(bound);
    for (;;) {
        auto g = gap_enclosure(alpha, x, bits);
        if (g.hi < bound) {
            if (gap_upper) *gap_upper = g.hi;
            return true;
        }
        if (g.lo >= bound) return false;
        if (bits >= lim.max_bits) throw PrecisionExhausted("gap_below: enclosure cannot decide");
        bits = std::min(bits * 2, lim.max_bits);
    }
}

bool gap_smaller(const IrrationalOracle& alpha, const Rational& x, const Rational& y, const SearchLimits& lim) {
    unsigned long bits = 64;
    Rational d = abs_r(x - y);
    if (d > 0) bits = bits_for(d);
    for (;;) {
        auto gx = gap_enclosure(alpha, x, bits), gy = gap_enclosure(alpha, y, bits);
        if (gx.hi < gy.lo) return true;
        if (gx.lo >= gy.hi) return false;
        if (bits >= lim.max_bits) throw PrecisionExhausted("gap_smaller: enclosure cannot decide");
        bits = std::min(bits * 2, lim.max_bits);
    }
}

Rational witness_threshold(const Rational& eps, const BigInt& q, unsigned long n_exponent) {
    return eps / Rational(ipow(q, n_exponent));
}

namespace {

bool within_budget(const BigInt& q, const SearchLimits& lim) {
    if (lim.denominator_cap && q > *lim.denominator_cap) return false;
    return decimal_digits(q) <= lim.max_denominator_digits;
}

}  // namespace

Rational search_candidates(const IrrationalOracle& alpha, const BigInt& q_min, const SearchLimits& lim,
                           const std::function<bool(const Rational&)>& accept) {
    BigInt last_q = 0;
    // Structural truncations first.
    for (unsigned k = 1;; ++k) {
        auto t = alpha.truncation(k);
        if (!t) break;
        BigInt q = denominator(*t);
        if (!within_budget(q, lim)) break;
        if (q > q_min && accept(*t)) return *t;
        last_q = std::max(last_q, q);
    }
    // Then convergents, extending the expansion as needed.
    std::size_t depth = 16;
    std::size_t checked = 0;
    for (;;) {
        std::vector<Rational> cs;
        try {
            cs = convergents(alpha, depth, lim);
        } catch (const PrecisionExhausted&) {
            throw SearchBudgetExceeded("no acceptable approximation within the precision budget");
        }
        for (; checked < cs.size(); ++checked) {
            BigInt q = denominator(cs[checked]);
            if (!within_budget(q, lim))
                throw SearchBudgetExceeded("no acceptable approximation with denominator within the cap");
            if (q > q_min && accept(cs[checked])) return cs[checked];
        }
        if (cs.size() < depth) throw SearchBudgetExceeded("continued fraction terminated without a witness");
        depth *= 2;
    }
}

LiouvilleWitness liouville_search(const IrrationalOracle& alpha, const Rational& eps, unsigned long n_exponent,
                                  const BigInt& q_min, const SearchLimits& lim) {
    if (eps <= 0) throw std::invalid_argument("liouville_search: eps must be positive");
    if (n_exponent < 1) throw std::invalid_argument("liouville_search: exponent must be positive");
    Rational gap;
    Rational found = search_candidates(alpha, q_min, lim, [&](const Rational& c) {
        return gap_below(alpha, c, witness_threshold(eps, denominator(c), n_exponent), lim, &gap);
    });
    return {found, eps, n_exponent, gap};
}

bool verify_witness(const LiouvilleWitness& w, const IrrationalOracle& alpha, const SearchLimits& lim) {
    if (w.eps <= 0 || w.n_exponent < 1) return false;
    Rational bound = witness_threshold(w.eps, denominator(w.approx), w.n_exponent);
    if (!(w.gap_bound < bound)) return false;
    return gap_below(alpha, w.approx, bound, lim);
}

}  // namespace circlefac
