#include "circlefac/numeric.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace circlefac {

namespace bmp = boost::multiprecision;

unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

unsigned current_precision_bits() {
    Real probe;
    return static_cast<unsigned>(mpfr_get_prec(probe.backend().data()));
}

PrecisionScope::PrecisionScope(unsigned bits) : saved_digits10_(Real::default_precision()) {
    Real::default_precision(bits_to_digits10(bits));
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_digits10_); }

unsigned precision_for_scale(const BigInt& scale, unsigned extra_bits) {
    std::size_t b = scale > 0 ? bmp::msb(scale) + 1 : 1;
    return static_cast<unsigned>(b) + extra_bits;
}

Real to_real(const Rational& q) {
    Real r;
    mpfr_set_q(r.backend().data(), q.backend().data(), MPFR_RNDN);
    return r;
}

Real to_real(const BigInt& z) {
    Real r;
    mpfr_set_z(r.backend().data(), z.backend().data(), MPFR_RNDN);
    return r;
}

BigInt numerator(const Rational& q) { return bmp::numerator(q); }
BigInt denominator(const Rational& q) { return bmp::denominator(q); }

BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    bmp::divide_qr(a, b, q, r);
    if (r != 0 && ((r < 0) != (b < 0))) q -= 1;
    return q;
}

BigInt floor(const Rational& q) { return floor_div(numerator(q), denominator(q)); }

Rational frac(const Rational& q) { return q - Rational(floor(q)); }

Real frac(const Real& x) { return x - bmp::floor(x); }

BigInt ipow(const BigInt& base, unsigned long exponent) {
    return bmp::pow(base, static_cast<unsigned>(exponent));
}

Rational rpow(const Rational& base, long exponent) {
    if (exponent >= 0) {
        return Rational(ipow(numerator(base), exponent), ipow(denominator(base), exponent));
    }
    if (base == 0) throw std::domain_error("rpow: zero to a negative power");
    Rational inv = 1 / base;
    return rpow(inv, -exponent);
}

BigInt gcd(const BigInt& a, const BigInt& b) { return bmp::gcd(a, b); }

BigInt lcm(const BigInt& a, const BigInt& b) {
    if (a == 0 || b == 0) return 0;
    return bmp::abs(a / gcd(a, b) * b);
}

std::size_t decimal_digits(const BigInt& z) {
    if (z == 0) return 1;
    std::string s = BigInt(bmp::abs(z)).str();
    return s.size();
}

long floor_log2(const Rational& q) {
    if (q <= 0) throw std::domain_error("floor_log2 of nonpositive value");
    BigInt n = numerator(q), d = denominator(q);
    long e = static_cast<long>(bmp::msb(n)) - static_cast<long>(bmp::msb(d));
    // 2^e <= n/d < 2^(e+2) after the msb estimate; correct by one step.
    Rational p = rpow(Rational(2), e);
    if (q < p) --e;
    else if (q >= p * 2) ++e;
    return e;
}

Rational round_down(const Real& x, unsigned bits) {
    // x ~ m * 2^e with m an integer of `bits` bits; floor m.
    if (x == 0) return 0;
    long e = static_cast<long>(bmp::ilogb(x)) - static_cast<long>(bits);
    Real scaled = bmp::ldexp(x, static_cast<int>(-e));
    BigInt m;
    mpfr_get_z(m.backend().data(), scaled.backend().data(), MPFR_RNDD);
    return Rational(m) * rpow(Rational(2), e);
}

Rational round_up(const Real& x, unsigned bits) {
    if (x == 0) return 0;
    long e = static_cast<long>(bmp::ilogb(x)) - static_cast<long>(bits);
    Real scaled = bmp::ldexp(x, static_cast<int>(-e));
    BigInt m;
    mpfr_get_z(m.backend().data(), scaled.backend().data(), MPFR_RNDU);
    return Rational(m) * rpow(Rational(2), e);
}

std::string to_string(const Rational& q) {
    return numerator(q).str() + "/" + denominator(q).str();
}

std::string to_string(const BigInt& z) { return z.str(); }

std::string to_string(const Real& x, int digits) {
    return x.str(digits, std::ios_base::scientific);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

BigInt parse_bigint(std::string_view text) {
    text = trim(text);
    bool neg = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        neg = text.front() == '-';
        text.remove_prefix(1);
    }
    if (!all_digits(text)) throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    BigInt z{std::string(text)};
    return neg ? BigInt(-z) : z;
}

Rational parse_rational(std::string_view text) {
    text = trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        BigInt p = parse_bigint(text.substr(0, slash));
        BigInt q = parse_bigint(text.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("zero denominator");
        return Rational(p, q);
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view ip = text.substr(0, dot), fp = text.substr(dot + 1);
        bool neg = !ip.empty() && ip.front() == '-';
        if (!ip.empty() && (ip.front() == '-' || ip.front() == '+')) ip.remove_prefix(1);
        if (ip.empty()) ip = "0";
        if (!all_digits(ip) || (!fp.empty() && !all_digits(fp)))
            throw std::invalid_argument("not a decimal: '" + std::string(text) + "'");
        BigInt whole(std::string{ip});
        BigInt part = fp.empty() ? BigInt(0) : BigInt(std::string{fp});
        Rational v = Rational(whole) + Rational(part, ipow(10, fp.size()));
        return neg ? Rational(-v) : v;
    }
    return Rational(parse_bigint(text));
}

Rational circle_distance(const Rational& x) {
    Rational f = frac(x);
    return std::min(f, Rational(1 - f));
}

Real circle_distance(const Real& x) {
    Real f = frac(x);
    Real g = 1 - f;
    return f < g ? f : g;
}

}  // namespace circlefac
