#pragma once

// Number types shared by every module.
//
// BigInt and Rational are GMP-backed and exact. Real is an MPFR float whose
// precision follows the thread default; use PrecisionScope to raise it for a
// computation that touches very fine circle coordinates (lifts with a huge
// covering degree need about log2(Q) extra bits).

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace circlefac {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

/// Sets the default Real precision (in bits) for the lifetime of the scope.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_digits10_;
};

unsigned current_precision_bits();
unsigned bits_to_digits10(unsigned bits);

/// Working precision needed to resolve positions at scale 1/scale with
/// `extra_bits` of relative accuracy left over.
unsigned precision_for_scale(const BigInt& scale, unsigned extra_bits = 128);

Real to_real(const Rational& q);
Real to_real(const BigInt& z);

BigInt numerator(const Rational& q);
BigInt denominator(const Rational& q);

BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt floor(const Rational& q);
Rational frac(const Rational& q);
Real frac(const Real& x);

BigInt ipow(const BigInt& base, unsigned long exponent);
Rational rpow(const Rational& base, long exponent);
BigInt lcm(const BigInt& a, const BigInt& b);
BigInt gcd(const BigInt& a, const BigInt& b);

/// Number of decimal digits of |z| (0 has one digit).
std::size_t decimal_digits(const BigInt& z);

/// floor(log2(q)) for q > 0, exact.
long floor_log2(const Rational& q);

/// Largest dyadic-free rational <= x with a small denominator; used to round
/// thresholds down so they stay conservative.
Rational round_down(const Real& x, unsigned bits = 64);
Rational round_up(const Real& x, unsigned bits = 64);

/// "p/q" with q > 0, always including the slash.
std::string to_string(const Rational& q);
std::string to_string(const BigInt& z);
std::string to_string(const Real& x, int digits = 20);

/// Accepts "p/q", "p", or a finite decimal such as "0.25".
Rational parse_rational(std::string_view text);
BigInt parse_bigint(std::string_view text);

/// Circle distance of x to 0, i.e. min over integers k of |x - k|.
Rational circle_distance(const Rational& x);
Real circle_distance(const Real& x);

}  // namespace circlefac
