#pragma once

// Irrational oracles, continued fractions and certified Liouville witnesses.
//
// An oracle answers precision queries with an exact rational enclosure
// [lo, hi] of width at most 2^-bits. All decisions (is |alpha - p/q| below a
// bound?) are made by refining enclosures until the answer is forced; no
// floating point is involved.

#include "circlefac/numeric.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace circlefac {

struct RationalInterval {
    Rational lo, hi;
};

struct PrecisionExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SearchBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleSpec {
    std::string kind = "factorial_series";  // factorial_series | golden_ratio | rational
    BigInt base = 10;
    Rational value = 0;  // for kind = rational
};

class IrrationalOracle {
public:
    virtual ~IrrationalOracle() = default;
    /// Enclosure of width <= 2^-bits.
    virtual RationalInterval enclose(unsigned long bits) const = 0;
    virtual bool liouville() const { return false; }
    /// k-th structural truncation (k >= 1), if the oracle has one.
    virtual std::optional<Rational> truncation(unsigned k) const { return std::nullopt; }
    virtual OracleSpec spec() const = 0;

    Rational approx(unsigned long bits) const;
};

/// sum_{k>=1} B^{-k!}
class FactorialSeriesOracle : public IrrationalOracle {
public:
    explicit FactorialSeriesOracle(BigInt base);
    RationalInterval enclose(unsigned long bits) const override;
    bool liouville() const override { return true; }
    std::optional<Rational> truncation(unsigned k) const override;
    OracleSpec spec() const override;
    const BigInt& base() const { return base_; }
    /// Exact tail bounds: B^{-(K+1)!} < alpha - S_K <= 2 B^{-(K+1)!}.
    RationalInterval tail(unsigned K) const;

private:
    BigInt base_;
};

/// (sqrt 5 - 1) / 2
class GoldenRatioOracle : public IrrationalOracle {
public:
    RationalInterval enclose(unsigned long bits) const override;
    OracleSpec spec() const override;
};

/// A rational number posing as an oracle (exact enclosure).
class RationalOracle : public IrrationalOracle {
public:
    explicit RationalOracle(Rational v) : v_(std::move(v)) {}
    RationalInterval enclose(unsigned long) const override { return {v_, v_}; }
    OracleSpec spec() const override;

private:
    Rational v_;
};

std::shared_ptr<const IrrationalOracle> make_oracle(const OracleSpec& spec);

struct SearchLimits {
    std::size_t max_denominator_digits = 1000;
    std::optional<BigInt> denominator_cap;  // optional hard cap on q
    unsigned long max_bits = 1ul << 24;
};

struct LiouvilleWitness {
    Rational approx;
    Rational eps;
    unsigned long n_exponent = 1;
    Rational gap_bound;  // certified upper bound on |alpha - approx|
};

/// First `depth` convergents with strictly increasing denominators (fewer if
/// the expansion terminates).
std::vector<Rational> convergents(const IrrationalOracle& alpha, std::size_t depth, const SearchLimits& lim = {});

/// Certified decision of |alpha - x| < bound. On success `gap_upper` receives
/// an exact upper bound for |alpha - x|.
bool gap_below(const IrrationalOracle& alpha, const Rational& x, const Rational& bound, const SearchLimits& lim = {},
               Rational* gap_upper = nullptr);

/// Certified decision of |alpha - x| < |alpha - y|.
bool gap_smaller(const IrrationalOracle& alpha, const Rational& x, const Rational& y, const SearchLimits& lim = {});

/// Walks candidates (structural truncations, then convergents) with q > q_min
/// and returns the first one accepted. Throws SearchBudgetExceeded when the
/// denominator budget runs out.
Rational search_candidates(const IrrationalOracle& alpha, const BigInt& q_min, const SearchLimits& lim,
                           const std::function<bool(const Rational&)>& accept);

LiouvilleWitness liouville_search(const IrrationalOracle& alpha, const Rational& eps, unsigned long n_exponent,
                                  const BigInt& q_min, const SearchLimits& lim = {});

bool verify_witness(const LiouvilleWitness& w, const IrrationalOracle& alpha, const SearchLimits& lim = {});

/// eps * q^-N
Rational witness_threshold(const Rational& eps, const BigInt& q, unsigned long n_exponent);

}  // namespace circlefac
