#pragma once

// The fast-approximation driver.
//
// Stage n picks alpha_n = p_n/q_n, lifts hhat_n to h_n with Q_n = K(n) q_n
// covers and sets H_n = H_{n-1} o h_n, f_n = H_n R_{alpha_{n+1}} H_n^-1.
// Because f_n needs alpha_{n+1}, a run of N stages also selects a lookahead
// alpha_{N+1} with the full stage N+1 constraints.
//
// Denominators are scheduled with graded bounds: d_{n+r}(f_{n-1}, f_n) <=
// G(q_n) |alpha_n - alpha_{n+1}| with G a polynomial whose coefficients
// depend only on earlier stages. With C = 2 * (sum of coefficients) and
// N = deg G, the threshold |alpha - p/q| < 2^{-n-r-1} C^{-1} q^{-N} is what
// the Liouville search has to certify.

#include "circlefac/bounds.hpp"
#include "circlefac/circle_map.hpp"
#include "circlefac/diophantine.hpp"
#include "circlefac/generators.hpp"
#include "circlefac/norms.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace circlefac {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string margin;  // decimal or exact rational, for the record
    std::string detail;
};

struct ConstructionConfig {
    GeneratorFamily family;
    unsigned r = 1;
    unsigned max_stages = 2;
    OracleSpec oracle;
    SearchLimits limits;
    Rational target_product{9, 10};
    std::vector<Rational> delta_overrides;  // per stage, optional
    unsigned precision_bits = 256;          // extra bits on top of log2(Q_N)
    NormOptions norms;
    std::size_t commutation_points = 1000;
    std::size_t boundary_enumeration_limit = 200000;
    std::size_t boundary_samples = 10000;
    std::size_t orbit_cap = 500;  // literal iterations of f_n
    std::size_t birkhoff_iterates = 500;
    std::size_t window_samples = 96;  // per join window in the distance estimate
    std::uint64_t seed = 1;
};

/// Inflated sampled sups of hhat^(j) and (hhat^-1)^(j), j = 1..orders.
struct GeneratorSups {
    std::vector<Real> forward, inverse;
};

/// Relative safety margin applied to sampled generator sups.
Real sup_inflation();

GeneratorSups generator_sups(const StageGenerator& g, unsigned orders, const NormOptions& opt = {});

struct AlphaConstraints {
    unsigned n = 1, r = 1;
    Rational eps = 1;            // |alpha - p/q| < eps q^-N
    unsigned long N = 1;
    std::optional<BigInt> q_floor;  // q > q_floor (growth against the previous stage)
    std::optional<Rational> delta;  // |alpha - p/q| < delta^2 (K q)^-2 q^-1
    BigInt K = 1;
    std::optional<Rational> prev_alpha;  // strictly better than the previous approximant
    Rational lip_prev = 0;               // q > lip_prev 2^n when positive
    bool first_stage_gap = false;        // |alpha - p/q| < 2^{-r-1}
};

struct AlphaSelection {
    Rational alpha;
    Rational eps;
    unsigned long N = 1;
    Rational gap_bound;  // certified upper bound on |alpha - alpha_n|
};

struct StageRecord {
    unsigned n = 0;
    DeltaChoice schedule;
    StageGenerator generator;
    GeneratorSups sups;
    BigInt K = 1, K_prime_prev = 1, Q = 1;
    BoundLedger ledger;
    AlphaConstraints constraints;
    AlphaSelection selection;
    Rational lip_prev = 1;
    bool built = false;  // false for the lookahead record
    PiecewiseMap h, H;
    std::vector<CheckResult> checks;

    const Rational& alpha() const { return selection.alpha; }
    BigInt q() const { return denominator(selection.alpha); }
    bool passed() const;
};

enum class FailureKind { None, Budget, Construction, Verification };

struct ConstructionTrace {
    ConstructionConfig config;
    std::vector<StageRecord> stages;
    std::optional<StageRecord> lookahead;
    FailureKind failure = FailureKind::None;
    unsigned failed_stage = 0;
    std::string failure_message;

    bool passed() const { return failure == FailureKind::None; }
    /// alpha_n for 1 <= n <= stages + 1.
    const Rational& alpha(unsigned n) const;
    const StageRecord& stage(unsigned n) const { return stages.at(n - 1); }
    /// f_n = H_n R_{alpha_{n+1}} H_n^-1 as an evaluation chain (f_0 = R_{alpha_1}).
    PiecewiseMap f(unsigned n) const;
    /// Precision for evaluating stage maps.
    unsigned working_bits() const;
};

/// Graded-bound ledger for stage n given the completed earlier stages.
BoundLedger plan_constants(const std::vector<StageRecord>& previous, const StageGenerator& gen,
                           const GeneratorSups& sups, const BigInt& K, unsigned n, unsigned r);

/// eps = 2^{-n-r-1} / C rounded down, and the exponent N.
std::pair<Rational, unsigned long> alpha_threshold(unsigned n, unsigned r, const Real& C, unsigned N);

/// Smallest admissible right-hand side for |alpha - p/q| at denominator q.
Rational alpha_gap_bound(const AlphaConstraints& c, const BigInt& q);

AlphaSelection select_alpha(const IrrationalOracle& alpha, const AlphaConstraints& c, const SearchLimits& lim = {});

/// Exact re-verification of every selection constraint.
std::vector<CheckResult> check_alpha(const IrrationalOracle& alpha, const AlphaConstraints& c,
                                     const AlphaSelection& s, const SearchLimits& lim = {});

ConstructionTrace run(const ConstructionConfig& config);

/// Rebuilds h_n, H_n of every stage from generator and Q (after loading).
void rebuild_maps(ConstructionTrace& trace);

std::vector<CheckResult> verify_stage(const ConstructionTrace& trace, unsigned n);

// ---------------------------------------------------------------- pieces of verify_stage

/// h o R_a = R_a o h, exactly, at the given rational points.
CheckResult check_commutation(const PiecewiseMap& h, const Rational& a, const std::vector<Rational>& xs);

/// Sample points in [0, 1/Q_1) concentrated on the join windows of every level.
std::vector<Real> stage_samples(const ConstructionTrace& trace, unsigned n, std::size_t per_window);

/// Per order i = 0..s: sup over samples y of |d^i/dx^i H'(H^-1(x) + t)| at
/// x = H(y), for both t and -t.
std::vector<Real> conjugated_rotation_sups(const PiecewiseMap& H, const Real& t, unsigned s,
                                           const std::vector<Real>& ys);

/// Per order i = 0..s: |d^i/dx^i (H R_b H^-1 - H R_c H^-1)| at x = H(y).
std::vector<Real> conjugated_rotation_difference(const PiecewiseMap& H, const Rational& b, const Rational& c,
                                                 unsigned s, const Real& y);

}  // namespace circlefac
