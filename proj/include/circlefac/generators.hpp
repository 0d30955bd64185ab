#pragma once

// Base diffeomorphisms hhat_n for each target type.
//
// Every generator uses the same two-slope layout on [0,1): a steep affine
// arc J+ = [delta, a - delta] of slope s+, a shallow arc J- = [a + delta,
// 1 - delta] of slope s-, and smooth joins of width 2 delta around 0 and a.
// The crossing point a solves s+ a + s- (1 - a) = 1, so the lift has
// degree one, and the join around 0 is centred so that hhat(0) = 0.
// The cores I+- are J+- shrunk by delta on each side.

#include "circlefac/circle_map.hpp"
#include "circlefac/diophantine.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace circlefac {

enum class StageType { III_lambda, III_infty, III_0, II_infty };

std::string to_string(StageType t);
StageType parse_stage_type(const std::string& text);

struct GeometryInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScheduleInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Slopes written as powers of one exact base: s+- = base^exp+-.
struct SlopeData {
    std::string symbol;  // "lambda^(1/2)", "lambda1", "lambda2", "3", "2"
    Rational base;
    long exp_plus = 1;
    long exp_minus = -1;
    Rational slope_plus, slope_minus;
};

SlopeData make_slopes(std::string symbol, const Rational& base, long exp_plus, long exp_minus);

struct StageGenerator {
    StageType type = StageType::III_lambda;
    unsigned index = 1;  // generator index (stage number, or stage + offset for II_infty)
    SlopeData slopes;
    Rational a;
    Rational delta;
    Rational delta_prime;
    RationalInterval J_minus, J_plus, I_minus, I_plus;
    BigInt K_prime = 1;
    TablePtr table;

    PiecewiseMap map() const { return PiecewiseMap::from_table(table); }
    /// The eight boundary points of J+-, I+- in [0,1).
    std::vector<Rational> boundary_points() const;
    /// Structural invariants; empty when all hold.
    std::vector<std::string> check() const;
};

/// Shared two-slope constructor. `denominator` > 0 snaps delta down onto
/// the grid (1/denominator)Z, which enlarges J+-; a must already lie on it.
StageGenerator make_two_slope(StageType type, unsigned index, const SlopeData& slopes, const Rational& delta,
                              const BigInt& denominator = 0);

/// Exact square root of a nonnegative rational, if it exists.
std::optional<Rational> exact_sqrt(const Rational& x);

StageGenerator make_stage_III_lambda(const Rational& lambda, const Rational& delta, const BigInt& denominator = 0);
StageGenerator make_stage_III_infty(unsigned n, const Rational& lambda1, const Rational& lambda2,
                                    const Rational& delta, const BigInt& denominator = 0);
StageGenerator make_stage_III_0(unsigned n, const Rational& delta, const BigInt& denominator = 0);
StageGenerator make_stage_II_infty(unsigned n, const Rational& delta, const BigInt& denominator = 0);

/// The run-level choice of generator family and its parameters.
struct GeneratorFamily {
    StageType type = StageType::III_lambda;
    Rational lambda = 4;
    Rational lambda1 = 2, lambda2 = 3;
    unsigned offset = 3;  // II_infty: stage n uses slopes 2^(+-(n+offset))

    void validate() const;  // throws std::invalid_argument
    unsigned generator_index(unsigned stage) const;
    SlopeData slopes(unsigned stage) const;
    StageGenerator make(unsigned stage, const Rational& delta, const BigInt& denominator = 0) const;
};

struct DeltaChoice {
    Rational delta;
    BigInt denominator;  // grid on which all eight boundary points lie
    Rational delta_prime;
};

/// delta' as a function of delta for the two-slope layout: 4 delta (s+ + s-).
Rational delta_prime_of(const SlopeData& s, const Rational& delta);

/// delta_n = 1/m_n with m_n a multiple of den(a_n) and m_n >= 4 m_{n-1}, each
/// delta'_n within (1 - target) 2^-n, so sum delta' < 1 - target.
std::vector<DeltaChoice> schedule_deltas(const GeneratorFamily& family, unsigned max_stages,
                                         const Rational& target_product);

}  // namespace circlefac
