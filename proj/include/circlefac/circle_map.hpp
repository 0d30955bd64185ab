#pragma once

// Degree-one circle diffeomorphisms stored as lifts.
//
// A PieceTable describes a lift T on [0,1): exact rational breakpoints, each
// piece affine or part of a smooth join, with T(1-) = T(0) + 1. A
// PiecewiseMap is a composition chain of factors, each a rotation or a
// cyclic Q-fold lift of a table (possibly inverted):
//
//   lifted factor      x -> (T(frac(Qx)) + floor(Qx)) / Q
//
// Chains are never flattened; evaluation walks the factors from the inside
// out. Exact evaluation succeeds whenever every factor is hit on an affine
// piece (or at a join's start, centre or end, where values are rational).

#include "circlefac/jet.hpp"
#include "circlefac/numeric.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace circlefac {

struct AffinePiece {
    Rational slope;
    Rational intercept;  // value = slope * x + intercept
};

/// Part of a smooth join that starts at `start` with width `width`:
/// value = start_value + sL (x - start) + (sR - sL) width S((x - start)/width).
struct JoinPiece {
    Rational start;
    Rational width;
    Rational start_value;
    Rational slope_left;
    Rational slope_right;
};

struct Piece {
    Rational lo, hi;  // domain [lo, hi)
    std::variant<AffinePiece, JoinPiece> kind;

    bool affine() const { return std::holds_alternative<AffinePiece>(kind); }
    std::optional<Rational> value_exact(const Rational& x) const;
    Real value(const Real& x) const;
    Jet jet(const Real& x, unsigned order) const;
    /// Exact derivative at a domain endpoint or anywhere on an affine piece.
    std::optional<Rational> slope_exact(const Rational& x) const;
};

class PieceTable {
public:
    PieceTable(std::vector<Piece> pieces, std::string label = {});

    const std::vector<Piece>& pieces() const { return pieces_; }
    const std::string& label() const { return label_; }

    /// Problems with the structural invariants; empty when valid.
    std::vector<std::string> validate() const;

    std::size_t locate(const Rational& x) const;  // x in [0,1)
    std::size_t locate(const Real& x) const;

    /// Exact value T(0) and the exact piece-start values.
    const Rational& value_at_zero() const { return start_values_.front(); }
    const std::vector<Rational>& start_values() const { return start_values_; }

    std::optional<Rational> value_exact(const Rational& x) const;
    Real value(const Real& x) const;
    Jet jet(const Real& x, unsigned order) const;

    /// Solves T(x) = y for y in [T(0), T(0)+1).
    std::optional<Rational> solve_exact(const Rational& y) const;
    Real solve(const Real& y) const;

    /// Maximum and minimum exact slope over affine pieces and join ends.
    Rational max_slope() const;
    Rational min_slope() const;

private:
    std::vector<Piece> pieces_;
    std::vector<Rational> start_values_;
    std::string label_;
};

using TablePtr = std::shared_ptr<const PieceTable>;

struct RotationFactor {
    Rational angle;
};

struct LiftFactor {
    TablePtr table;
    BigInt cover = 1;
    bool inverse = false;
};

using Factor = std::variant<RotationFactor, LiftFactor>;

/// Composite breakpoint set of a chain on [0,1).
struct Breakpoints {
    std::vector<Real> points;
};

class PiecewiseMap {
public:
    PiecewiseMap() = default;  // identity

    static PiecewiseMap identity() { return {}; }
    static PiecewiseMap rotation(const Rational& angle);
    static PiecewiseMap from_table(TablePtr table);
    static PiecewiseMap from_factors(const std::vector<Factor>& factors);

    const std::vector<Factor>& factors() const { return factors_; }
    bool is_identity() const { return factors_.empty(); }

    /// Lift values. f(x+1) = f(x) + 1.
    std::optional<Rational> eval_exact(const Rational& x) const;
    Real eval(const Real& x) const;
    Jet eval_jet(const Jet& x) const;

    /// f(x) mod 1 for x in [0,1).
    std::optional<Rational> eval_circle_exact(const Rational& x) const;
    Real eval_circle(const Real& x) const;

    /// k-th derivative of the lift at x (k >= 1).
    Real derivative(const Real& x, unsigned k) const;
    /// Exact first derivative when every factor is affine at the point.
    std::optional<Rational> exact_slope(const Rational& x) const;

    PiecewiseMap inverse() const;

    /// Breakpoints on [0,1); nullopt when more than `budget` would be needed.
    std::optional<Breakpoints> breakpoints(std::size_t budget) const;

    /// Largest cover among the lifted factors (1 for rotations/identity).
    BigInt max_cover() const;

    /// Upper bound for the Lipschitz constant: product of maximal slopes.
    Rational lipschitz_bound() const;

    friend PiecewiseMap compose(const PiecewiseMap& f, const PiecewiseMap& g);

private:
    void push_back(const Factor& f);
    std::vector<Factor> factors_;  // f = factors_[0] o factors_[1] o ...
};

/// f o g
PiecewiseMap compose(const PiecewiseMap& f, const PiecewiseMap& g);

struct NoFixedPointLift : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// h(x) = (hhat(frac(Qx)) + floor(Qx)) / Q; hhat must be a single table.
PiecewiseMap cyclic_lift(const PiecewiseMap& hhat, const BigInt& Q, bool fix_zero = true);

/// Factor-level evaluation helpers (shared with analysis code).
std::optional<Rational> apply_factor_exact(const Factor& f, const Rational& x);
Real apply_factor(const Factor& f, const Real& x);
Jet apply_factor_jet(const Factor& f, const Jet& x);
std::optional<Rational> factor_slope_exact(const Factor& f, const Rational& x);

}  // namespace circlefac
