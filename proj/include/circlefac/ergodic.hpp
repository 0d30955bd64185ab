#pragma once

// Finite-stage ergodic verification on a construction trace.
//
// Points are handled in source coordinates x (so that xi = H_n(x)). The set
// X_n is the intersection of the lifted cores I_k^{+-}, k <= n; every X_n
// component is a union of whole level-(n+1) cells, H_n is affine on it and
// a component is identified by its side path (s_1, ..., s_n) in {-,+}^n.
// Derivative cocycles are exponent vectors over the generator slope bases.

#include "circlefac/construction.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace circlefac {

enum class LevelKind { X, Y, X_plus };

struct ComponentExplosion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LevelSet {
    unsigned n = 0;
    LevelKind kind = LevelKind::X;
    BigInt total_count = 0;                 // components on the whole circle
    RationalInterval window{0, 1};          // enumeration window
    std::vector<RationalInterval> components;  // those inside the window, ordered
};

/// Components of X_n, Y_n or X_n^+. Without a window the whole circle is
/// enumerated when total_count <= cap, else one fundamental domain [0, 1/Q_1).
LevelSet build_level_sets(const ConstructionTrace& trace, unsigned n, LevelKind kind, std::size_t cap = 1000000,
                          std::optional<RationalInterval> window = std::nullopt);

/// Side (+1 / -1) of x in the level-k core, 0 when outside both cores.
int core_side(const ConstructionTrace& trace, unsigned k, const Rational& x);
/// Same for the affine arcs J+-.
int affine_side(const ConstructionTrace& trace, unsigned k, const Rational& x);

/// True when x lies in X_n (all sides nonzero), with sides returned.
bool in_X(const ConstructionTrace& trace, unsigned n, const Rational& x, std::vector<int>* sides = nullptr);

struct PathMeasure {
    std::vector<int> path;      // s_1..s_n
    BigInt count;               // number of X_n components with this path
    Rational length;            // length of each component
    Rational image_length;      // exact length of its H_n image
    bool equal_across_representatives = true;
};

struct MeasureReport {
    Rational exact;   // prod (1 - delta'_j)
    Rational direct;  // sum over X_n components of exact H_n-image lengths
    bool match = false;
    bool equal_measure = true;  // all representatives of a path have equal image length
    std::vector<PathMeasure> paths;
    std::vector<Rational> partial_products;
};

MeasureReport xi_measure(const ConstructionTrace& trace, unsigned n);

/// Exact H_n-image of a component (H_n is affine there).
std::optional<RationalInterval> image_of_component(const ConstructionTrace& trace, unsigned n,
                                                   const RationalInterval& c);

struct CocycleValue {
    std::map<std::string, long> exponents;  // symbol -> exponent of its base
    std::map<std::string, Rational> bases;
    bool exact = true;  // false when a factor sat on a join piece
    Real numeric = 1;   // product of the actual derivatives

    Real resolved() const;  // product of base^exponent
    bool zero() const;
    long exponent(const std::string& symbol) const;
    std::string describe() const;
    CocycleValue& operator*=(const CocycleValue& o);
    CocycleValue inverse() const;
};

/// (f_n^i)'(xi) at xi = H_n(x) by the chain rule over the stages.
CocycleValue derivative_cocycle(const ConstructionTrace& trace, unsigned n, const Rational& x, const BigInt& i);

/// H_n'(y)/H_n'(x) with y = x + i alpha_{n+1}, evaluated with jets.
Real numeric_derivative(const ConstructionTrace& trace, unsigned n, const Rational& x, const BigInt& i);

struct ReturnSample {
    Rational x;
    BigInt i;
    std::vector<int> sides_x, sides_y;
    CocycleValue value;
    bool violation = false;
    std::string note;
};

struct MembershipReport {
    std::size_t scanned = 0;
    std::size_t returns = 0;
    std::size_t violations = 0;
    std::vector<ReturnSample> samples;  // returns only
    std::vector<std::string> observed;  // distinct exponent vectors
    bool evidence = true;               // type-specific extra evidence (III_inf: both generators seen)
    std::string summary;
};

/// Scan returns x -> x + i alpha_{n+1}, 0 < |i| <= i_max, from each start
/// point (which must lie in X_n, or X_n^+ for II_inf), and test the type rule.
MembershipReport ratio_membership(const ConstructionTrace& trace, unsigned n, const std::vector<Rational>& starts,
                                  std::size_t i_max);

/// Midpoints of the level-n components inside the first X_{n-1} component
/// of [0, 1/Q_1) (two per cell, `cells` cells). With plus_only the parent
/// component and the midpoints lie in X^+.
std::vector<Rational> component_midpoints(const ConstructionTrace& trace, unsigned n, std::size_t cells,
                                          bool plus_only = false);

/// Type rule for a return value at depth n; empty when satisfied.
std::string ratio_rule_violation(StageType type, unsigned n, const CocycleValue& v);

struct PairScanReport {
    std::size_t components = 0;
    std::size_t pairs = 0;
    std::size_t realised = 0;   // pairs for which a return i was constructed and checked
    std::size_t violations = 0;
    bool exhaustive = false;    // every component of one fundamental domain was used
    std::vector<std::string> observed;
    std::vector<ReturnSample> samples;
    std::string summary;
};

/// Exact scan over ordered pairs of X_n components (X_n^+ for II_inf) in
/// [0, 1/Q_1). H_n is affine on each component, so the return derivative
/// from C to C' is the same for every admissible i; one i per pair is
/// constructed by solving i p_{n+1} = m (mod q_{n+1}) and checked with the
/// chain-rule cocycle. Falls back to three representatives per side path
/// when the fundamental domain holds more than `cap` components.
PairScanReport component_pair_scan(const ConstructionTrace& trace, unsigned n, std::size_t cap = 64);

struct ReturnPair {
    bool found = false;
    Rational x;         // source point of xi
    BigInt i = 0;
    Rational y;         // x + i alpha_{n+1}
    CocycleValue value;
    std::string diagnostic;
};

ReturnPair find_return_pair(const ConstructionTrace& trace, unsigned n, const Rational& target);

struct RotationEstimate {
    Real value;
    Real error_bound;
    std::size_t iterates = 0;
};

RotationEstimate rotation_number(const PiecewiseMap& f, std::size_t iterates, const Real& x0 = Real(0));

struct SingularityReport {
    std::vector<Rational> x_plus;   // m(X_k^+)
    std::vector<Rational> xi_plus;  // m(Xi_k^+), direct
    std::vector<Rational> xi_plus_formula;  // prod s+ |I_j^+|
    std::vector<Rational> xi_total;         // m(Xi_k)
    bool decreasing = false;
    bool formula_match = false;
    Rational ratio_21;  // m(X_2^+)/m(X_1^+) when available
    Rational max_core_proportion;
    bool verdict = false;
    std::string summary;
};

SingularityReport singularity_diagnostic(const ConstructionTrace& trace, unsigned n,
                                         const Rational& xi_floor = Rational(4, 5));

}  // namespace circlefac
