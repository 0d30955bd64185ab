#pragma once

// A priori bounds for compositions and conjugated rotations.
//
// Two flavours live here:
//  * the coarse bounds |fg|_r <= C(r)|f|_r^r|g|_r^r and
//    d_r(H R_a H^-1, H R_b H^-1) <= C(r)|H|_{r+1}^{r+1}|a-b| with the explicit
//    constant C(r) = (r+1)! 2^(r+1) Bell(r+1);
//  * graded bounds that track sup|f^(j)| order by order as polynomials in an
//    unknown denominator q (Faa di Bruno with partial Bell polynomials). These
//    are what the construction uses to schedule denominators, because the
//    coarse exponents grow too fast to be usable.

#include "circlefac/numeric.hpp"

#include <string>
#include <vector>

namespace circlefac {

BigInt bell_number(unsigned n);
BigInt factorial(unsigned n);
BigInt binomial(unsigned n, unsigned k);

/// C(r) = (r+1)! 2^(r+1) Bell(r+1).
BigInt explicit_C(unsigned r);

struct CompositionBound {
    Real abs_bound;   // bound for |f o g|_r
    Real diff_bound;  // bound for ||f o g - g||_r
};

CompositionBound bound_compose(const Real& f_abs, const Real& f_diff, const Real& g_abs, unsigned r);

/// C(r) |H|_{r+1}^{r+1} gap.
Real bound_conjugated_rotations(const Real& H_abs_r1, unsigned r, const Real& gap);

/// Polynomial in q with nonnegative coefficients, index = degree.
using Poly = std::vector<Real>;

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_max(const Poly& a, const Poly& b);  // coefficientwise
Real poly_eval(const Poly& p, const Real& q);
Real poly_coefficient_sum(const Poly& p);
unsigned poly_degree(const Poly& p);

/// Bounds D[j-1] >= sup |f^(j)| for j = 1..size().
struct GradedBounds {
    std::vector<Poly> D;
    unsigned orders() const { return static_cast<unsigned>(D.size()); }
};

GradedBounds constant_bounds(const std::vector<Real>& sups);
/// Bounds for the Q-fold lift of a map with the given sups; sup|h^(j)| scales
/// by Q^(j-1). When `symbolic` is set the result is a polynomial in q with
/// Q = factor * q; otherwise Q = factor is a number.
GradedBounds lifted_bounds(const std::vector<Real>& base_sups, const BigInt& factor, bool symbolic);
/// Bounds for outer o inner.
GradedBounds compose_bounds(const GradedBounds& outer, const GradedBounds& inner);

/// Polynomial G with d_s(H R_b H^-1, H R_c H^-1) <= |b - c| G(q), built from
/// bounds of H (orders up to s+1) and of H^-1 (orders up to s).
Poly distance_polynomial(const GradedBounds& H, const GradedBounds& Hinv, unsigned s);

/// Per-stage bound record.
struct BoundLedger {
    unsigned n = 0, r = 0;
    Real C;                  // scheduling constant: d_{n+r} <= C q^N |alpha - alpha_n|
    unsigned N = 0;          // scheduling exponent
    Poly distance_poly;      // G(q) with d_{n+r}(f_{n-1}, f_n) <= G(q_n) |alpha_n - alpha_{n+1}|
    Real coarse_C_norm;       // coarse chain: |H_n|_{n+r+1} <= C q^N
    unsigned coarse_N_norm = 0;
    Real coarse_C_dist;       // coarse chain: distance bound constant and exponent
    unsigned coarse_N_dist = 0;
    std::vector<std::string> provenance;
};

}  // namespace circlefac
