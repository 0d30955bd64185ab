#pragma once

// The C-infinity transition used to join two affine pieces.
//
//   tau(v)   = 1 / (1 + exp(1/v - 1/(1-v)))  on (0,1), flat at both ends
//   sigma(u) = tau(2u)/2 on [0,1/2],  1/2 + tau(2u-1)/2 on [1/2,1]
//   S(u)     = integral of sigma over [0,u]
//
// sigma climbs from 0 to 1 in two symmetric halves, so S(1/2) = 1/8 and
// S(1) = 1/2 exactly. A join of width w between slopes sL and sR therefore
// has rational values at its start, centre and end whenever the data are
// rational, which is what keeps breakpoints and fixed points exact.

#include "circlefac/jet.hpp"
#include "circlefac/numeric.hpp"

#include <optional>

namespace circlefac::join {

Real tau(const Real& v);
Jet tau_jet(const Real& v, unsigned order);

Real sigma(const Real& u);
/// Jet in u of sigma.
Jet sigma_jet(const Real& u, unsigned order);

/// S(u) for u in [0,1]; accurate to about 1e-30 (quadrature table).
Real S(const Real& u);
/// Jet in u of S (value from the table, higher terms from sigma).
Jet S_jet(const Real& u, unsigned order);
/// Exact S at the rational points where it is known in closed form.
std::optional<Rational> S_exact(const Rational& u);

/// Absolute accuracy of S.
inline constexpr double kSAccuracy = 1e-28;

}  // namespace circlefac::join
