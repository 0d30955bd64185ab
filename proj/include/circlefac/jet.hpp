#pragma once

// Truncated Taylor series ("jets") for derivative propagation.
//
// A Jet of order k stores c[0..k] with c[i] = f^(i)(x0) / i!. Arithmetic is
// truncated at order k, composition follows the chain rule and revert()
// produces the jet of the local inverse function.

#include "circlefac/numeric.hpp"

#include <vector>

namespace circlefac {

class Jet {
public:
    Jet() = default;
    explicit Jet(unsigned order) : c_(order + 1, Real(0)) {}

    static Jet constant(const Real& value, unsigned order);
    /// The identity function around x0.
    static Jet variable(const Real& x0, unsigned order);

    unsigned order() const { return static_cast<unsigned>(c_.size()) - 1; }
    const Real& value() const { return c_[0]; }
    Real& operator[](unsigned i) { return c_[i]; }
    const Real& operator[](unsigned i) const { return c_[i]; }
    const std::vector<Real>& coefficients() const { return c_; }

    /// i-th derivative at the base point.
    Real derivative(unsigned i) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator+=(const Real& v) { c_[0] += v; return *this; }
    Jet& operator-=(const Real& v) { c_[0] -= v; return *this; }
    Jet& operator*=(const Real& v);
    Jet& operator/=(const Real& v);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, const Real& v) { return a += v; }
    friend Jet operator-(Jet a, const Real& v) { return a -= v; }
    friend Jet operator*(Jet a, const Real& v) { return a *= v; }
    friend Jet operator*(const Real& v, Jet a) { return a *= v; }
    friend Jet operator/(Jet a, const Real& v) { return a /= v; }
    friend Jet operator*(const Jet& a, const Jet& b);
    Jet operator-() const;

    Jet reciprocal() const;
    Jet exp() const;

    /// outer(inner(x)) where `outer` is expanded around inner.value().
    static Jet compose(const Jet& outer, const Jet& inner);

    /// Jet of the local inverse around value(), whose value is x0 (the base
    /// point this jet was expanded at). Requires c[1] != 0.
    Jet revert(const Real& x0) const;

    /// Jet of f' (one order lower).
    Jet differentiate() const;

    /// Same function with order truncated to `order`.
    Jet truncated(unsigned order) const;

private:
    std::vector<Real> c_;
};

}  // namespace circlefac
