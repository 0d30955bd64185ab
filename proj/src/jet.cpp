#include "circlefac/jet.hpp"

#include <algorithm>
#include <stdexcept>

namespace circlefac {

Jet Jet::constant(const Real& value, unsigned order) {
    Jet j(order);
    j.c_[0] = value;
    return j;
}

Jet Jet::variable(const Real& x0, unsigned order) {
    Jet j(order);
    j.c_[0] = x0;
    if (order >= 1) j.c_[1] = 1;
    return j;
}

Real Jet::derivative(unsigned i) const {
    Real f = c_[i];
    for (unsigned k = 2; k <= i; ++k) f *= k;
    return f;
}

Jet& Jet::operator+=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet& Jet::operator*=(const Real& v) {
    for (auto& x : c_) x *= v;
    return *this;
}

Jet& Jet::operator/=(const Real& v) {
    for (auto& x : c_) x /= v;
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    unsigned k = std::min(a.order(), b.order());
    Jet r(k);
    for (unsigned i = 0; i <= k; ++i) {
        if (a.c_[i] == 0) continue;
        for (unsigned j = 0; i + j <= k; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
}

Jet Jet::operator-() const {
    Jet r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

Jet Jet::reciprocal() const {
    if (c_[0] == 0) throw std::domain_error("jet reciprocal of zero");
    unsigned k = order();
    Jet r(k);
    r.c_[0] = 1 / c_[0];
    for (unsigned n = 1; n <= k; ++n) {
        Real s = 0;
        for (unsigned i = 1; i <= n; ++i) s += c_[i] * r.c_[n - i];
        r.c_[n] = -s * r.c_[0];
    }
    return r;
}

Jet Jet::exp() const {
    // e' = e * f' gives n e_n = sum_{i=1}^n i f_i e_{n-i}.
    unsigned k = order();
    Jet r(k);
    r.c_[0] = boost::multiprecision::exp(c_[0]);
    for (unsigned n = 1; n <= k; ++n) {
        Real s = 0;
        for (unsigned i = 1; i <= n; ++i) s += Real(i) * c_[i] * r.c_[n - i];
        r.c_[n] = s / n;
    }
    return r;
}

Jet Jet::compose(const Jet& outer, const Jet& inner) {
    unsigned k = std::min(outer.order(), inner.order());
    Jet u = inner.truncated(k);
    u.c_[0] = 0;
    // Horner in the shifted inner series.
    Jet r = Jet::constant(outer.c_[k], k);
    for (unsigned i = k; i-- > 0;) {
        r = r * u;
        r.c_[0] += outer.c_[i];
    }
    return r;
}

Jet Jet::revert(const Real& x0) const {
    unsigned k = order();
    if (k >= 1 && c_[1] == 0) throw std::domain_error("jet revert with zero slope");
    Jet b(k);
    b.c_[0] = 0;
    if (k >= 1) b.c_[1] = 1 / c_[1];
    Jet a = *this;
    a.c_[0] = 0;
    for (unsigned m = 2; m <= k; ++m) {
        // Coefficient of v^m in a(b(v)) must vanish; b_m enters linearly via a_1.
        Jet comp = compose(a, b);
        b.c_[m] = -comp.c_[m] / c_[1];
    }
    b.c_[0] = x0;
    return b;
}

Jet Jet::differentiate() const {
    unsigned k = order();
    if (k == 0) return Jet::constant(Real(0), 0);
    Jet r(k - 1);
    for (unsigned i = 0; i + 1 <= k; ++i) r.c_[i] = c_[i + 1] * (i + 1);
    return r;
}

Jet Jet::truncated(unsigned order) const {
    Jet r(order);
    for (unsigned i = 0; i <= order && i < c_.size(); ++i) r.c_[i] = c_[i];
    return r;
}

}  // namespace circlefac
