#include "circlefac/join_profile.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <mutex>
#include <vector>

namespace circlefac::join {

namespace bmp = boost::multiprecision;

namespace {

using Hi = bmp::number<bmp::mpfr_float_backend<40>, bmp::et_off>;

// Beyond this exponent tau is 0 or 1 to any precision we ever use.
constexpr double kFlatCutoff = 1e7;

constexpr int kPanels = 1024;  // panels over [0, 1/2]

Hi tau_hi(const Hi& v) {
    if (v <= 0) return Hi(0);
    if (v >= 1) return Hi(1);
    Hi g = 1 / v - 1 / (1 - v);
    if (g > kFlatCutoff) return Hi(0);
    if (g < -kFlatCutoff) return Hi(1);
    return 1 / (1 + bmp::exp(g));
}

struct Table {
    std::vector<Hi> cumulative;  // T at panel starts, size kPanels + 1
};

const Table& table() {
    static Table t;
    static std::once_flag once;
    std::call_once(once, [] {
        t.cumulative.resize(kPanels + 1);
        t.cumulative[0] = 0;
        Hi h = Hi(1) / (2 * kPanels);
        for (int i = 0; i < kPanels; ++i) {
            Hi a = h * i, b = h * (i + 1);
            Hi part = boost::math::quadrature::gauss<Hi, 20>::integrate(tau_hi, a, b);
            t.cumulative[i + 1] = t.cumulative[i] + part;
        }
    });
    return t;
}

// T(v) = integral of tau over [0, v], v in [0, 1/2].
Hi T_low(const Hi& v) {
    const Table& t = table();
    Hi h = Hi(1) / (2 * kPanels);
    long idx = static_cast<long>(bmp::floor(v / h).convert_to<long>());
    if (idx < 0) idx = 0;
    if (idx >= kPanels) return t.cumulative[kPanels];
    Hi a = h * idx;
    if (v == a) return t.cumulative[idx];
    return t.cumulative[idx] + boost::math::quadrature::gauss<Hi, 20>::integrate(tau_hi, a, v);
}

// T on [0,1] using T(v) = v - 1/2 + T(1-v) for v > 1/2.
Hi T(const Hi& v) {
    if (v <= 0) return Hi(0);
    if (v >= 1) return Hi(0.5);
    if (v <= Hi(0.5)) return T_low(v);
    return v - Hi(0.5) + T_low(1 - v);
}

Hi to_hi(const Real& x) {
    Hi r;
    mpfr_set(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

Real from_hi(const Hi& x) {
    Real r;
    mpfr_set(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

}  // namespace

Real tau(const Real& v) {
    if (v <= 0) return Real(0);
    if (v >= 1) return Real(1);
    Real g = 1 / v - 1 / (1 - v);
    if (g > kFlatCutoff) return Real(0);
    if (g < -kFlatCutoff) return Real(1);
    return 1 / (1 + bmp::exp(g));
}

Jet tau_jet(const Real& v, unsigned order) {
    Jet flat(order);
    if (v <= 0) return flat;
    if (v >= 1) {
        flat[0] = 1;
        return flat;
    }
    Real g0 = 1 / v - 1 / (1 - v);
    if (g0 > kFlatCutoff) return flat;
    if (g0 < -kFlatCutoff) {
        flat[0] = 1;
        return flat;
    }
    Jet V = Jet::variable(v, order);
    Jet W = Jet::constant(Real(1), order) - V;
    Jet g = V.reciprocal() - W.reciprocal();
    Jet e = g.exp();
    e += Real(1);
    return e.reciprocal();
}

Real sigma(const Real& u) {
    if (u <= Real(0.5)) return tau(2 * u) / 2;
    return Real(0.5) + tau(2 * u - 1) / 2;
}

Jet sigma_jet(const Real& u, unsigned order) {
    bool low = u <= Real(0.5);
    Jet t = tau_jet(low ? Real(2 * u) : Real(2 * u - 1), order);
    Real scale = 1;
    for (unsigned k = 0; k <= order; ++k) {
        t[k] *= scale / 2;
        scale *= 2;
    }
    if (!low) t[0] += Real(0.5);
    return t;
}

Real S(const Real& u) {
    if (u <= 0) return Real(0);
    if (u >= 1) return Real(0.5);
    if (u <= Real(0.5)) return from_hi(T(to_hi(2 * u))) / 4;
    Real rest = from_hi(T(to_hi(2 * u - 1))) / 4;
    return Real(0.125) + (u - Real(0.5)) / 2 + rest;
}

Jet S_jet(const Real& u, unsigned order) {
    Jet out(order);
    out[0] = S(u);
    if (order == 0) return out;
    Jet s = sigma_jet(u, order - 1);
    for (unsigned k = 0; k + 1 <= order; ++k) out[k + 1] = s[k] / (k + 1);
    return out;
}

std::optional<Rational> S_exact(const Rational& u) {
    if (u <= 0) return Rational(0);
    if (u == Rational(1, 2)) return Rational(1, 8);
    if (u >= 1) return Rational(1, 2);
    return std::nullopt;
}

}  // namespace circlefac::join
