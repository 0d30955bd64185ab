#include "circlefac/bounds.hpp"

#include <algorithm>

namespace circlefac {

namespace bmp = boost::multiprecision;

BigInt factorial(unsigned n) {
    BigInt f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return f;
}

BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

BigInt bell_number(unsigned n) {
    // Bell triangle.
    std::vector<BigInt> row{1};
    for (unsigned i = 0; i < n; ++i) {
        std::vector<BigInt> next{row.back()};
        for (const auto& v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

BigInt explicit_C(unsigned r) { return factorial(r + 1) * ipow(2, r + 1) * bell_number(r + 1); }

CompositionBound bound_compose(const Real& f_abs, const Real& f_diff, const Real& g_abs, unsigned r) {
    Real C = to_real(explicit_C(r));
    Real gr = bmp::pow(g_abs, r);
    return {C * bmp::pow(f_abs, r) * gr, C * f_diff * gr};
}

Real bound_conjugated_rotations(const Real& H_abs_r1, unsigned r, const Real& gap) {
    return to_real(explicit_C(r)) * bmp::pow(H_abs_r1, r + 1) * gap;
}

// ---------------------------------------------------------------- polynomials

Poly poly_add(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), Real(0));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, Real(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly poly_max(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), Real(0));
    for (std::size_t i = 0; i < out.size(); ++i) {
        Real x = i < a.size() ? a[i] : Real(0);
        Real y = i < b.size() ? b[i] : Real(0);
        out[i] = x > y ? x : y;
    }
    return out;
}

Real poly_eval(const Poly& p, const Real& q) {
    Real v = 0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * q + p[i];
    return v;
}

Real poly_coefficient_sum(const Poly& p) {
    Real s = 0;
    for (const auto& c : p) s += c;
    return s;
}

unsigned poly_degree(const Poly& p) {
    for (std::size_t i = p.size(); i-- > 0;)
        if (p[i] != 0) return static_cast<unsigned>(i);
    return 0;
}

// ---------------------------------------------------------------- graded bounds

GradedBounds constant_bounds(const std::vector<Real>& sups) {
    GradedBounds g;
    for (const auto& s : sups) g.D.push_back(Poly{s});
    return g;
}

GradedBounds lifted_bounds(const std::vector<Real>& base_sups, const BigInt& factor, bool symbolic) {
    GradedBounds g;
    Real f = to_real(factor);
    Real scale = 1;
    for (std::size_t j = 0; j < base_sups.size(); ++j) {
        // order j+1 scales by Q^j
        if (symbolic) {
            Poly p(j + 1, Real(0));
            p[j] = base_sups[j] * scale;
            g.D.push_back(p);
        } else {
            g.D.push_back(Poly{base_sups[j] * scale});
        }
        scale *= f;
    }
    return g;
}

namespace {

// B[n][k] = partial Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1}).
std::vector<std::vector<Poly>> partial_bell(const std::vector<Poly>& x, unsigned nmax) {
    std::vector<std::vector<Poly>> B(nmax + 1, std::vector<Poly>(nmax + 1));
    B[0][0] = Poly{Real(1)};
    for (unsigned n = 1; n <= nmax; ++n) {
        for (unsigned k = 1; k <= n; ++k) {
            Poly acc;
            for (unsigned i = 1; i <= n - k + 1; ++i) {
                if (B[n - i][k - 1].empty()) continue;
                Poly term = poly_mul(x[i - 1], B[n - i][k - 1]);
                Real c = to_real(binomial(n - 1, i - 1));
                for (auto& t : term) t *= c;
                acc = poly_add(acc, term);
            }
            B[n][k] = acc;
        }
    }
    return B;
}

}  // namespace

GradedBounds compose_bounds(const GradedBounds& outer, const GradedBounds& inner) {
    unsigned m = std::min(outer.orders(), inner.orders());
    auto B = partial_bell(inner.D, m);
    GradedBounds out;
    for (unsigned j = 1; j <= m; ++j) {
        Poly acc;
        for (unsigned k = 1; k <= j; ++k) acc = poly_add(acc, poly_mul(outer.D[k - 1], B[j][k]));
        out.D.push_back(acc);
    }
    return out;
}

Poly distance_polynomial(const GradedBounds& H, const GradedBounds& Hinv, unsigned s) {
    // d^i/dx^i of H'(H^-1(x) + t): sum_k H^(k+1) B_{i,k}((H^-1)', ...).
    auto B = partial_bell(Hinv.D, s);
    Poly G = H.D[0];
    for (unsigned i = 1; i <= s; ++i) {
        Poly Gi;
        for (unsigned k = 1; k <= i; ++k) Gi = poly_add(Gi, poly_mul(H.D[k], B[i][k]));
        G = poly_max(G, Gi);
    }
    return G;
}

}  // namespace circlefac
