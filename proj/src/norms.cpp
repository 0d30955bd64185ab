#include "circlefac/norms.hpp"

#include <algorithm>

namespace circlefac {

namespace bmp = boost::multiprecision;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Factor flip(const Factor& f) {
    if (auto* r = std::get_if<RotationFactor>(&f)) return RotationFactor{-r->angle};
    auto l = std::get<LiftFactor>(f);
    l.inverse = !l.inverse;
    return l;
}

// Reduce x into [0, period).
Real reduce(const Real& x, const Real& period) { return x - bmp::floor(x / period) * period; }

// Breakpoints of f on [0, 1/P), or false when over budget.
bool period_breakpoints(const PiecewiseMap& f, const BigInt& P, std::size_t budget, std::vector<Real>& out) {
    const auto& fs = f.factors();
    Real period = 1 / to_real(P);
    for (std::size_t k = fs.size(); k-- > 0;) {
        auto* l = std::get_if<LiftFactor>(&fs[k]);
        if (!l) continue;
        BigInt per_period = l->cover / P;
        BigInt count = per_period * l->table->pieces().size();
        if (count + out.size() > budget) return false;
        std::size_t reps = per_period.convert_to<std::size_t>();
        Real Q = to_real(l->cover);
        const auto& tab = *l->table;
        for (std::size_t i = 0; i < tab.pieces().size(); ++i) {
            Real b = to_real(l->inverse ? Rational(tab.start_values()[i]) : tab.pieces()[i].lo);
            for (std::size_t j = 0; j < reps; ++j) {
                Real p = reduce((b + j) / Q, period);
                for (std::size_t m = k + 1; m < fs.size(); ++m) p = apply_factor(flip(fs[m]), p);
                out.push_back(reduce(p, period));
            }
        }
    }
    return true;
}

void collect_covers(const PiecewiseMap& f, BigInt& g) {
    for (const auto& x : f.factors())
        if (auto* l = std::get_if<LiftFactor>(&x)) g = g == 0 ? l->cover : gcd(g, l->cover);
}

struct Sample {
    Real disp;
    std::vector<Real> diff;  // |(f-g)^(i)|, i >= 1
    std::vector<Real> fabs;  // |f^(i)|, i >= 1
};

Sample sample_at(const PiecewiseMap& f, const PiecewiseMap& g, const Real& x, unsigned order,
                 bool inverse_of_f = false) {
    Jet X = Jet::variable(x, order);
    Jet jf = f.eval_jet(X);
    Jet jg = g.eval_jet(X);
    if (inverse_of_f) {
        // Data of f^-1 at y = f(x): revert the forward jet (g is the identity).
        Real y0 = jf[0];
        jf = jf.revert(x);
        jg = Jet::variable(y0, order);
    }
    Sample s;
    s.disp = jf[0] - jg[0];
    s.diff.resize(order + 1);
    s.fabs.resize(order + 1);
    for (unsigned i = 1; i <= order; ++i) {
        Real a = jf.derivative(i);
        s.diff[i] = bmp::abs(a - jg.derivative(i));
        s.fabs[i] = bmp::abs(a);
    }
    return s;
}

struct Accumulator {
    bool empty = true;
    Real dmin, dmax;
    std::vector<Real> diff, fabs;
    explicit Accumulator(unsigned order) : diff(order + 1, Real(0)), fabs(order + 1, Real(0)) {}
    void add(const Sample& s) {
        if (empty) {
            dmin = dmax = s.disp;
            empty = false;
        } else {
            if (s.disp < dmin) dmin = s.disp;
            if (s.disp > dmax) dmax = s.disp;
        }
        for (std::size_t i = 1; i < diff.size(); ++i) {
            if (s.diff[i] > diff[i]) diff[i] = s.diff[i];
            if (s.fabs[i] > fabs[i]) fabs[i] = s.fabs[i];
        }
    }
};

bool settled(const Accumulator& before, const Accumulator& after, double tol) {
    auto close = [&](const Real& a, const Real& b) {
        Real scale = bmp::max(bmp::abs(a), bmp::abs(b));
        return scale == 0 || bmp::abs(a - b) <= scale * tol;
    };
    for (std::size_t i = 1; i < before.diff.size(); ++i) {
        if (!close(before.diff[i], after.diff[i]) || !close(before.fabs[i], after.fabs[i])) return false;
    }
    return close(before.dmin, after.dmin) && close(before.dmax, after.dmax);
}

Real normalised_displacement(const Real& lo, const Real& hi) {
    Real mid = (lo + hi) / 2;
    Real best;
    bool first = true;
    for (Real k : {Real(bmp::floor(mid)), Real(bmp::ceil(mid))}) {
        Real v = bmp::max(bmp::abs(hi - k), bmp::abs(lo - k));
        if (first || v < best) best = v;
        first = false;
    }
    return best;
}

}  // namespace

BigInt chain_period(const PiecewiseMap& f) {
    BigInt g = 0;
    collect_covers(f, g);
    return g == 0 ? BigInt(1) : g;
}

bool affine_at(const PiecewiseMap& f, const Real& x) {
    Real cur = x;
    const auto& fs = f.factors();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        if (auto* l = std::get_if<LiftFactor>(&*it)) {
            Real z = cur * to_real(l->cover);
            Real local;
            if (!l->inverse) {
                local = z - bmp::floor(z);
            } else {
                Real shifted = z - to_real(l->table->value_at_zero());
                Real k = bmp::floor(shifted);
                local = l->table->solve(z - k);
            }
            if (!l->table->pieces()[l->table->locate(local)].affine()) return false;
        }
        cur = apply_factor(*it, cur);
    }
    return true;
}

namespace {

DifferenceProfile profile_impl(const PiecewiseMap& f, const PiecewiseMap& g, unsigned r, const NormOptions& opt,
                               bool inv) {
    const unsigned order = std::max(r, 1u);
    BigInt P = 0;
    collect_covers(f, P);
    collect_covers(g, P);
    if (P == 0) P = 1;
    Real period = 1 / to_real(P);

    DifferenceProfile prof;
    std::vector<Real> bps;
    bool structured = period_breakpoints(f, P, opt.breakpoint_budget, bps) &&
                      period_breakpoints(g, P, opt.breakpoint_budget, bps);

    struct Span {
        Real a, b;
        bool affine;
    };
    std::vector<Span> spans;
    if (structured) {
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
        if (bps.empty()) bps.push_back(Real(0));
        for (std::size_t i = 0; i < bps.size(); ++i) {
            Real a = bps[i];
            Real b = i + 1 < bps.size() ? bps[i + 1] : Real(bps[0] + period);
            Real c = (a + b) / 2;
            spans.push_back({a, b, affine_at(f, c) && affine_at(g, c)});
        }
    } else {
        // Too many breakpoints: uniform grid over one period, not certified.
        prof.certified = false;
        std::size_t n = opt.breakpoint_budget;
        for (std::size_t i = 0; i < n; ++i) spans.push_back({period * i / n, period * (i + 1) / n, false});
    }

    Accumulator acc(order);
    std::size_t grid = opt.initial_grid;
    for (const auto& s : spans) {
        if (s.affine) {
            // Displacement is affine: extremes at the ends; higher derivatives vanish.
            Sample sa = sample_at(f, g, s.a, 1, inv), sb = sample_at(f, g, s.b, 1, inv);
            Sample sc = sample_at(f, g, (s.a + s.b) / 2, 1, inv);
            sc.diff.resize(order + 1, Real(0));
            sc.fabs.resize(order + 1, Real(0));
            sa.diff = sb.diff = sc.diff;
            sa.fabs = sb.fabs = sc.fabs;
            acc.add(sa);
            acc.add(sb);
            prof.grid_size += 3;
            continue;
        }
        std::size_t n = structured ? grid : 16;
        for (std::size_t i = 0; i <= n; ++i) acc.add(sample_at(f, g, s.a + (s.b - s.a) * i / n, order, inv));
        prof.grid_size += n + 1;
    }
    prof.passes = 1;

    bool any_smooth = std::any_of(spans.begin(), spans.end(), [](const Span& s) { return !s.affine; });
    if (structured && any_smooth) {
        for (;;) {
            std::size_t n = grid * 2;
            if (n > opt.max_grid) {
                prof.certified = false;
                break;
            }
            Accumulator before = acc;
            for (const auto& s : spans) {
                if (s.affine) continue;
                for (std::size_t i = 1; i < n; i += 2) acc.add(sample_at(f, g, s.a + (s.b - s.a) * i / n, order, inv));
                prof.grid_size += n / 2;
            }
            grid = n;
            ++prof.passes;
            if (settled(before, acc, opt.rel_tol)) break;
        }
    }

    prof.disp_min = acc.dmin;
    prof.disp_max = acc.dmax;
    prof.diff_sup = acc.diff;
    prof.f_sup = acc.fabs;
    prof.diff_sup[0] = normalised_displacement(acc.dmin, acc.dmax);
    prof.diff_sup.resize(r + 1);
    prof.f_sup.resize(r + 1);
    return prof;
}

}  // namespace

DifferenceProfile difference_profile(const PiecewiseMap& f, const PiecewiseMap& g, unsigned r,
                                     const NormOptions& opt) {
    return profile_impl(f, g, r, opt, false);
}

DifferenceProfile inverse_profile(const PiecewiseMap& f, unsigned r, const NormOptions& opt) {
    return profile_impl(f, PiecewiseMap::identity(), r, opt, true);
}

namespace {

NormReport report_from(const DifferenceProfile& p, unsigned r) {
    NormReport rep;
    rep.order = r;
    rep.per_order = p.diff_sup;
    rep.value = 0;
    for (const auto& v : p.diff_sup)
        if (v > rep.value) rep.value = v;
    rep.grid_size = p.grid_size;
    rep.refinement_passes = p.passes;
    rep.certified = p.certified;
    return rep;
}

NormReport merge(const NormReport& a, const NormReport& b) {
    NormReport out = a;
    for (std::size_t i = 0; i < out.per_order.size(); ++i)
        if (b.per_order[i] > out.per_order[i]) out.per_order[i] = b.per_order[i];
    if (b.value > out.value) out.value = b.value;
    out.grid_size += b.grid_size;
    out.refinement_passes = std::max(a.refinement_passes, b.refinement_passes);
    out.certified = a.certified && b.certified;
    return out;
}

}  // namespace

NormReport cr_norm(const PiecewiseMap& f, unsigned r, NormMode mode, const NormOptions& opt) {
    NormReport fwd = report_from(difference_profile(f, PiecewiseMap::identity(), r, opt), r);
    if (mode == NormMode::DifferenceFromIdentity) return fwd;
    NormReport out = merge(fwd, report_from(inverse_profile(f, r, opt), r));
    if (out.value < 1) out.value = 1;
    return out;
}

NormReport cr_dist(const PiecewiseMap& f, const PiecewiseMap& g, unsigned r, const NormOptions& opt) {
    NormReport a = report_from(difference_profile(f, g, r, opt), r);
    NormReport b = report_from(difference_profile(f.inverse(), g.inverse(), r, opt), r);
    return merge(a, b);
}

std::vector<Real> derivative_sups(const PiecewiseMap& f, unsigned max_order, const NormOptions& opt) {
    DifferenceProfile p = difference_profile(f, PiecewiseMap::identity(), max_order, opt);
    return std::vector<Real>(p.f_sup.begin() + 1, p.f_sup.end());
}

}  // namespace circlefac

namespace circlefac {

std::vector<Real> inverse_derivative_sups(const PiecewiseMap& f, unsigned max_order, const NormOptions& opt) {
    DifferenceProfile p = inverse_profile(f, max_order, opt);
    return std::vector<Real>(p.f_sup.begin() + 1, p.f_sup.end());
}

}  // namespace circlefac
