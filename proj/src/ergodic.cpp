#include "circlefac/ergodic.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace circlefac {

namespace bmp = boost::multiprecision;

namespace {

Rational length(const RationalInterval& I) { return I.hi - I.lo; }

const RationalInterval& core(const StageGenerator& g, int side) { return side > 0 ? g.I_plus : g.I_minus; }
const RationalInterval& arc(const StageGenerator& g, int side) { return side > 0 ? g.J_plus : g.J_minus; }

const RationalInterval& level_piece(const StageGenerator& g, int side, LevelKind kind) {
    return kind == LevelKind::Y ? arc(g, side) : core(g, side);
}

std::vector<int> sides_for(LevelKind kind) {
    if (kind == LevelKind::X_plus) return {1};
    return {-1, 1};
}

BigInt ceil_r(const Rational& x) { return -floor(Rational(-x)); }

// Cells of level k lying inside [lo, hi]: [first, last].
std::pair<BigInt, BigInt> cells_inside(const Rational& lo, const Rational& hi, const BigInt& Q) {
    return {ceil_r(lo * Q), floor(hi * Q) - 1};
}

// Count of X_n components with the given side path (components per path).
BigInt path_count(const ConstructionTrace& tr, const std::vector<int>& path, LevelKind kind) {
    Rational c = Rational(tr.stage(1).Q);
    for (std::size_t j = 1; j < path.size(); ++j) {
        const auto& prev = tr.stage(static_cast<unsigned>(j));
        const auto& cur = tr.stage(static_cast<unsigned>(j + 1));
        c *= length(level_piece(prev.generator, path[j - 1], kind)) * Rational(cur.Q) / Rational(prev.Q);
    }
    if (denominator(c) != 1) throw std::logic_error("component count is not an integer");
    return numerator(c);
}

// Representative component for a side path; choice 0/1/2 picks the first,
// middle or last admissible cell at every level.
RationalInterval path_representative(const ConstructionTrace& tr, const std::vector<int>& path, int choice,
                                     LevelKind kind) {
    RationalInterval C{0, 1};
    for (std::size_t k = 1; k <= path.size(); ++k) {
        const auto& st = tr.stage(static_cast<unsigned>(k));
        auto [c0, c1] = cells_inside(C.lo, C.hi, st.Q);
        BigInt c = choice == 0 ? c0 : choice == 1 ? BigInt((c0 + c1) / 2) : c1;
        const auto& piece = level_piece(st.generator, path[k - 1], kind);
        Rational Q(st.Q);
        C = {(Rational(c) + piece.lo) / Q, (Rational(c) + piece.hi) / Q};
    }
    return C;
}

std::vector<std::vector<int>> all_paths(unsigned n, LevelKind kind) {
    std::vector<std::vector<int>> out{{}};
    for (unsigned k = 0; k < n; ++k) {
        std::vector<std::vector<int>> next;
        for (const auto& p : out)
            for (int s : sides_for(kind)) {
                auto q = p;
                q.push_back(s);
                next.push_back(q);
            }
        out = std::move(next);
    }
    return out;
}

BigInt mod_inverse(const BigInt& a, const BigInt& m) {
    BigInt r0 = ((a % m) + m) % m, r1 = m, s0 = 1, s1 = 0;
    while (r1 != 0) {
        BigInt qq = r0 / r1;
        BigInt t = r0 - qq * r1;
        r0 = r1;
        r1 = t;
        t = s0 - qq * s1;
        s0 = s1;
        s1 = t;
    }
    if (r0 != 1) throw std::invalid_argument("mod_inverse: not invertible");
    return ((s0 % m) + m) % m;
}

}  // namespace

int core_side(const ConstructionTrace& tr, unsigned k, const Rational& x) {
    const auto& st = tr.stage(k);
    Rational u = frac(x * Rational(st.Q));
    const auto& g = st.generator;
    if (g.I_plus.lo <= u && u <= g.I_plus.hi) return 1;
    if (g.I_minus.lo <= u && u <= g.I_minus.hi) return -1;
    return 0;
}

int affine_side(const ConstructionTrace& tr, unsigned k, const Rational& x) {
    const auto& st = tr.stage(k);
    Rational u = frac(x * Rational(st.Q));
    const auto& g = st.generator;
    if (g.J_plus.lo <= u && u <= g.J_plus.hi) return 1;
    if (g.J_minus.lo <= u && u <= g.J_minus.hi) return -1;
    return 0;
}

bool in_X(const ConstructionTrace& tr, unsigned n, const Rational& x, std::vector<int>* sides) {
    if (sides) sides->clear();
    for (unsigned k = 1; k <= n; ++k) {
        int s = core_side(tr, k, x);
        if (sides) sides->push_back(s);
        if (s == 0) return false;
    }
    return true;
}

// ---------------------------------------------------------------- level sets

LevelSet build_level_sets(const ConstructionTrace& tr, unsigned n, LevelKind kind, std::size_t cap,
                          std::optional<RationalInterval> window) {
    if (n < 1 || n > tr.stages.size()) throw std::out_of_range("build_level_sets: depth beyond the trace");
    LevelSet L;
    L.n = n;
    L.kind = kind;
    for (const auto& p : all_paths(n, kind)) L.total_count += path_count(tr, p, kind);
    if (window) L.window = *window;
    else if (L.total_count <= BigInt(cap)) L.window = {0, 1};
    else L.window = {0, Rational(BigInt(1), tr.stage(1).Q)};

    // cur holds whole components that meet the window; the window only
    // limits which cells are enumerated and which final components are kept.
    std::vector<RationalInterval> cur{{0, 1}};
    for (unsigned k = 1; k <= n; ++k) {
        const auto& st = tr.stage(k);
        Rational Q(st.Q);
        std::vector<RationalInterval> next;
        for (const auto& P : cur) {
            Rational lo = std::max(P.lo, L.window.lo), hi = std::min(P.hi, L.window.hi);
            BigInt c0 = floor(lo * Q), c1 = ceil_r(hi * Q) - 1;
            if (c1 - c0 + 1 > BigInt(cap))
                throw ComponentExplosion("level " + std::to_string(k) + " needs " + to_string(BigInt(c1 - c0 + 1)) +
                                         " cells inside one parent; restrict the window");
            for (BigInt c = c0; c <= c1; ++c)
                for (int s : sides_for(kind)) {
                    const auto& piece = level_piece(st.generator, s, kind);
                    RationalInterval C{(Rational(c) + piece.lo) / Q, (Rational(c) + piece.hi) / Q};
                    if (C.lo < P.lo || C.hi > P.hi) continue;
                    bool keep = k < n ? (C.lo < L.window.hi && C.hi > L.window.lo)
                                      : (C.lo >= L.window.lo && C.hi <= L.window.hi);
                    if (keep) next.push_back(C);
                }
            if (next.size() > cap) throw ComponentExplosion("more than " + std::to_string(cap) + " components");
        }
        cur = std::move(next);
    }
    L.components = std::move(cur);
    return L;
}

std::optional<RationalInterval> image_of_component(const ConstructionTrace& tr, unsigned n,
                                                   const RationalInterval& c) {
    const auto& H = tr.stage(n).H;
    auto a = H.eval_exact(c.lo), b = H.eval_exact(c.hi);
    if (!a || !b) return std::nullopt;
    return RationalInterval{*a, *b};
}

MeasureReport xi_measure(const ConstructionTrace& tr, unsigned n) {
    if (n < 1 || n > tr.stages.size()) throw std::out_of_range("xi_measure: depth beyond the trace");
    MeasureReport R;
    R.exact = 1;
    for (unsigned k = 1; k <= n; ++k) {
        R.exact *= 1 - tr.stage(k).generator.delta_prime;
        R.partial_products.push_back(R.exact);
    }
    R.direct = 0;
    for (const auto& path : all_paths(n, LevelKind::X)) {
        PathMeasure pm;
        pm.path = path;
        pm.count = path_count(tr, path, LevelKind::X);
        std::optional<Rational> first;
        for (int choice = 0; choice < 3; ++choice) {
            auto C = path_representative(tr, path, choice, LevelKind::X);
            auto img = image_of_component(tr, n, C);
            if (!img) {
                pm.equal_across_representatives = false;
                continue;
            }
            Rational len = img->hi - img->lo;
            if (!first) {
                first = len;
                pm.length = C.hi - C.lo;
            } else if (len != *first) {
                pm.equal_across_representatives = false;
            }
        }
        pm.image_length = first.value_or(Rational(0));
        R.equal_measure = R.equal_measure && pm.equal_across_representatives && first.has_value();
        R.direct += Rational(pm.count) * pm.image_length;
        R.paths.push_back(pm);
    }
    R.match = R.exact == R.direct;
    return R;
}

// ---------------------------------------------------------------- cocycles

Real CocycleValue::resolved() const {
    Real v = 1;
    for (const auto& [sym, e] : exponents) {
        auto it = bases.find(sym);
        if (it == bases.end()) continue;
        v *= bmp::pow(to_real(it->second), e);
    }
    return v;
}

bool CocycleValue::zero() const {
    return std::all_of(exponents.begin(), exponents.end(), [](const auto& kv) { return kv.second == 0; });
}

long CocycleValue::exponent(const std::string& symbol) const {
    auto it = exponents.find(symbol);
    return it == exponents.end() ? 0 : it->second;
}

std::string CocycleValue::describe() const {
    std::ostringstream os;
    bool any = false;
    for (const auto& [sym, e] : exponents) {
        if (e == 0) continue;
        if (any) os << " * ";
        os << sym << "^" << e;
        any = true;
    }
    if (!any) os << "1";
    if (!exact) os << " (inexact)";
    return os.str();
}

CocycleValue& CocycleValue::operator*=(const CocycleValue& o) {
    for (const auto& [sym, e] : o.exponents) exponents[sym] += e;
    for (const auto& [sym, b] : o.bases) bases[sym] = b;
    exact = exact && o.exact;
    numeric *= o.numeric;
    return *this;
}

CocycleValue CocycleValue::inverse() const {
    CocycleValue c = *this;
    for (auto& [sym, e] : c.exponents) e = -e;
    c.numeric = 1 / numeric;
    return c;
}

namespace {

// Walks p_n = p, p_{k-1} = h_k(p_k) and multiplies h_k'(p_k)^sign into v.
void accumulate(const ConstructionTrace& tr, unsigned n, const Rational& p, int sign, CocycleValue& v) {
    std::optional<Rational> pe = p;
    Real pr = to_real(p);
    for (unsigned k = n; k >= 1; --k) {
        const auto& st = tr.stage(k);
        const auto& g = st.generator;
        v.bases[g.slopes.symbol] = g.slopes.base;
        v.exponents.try_emplace(g.slopes.symbol, 0);
        bool done = false;
        if (pe) {
            Rational u = frac(*pe * Rational(st.Q));
            auto sl = factor_slope_exact(st.h.factors()[0], *pe);
            const auto& piece = g.table->pieces()[g.table->locate(u)];
            if (sl && piece.affine()) {
                long e = *sl == g.slopes.slope_plus ? g.slopes.exp_plus : g.slopes.exp_minus;
                v.exponents[g.slopes.symbol] += sign * e;
                Real sr = to_real(*sl);
                v.numeric *= sign > 0 ? sr : Real(1 / sr);
                auto next = st.h.eval_exact(*pe);
                pe = next;
                if (next) pr = to_real(*next);
                else pr = st.h.eval(pr);
                done = true;
            }
        }
        if (!done) {
            v.exact = false;
            Real d = st.h.derivative(pr, 1);
            v.numeric *= sign > 0 ? d : Real(1 / d);
            pe.reset();
            pr = st.h.eval(pr);
        }
        if (k == 1) break;
    }
}

}  // namespace

CocycleValue derivative_cocycle(const ConstructionTrace& tr, unsigned n, const Rational& x, const BigInt& i) {
    if (n < 1 || n > tr.stages.size()) throw std::out_of_range("derivative_cocycle: depth beyond the trace");
    CocycleValue v;
    if (i == 0) {
        for (unsigned k = 1; k <= n; ++k) {
            const auto& s = tr.stage(k).generator.slopes;
            v.bases[s.symbol] = s.base;
            v.exponents.try_emplace(s.symbol, 0);
        }
        return v;
    }
    Rational y = x + Rational(i) * tr.alpha(n + 1);
    accumulate(tr, n, y, 1, v);
    accumulate(tr, n, x, -1, v);
    return v;
}

Real numeric_derivative(const ConstructionTrace& tr, unsigned n, const Rational& x, const BigInt& i) {
    const auto& H = tr.stage(n).H;
    Rational y = x + Rational(i) * tr.alpha(n + 1);
    Real dx = H.derivative(to_real(x), 1);
    Real dy = H.derivative(to_real(frac(y)), 1);
    return dy / dx;
}

// ---------------------------------------------------------------- returns

std::vector<Rational> component_midpoints(const ConstructionTrace& tr, unsigned n, std::size_t cells,
                                          bool plus_only) {
    RationalInterval parent{0, Rational(BigInt(1), tr.stage(1).Q)};
    if (n >= 2) {
        std::vector<int> path(n - 1, plus_only ? 1 : -1);
        parent = path_representative(tr, path, 0, LevelKind::X);
    }
    const auto& st = tr.stage(n);
    auto [c0, c1] = cells_inside(parent.lo, parent.hi, st.Q);
    BigInt avail = c1 - c0 + 1;
    std::vector<Rational> out;
    Rational Q(st.Q);
    for (std::size_t k = 0; k < cells && BigInt(k) < avail; ++k) {
        BigInt c = c0 + avail * BigInt(k) / BigInt(std::max<std::size_t>(cells, 1));
        for (int s : {-1, 1}) {
            if (plus_only && s < 0) continue;
            const auto& I = core(st.generator, s);
            out.push_back((Rational(c) + (I.lo + I.hi) / 2) / Q);
        }
    }
    return out;
}

std::string ratio_rule_violation(StageType type, unsigned n, const CocycleValue& v) {
    if (!v.exact) return "factor on a join piece";
    switch (type) {
        case StageType::III_lambda:
            if (v.exponent("lambda^(1/2)") % 2 != 0) return "not in lambda^Z";
            break;
        case StageType::III_infty:
            for (const auto& [sym, e] : v.exponents)
                if (e != 0 && sym != "lambda1" && sym != "lambda2") return "unexpected generator " + sym;
            break;
        case StageType::III_0: {
            long gap = 1;
            for (unsigned k = 1; k < n; ++k) gap *= 3;
            long e = std::labs(v.exponent("3"));
            if (e != 0 && e < gap) return "|log_3| below the gap";
            break;
        }
        case StageType::II_infty:
            if (!v.zero()) return "nonzero exponent on a plus-return";
            break;
    }
    return {};
}

MembershipReport ratio_membership(const ConstructionTrace& tr, unsigned n, const std::vector<Rational>& starts,
                                  std::size_t i_max) {
    MembershipReport R;
    PrecisionScope ps(tr.working_bits());
    const StageType type = tr.config.family.type;
    const bool plus_only = type == StageType::II_infty;
    const Rational& a = tr.alpha(n + 1);
    std::set<std::string> seen;
    bool saw1 = false, saw2 = false;

    auto admissible = [&](const std::vector<int>& sides) {
        if (sides.size() != n) return false;
        for (int s : sides)
            if (s == 0 || (plus_only && s < 0)) return false;
        return true;
    };

    for (const auto& x : starts) {
        std::vector<int> sx;
        in_X(tr, n, x, &sx);
        if (!admissible(sx)) continue;
        for (long ii = -static_cast<long>(i_max); ii <= static_cast<long>(i_max); ++ii) {
            if (ii == 0) continue;
            ++R.scanned;
            Rational y = frac(x + Rational(ii) * a);
            std::vector<int> sy;
            in_X(tr, n, y, &sy);
            if (!admissible(sy)) continue;
            ++R.returns;
            ReturnSample rs;
            rs.x = x;
            rs.i = ii;
            rs.sides_x = sx;
            rs.sides_y = sy;
            rs.value = derivative_cocycle(tr, n, x, BigInt(ii));
            const auto& v = rs.value;
            // Exponents predicted by the side paths.
            std::map<std::string, long> predicted;
            for (unsigned k = 1; k <= n; ++k) {
                const auto& s = tr.stage(k).generator.slopes;
                auto e = [&](int side) { return side > 0 ? s.exp_plus : s.exp_minus; };
                predicted[s.symbol] += e(sy[k - 1]) - e(sx[k - 1]);
            }
            bool ok = v.exact;
            if (!ok) rs.note = "factor on a join piece";
            for (const auto& [sym, e] : predicted)
                if (v.exponent(sym) != e) {
                    ok = false;
                    rs.note = "exponent differs from the side-path prediction";
                }
            Real rel = abs(v.resolved() / v.numeric - 1);
            if (rel > Real("1e-20")) {
                ok = false;
                rs.note = "resolved value differs from the derivative product";
            }
            if (auto why = ratio_rule_violation(type, n, v); !why.empty()) {
                ok = false;
                rs.note = why;
            }
            if (v.exponent("lambda1") != 0) saw1 = true;
            if (v.exponent("lambda2") != 0) saw2 = true;
            rs.violation = !ok;
            if (!ok) ++R.violations;
            seen.insert(v.describe());
            R.samples.push_back(std::move(rs));
        }
    }
    R.observed.assign(seen.begin(), seen.end());
    if (type == StageType::III_infty) R.evidence = saw1 && (n < 2 || saw2);
    std::ostringstream os;
    os << R.returns << " returns out of " << R.scanned << " scanned, " << R.violations << " violations, "
       << R.observed.size() << " distinct values";
    R.summary = os.str();
    return R;
}

namespace {

// i in [0, q_{n+1}) with frac(from + i alpha_{n+1}) nearest to `to`.
BigInt solve_return(const ConstructionTrace& tr, unsigned n, const Rational& from, const Rational& to) {
    const Rational& a = tr.alpha(n + 1);
    BigInt q = denominator(a), p = numerator(a);
    BigInt m = floor((to - from) * Rational(q) + Rational(1, 2));
    return (m % q + q) % q * mod_inverse(p, q) % q;
}

std::map<std::string, long> side_exponents(const ConstructionTrace& tr, const std::vector<int>& sx,
                                           const std::vector<int>& sy) {
    std::map<std::string, long> out;
    for (unsigned k = 1; k <= sx.size(); ++k) {
        const auto& s = tr.stage(k).generator.slopes;
        auto e = [&](int side) { return side > 0 ? s.exp_plus : s.exp_minus; };
        out[s.symbol] += e(sy[k - 1]) - e(sx[k - 1]);
    }
    return out;
}

Rational exact_value(const CocycleValue& v) {
    Rational r = 1;
    for (const auto& [sym, e] : v.exponents) r *= rpow(v.bases.at(sym), e);
    return r;
}

}  // namespace

PairScanReport component_pair_scan(const ConstructionTrace& tr, unsigned n, std::size_t cap) {
    PairScanReport R;
    PrecisionScope ps(tr.working_bits());
    const StageType type = tr.config.family.type;
    const LevelKind kind = type == StageType::II_infty ? LevelKind::X_plus : LevelKind::X;
    std::vector<RationalInterval> comps;
    try {
        // One X^+ component per fundamental domain: widen to four domains.
        BigInt domains = kind == LevelKind::X_plus ? 4 : 1;
        comps = build_level_sets(tr, n, kind, cap, RationalInterval{0, Rational(domains, tr.stage(1).Q)})
                    .components;
        R.exhaustive = true;
    } catch (const ComponentExplosion&) {
        for (const auto& path : all_paths(n, kind))
            for (int choice = 0; choice < 3; ++choice) comps.push_back(path_representative(tr, path, choice, kind));
    }
    R.components = comps.size();
    std::set<std::string> seen;
    const auto& H = tr.stage(n).H;
    for (const auto& C : comps)
        for (const auto& D : comps) {
            if (C.lo == D.lo) continue;
            ++R.pairs;
            ReturnSample rs;
            rs.x = (C.lo + C.hi) / 2;
            rs.i = solve_return(tr, n, rs.x, (D.lo + D.hi) / 2);
            Rational y = frac(rs.x + Rational(rs.i) * tr.alpha(n + 1));
            bool ok = D.lo <= y && y <= D.hi && in_X(tr, n, rs.x, &rs.sides_x) && in_X(tr, n, y, &rs.sides_y);
            if (!ok) {
                rs.note = "constructed return missed the target component";
            } else {
                ++R.realised;
                rs.value = derivative_cocycle(tr, n, rs.x, rs.i);
                if (auto why = ratio_rule_violation(type, n, rs.value); !why.empty()) {
                    ok = false;
                    rs.note = why;
                }
                for (const auto& [sym, e] : side_exponents(tr, rs.sides_x, rs.sides_y))
                    if (rs.value.exponent(sym) != e) {
                        ok = false;
                        rs.note = "exponent differs from the side-path prediction";
                    }
                // Affinity of H_n on both components: the slope ratio is the cocycle.
                auto sx = H.exact_slope(rs.x), sy = H.exact_slope(y);
                if (!sx || !sy || *sy / *sx != exact_value(rs.value)) {
                    ok = false;
                    rs.note = "H_n slope ratio differs from the cocycle";
                }
                seen.insert(rs.value.describe());
            }
            rs.violation = !ok;
            if (!ok) ++R.violations;
            R.samples.push_back(std::move(rs));
        }
    R.observed.assign(seen.begin(), seen.end());
    std::ostringstream os;
    os << R.pairs << " ordered pairs over " << R.components << (R.exhaustive ? " components" : " representatives")
       << ", " << R.realised << " realised, " << R.violations << " violations";
    R.summary = os.str();
    return R;
}

ReturnPair find_return_pair(const ConstructionTrace& tr, unsigned n, const Rational& target) {
    ReturnPair out;
    if (n < 1 || n > tr.stages.size()) {
        out.diagnostic = "depth beyond the trace";
        return out;
    }
    const auto& st = tr.stage(n);
    const auto& s = st.generator.slopes;
    auto mids = component_midpoints(tr, n, 1);
    if (mids.size() < 2) {
        out.diagnostic = "no level-n cell inside a level-(n-1) component";
        return out;
    }
    if (target == 1) {
        out.found = true;
        out.x = mids[0];
        out.y = mids[0];
        out.i = 0;
        out.value = derivative_cocycle(tr, n, mids[0], 0);
        out.diagnostic = "trivial return";
        return out;
    }
    Rational ratio = s.slope_plus / s.slope_minus;
    Rational from, to;
    if (target == ratio) {
        from = mids[0];  // I- midpoint
        to = mids[1];    // I+ midpoint
    } else if (target == 1 / ratio) {
        from = mids[1];
        to = mids[0];
    } else {
        out.diagnostic = "target " + to_string(target) + " is not in the exponent lattice of a stage-" +
                         std::to_string(n) + " swap (ratio " + to_string(ratio) + ")";
        return out;
    }
    const Rational& a = tr.alpha(n + 1);
    BigInt i = solve_return(tr, n, from, to);
    Rational y = frac(from + Rational(i) * a);
    std::vector<int> sx, sy;
    if (!in_X(tr, n, from, &sx) || !in_X(tr, n, y, &sy)) {
        out.diagnostic = "rotated midpoint left the core set";
        return out;
    }
    auto v = derivative_cocycle(tr, n, from, i);
    if (!v.exact || exact_value(v) != target) {
        out.diagnostic = "cocycle " + v.describe() + " differs from the target";
        return out;
    }
    out.found = true;
    out.x = from;
    out.y = y;
    out.i = i;
    out.value = v;
    out.diagnostic = "I- to I+ swap inside one level-" + std::to_string(n) + " cell";
    return out;
}

RotationEstimate rotation_number(const PiecewiseMap& f, std::size_t iterates, const Real& x0) {
    if (iterates < 1) throw std::invalid_argument("rotation_number: iterates must be >= 1");
    Real x = x0;
    for (std::size_t k = 0; k < iterates; ++k) x = f.eval(x);
    RotationEstimate e;
    e.iterates = iterates;
    e.value = (x - x0) / Real(iterates);
    e.error_bound = Real(1) / Real(iterates);
    return e;
}

SingularityReport singularity_diagnostic(const ConstructionTrace& tr, unsigned n, const Rational& xi_floor) {
    SingularityReport R;
    if (tr.config.family.type != StageType::II_infty) {
        R.summary = "singularity diagnostic applies to II_inf traces only";
        return R;
    }
    Rational formula = 1;
    R.formula_match = true;
    R.max_core_proportion = 0;
    for (unsigned k = 1; k <= n; ++k) {
        std::vector<int> path(k, 1);
        BigInt count = path_count(tr, path, LevelKind::X_plus);
        const auto& g = tr.stage(k).generator;
        Rational comp = length(g.I_plus) / Rational(tr.stage(k).Q);
        R.x_plus.push_back(Rational(count) * comp);
        auto img = image_of_component(tr, k, path_representative(tr, path, 1, LevelKind::X_plus));
        Rational xi = img ? Rational(count) * (img->hi - img->lo) : Rational(0);
        R.xi_plus.push_back(xi);
        formula *= g.slopes.slope_plus * length(g.I_plus);
        R.xi_plus_formula.push_back(formula);
        if (!img || xi != formula) R.formula_match = false;
        R.xi_total.push_back(xi_measure(tr, k).direct);
        if (k >= 2) R.max_core_proportion = std::max(R.max_core_proportion, length(g.I_plus));
    }
    R.decreasing = true;
    for (std::size_t k = 1; k < R.x_plus.size(); ++k)
        if (!(R.x_plus[k] < R.x_plus[k - 1])) R.decreasing = false;
    bool ratio_ok = true;
    if (R.x_plus.size() >= 2) {
        R.ratio_21 = R.x_plus[1] / R.x_plus[0];
        ratio_ok = R.ratio_21 <= Rational(1, 4) && R.ratio_21 <= R.max_core_proportion;
    }
    bool floor_ok = std::all_of(R.xi_plus.begin(), R.xi_plus.end(), [&](const Rational& v) { return v > xi_floor; });
    bool nested = true;
    for (std::size_t k = 0; k < R.xi_plus.size(); ++k)
        if (R.xi_plus[k] > R.xi_total[k]) nested = false;
    R.verdict = R.decreasing && ratio_ok && floor_ok && R.formula_match && nested;
    std::ostringstream os;
    os << "m(X^+) ";
    for (const auto& v : R.x_plus) os << bmp::pow(to_real(v), 1).str(6) << " ";
    os << "| m(Xi^+) ";
    for (const auto& v : R.xi_plus) os << to_real(v).str(6) << " ";
    R.summary = os.str();
    return R;
}

}  // namespace circlefac
