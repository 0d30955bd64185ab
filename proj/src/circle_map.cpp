#include "circlefac/circle_map.hpp"

#include "circlefac/join_profile.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace circlefac {

namespace bmp = boost::multiprecision;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

BigInt real_floor(const Real& x) {
    Real f = bmp::floor(x);
    BigInt z;
    mpfr_get_z(z.backend().data(), f.backend().data(), MPFR_RNDD);
    return z;
}

}  // namespace

// ---------------------------------------------------------------- Piece

std::optional<Rational> Piece::value_exact(const Rational& x) const {
    return std::visit(
        overloaded{
            [&](const AffinePiece& a) -> std::optional<Rational> { return a.slope * x + a.intercept; },
            [&](const JoinPiece& j) -> std::optional<Rational> {
                Rational u = (x - j.start) / j.width;
                auto s = join::S_exact(u);
                if (!s) return std::nullopt;
                return j.start_value + j.slope_left * (x - j.start) +
                       (j.slope_right - j.slope_left) * j.width * *s;
            }},
        kind);
}

Real Piece::value(const Real& x) const {
    return std::visit(
        overloaded{[&](const AffinePiece& a) -> Real { return to_real(a.slope) * x + to_real(a.intercept); },
                   [&](const JoinPiece& j) -> Real {
                       Real dx = x - to_real(j.start);
                       Real w = to_real(j.width);
                       Real u = dx / w;
                       return to_real(j.start_value) + to_real(j.slope_left) * dx +
                              to_real(j.slope_right - j.slope_left) * w * join::S(u);
                   }},
        kind);
}

Jet Piece::jet(const Real& x, unsigned order) const {
    return std::visit(
        overloaded{[&](const AffinePiece& a) -> Jet {
                       Jet r(order);
                       r[0] = to_real(a.slope) * x + to_real(a.intercept);
                       if (order >= 1) r[1] = to_real(a.slope);
                       return r;
                   },
                   [&](const JoinPiece& j) -> Jet {
                       Real w = to_real(j.width);
                       Real dx = x - to_real(j.start);
                       Jet s = join::S_jet(dx / w, order);
                       Real scale = 1;
                       for (unsigned k = 0; k <= order; ++k) {
                           s[k] *= scale;
                           scale /= w;
                       }
                       s *= to_real(j.slope_right - j.slope_left) * w;
                       s[0] += to_real(j.start_value) + to_real(j.slope_left) * dx;
                       if (order >= 1) s[1] += to_real(j.slope_left);
                       return s;
                   }},
        kind);
}

std::optional<Rational> Piece::slope_exact(const Rational& x) const {
    return std::visit(overloaded{[&](const AffinePiece& a) -> std::optional<Rational> { return a.slope; },
                                 [&](const JoinPiece& j) -> std::optional<Rational> {
                                     Rational u = (x - j.start) / j.width;
                                     if (u <= 0) return j.slope_left;
                                     if (u >= 1) return j.slope_right;
                                     if (u == Rational(1, 2)) return (j.slope_left + j.slope_right) / 2;
                                     return std::nullopt;
                                 }},
                      kind);
}

// ---------------------------------------------------------------- PieceTable

PieceTable::PieceTable(std::vector<Piece> pieces, std::string label)
    : pieces_(std::move(pieces)), label_(std::move(label)) {
    if (pieces_.empty()) throw std::invalid_argument("piece table needs at least one piece");
    start_values_.reserve(pieces_.size() + 1);
    for (const auto& p : pieces_) {
        auto v = p.value_exact(p.lo);
        if (!v) throw std::invalid_argument("piece start value is not exact (join must start at u in {0,1/2,1})");
        start_values_.push_back(*v);
    }
    start_values_.push_back(start_values_.front() + 1);
}

std::vector<std::string> PieceTable::validate() const {
    std::vector<std::string> issues;
    auto say = [&](std::size_t i, const std::string& what) {
        std::ostringstream os;
        os << "piece " << i << ": " << what;
        issues.push_back(os.str());
    };
    if (pieces_.front().lo != 0) say(0, "does not start at 0");
    if (pieces_.back().hi != 1) say(pieces_.size() - 1, "does not end at 1");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const Piece& p = pieces_[i];
        if (!(p.lo < p.hi)) say(i, "empty or reversed domain");
        if (i + 1 < pieces_.size() && p.hi != pieces_[i + 1].lo) say(i, "gap before next piece");
        if (auto* j = std::get_if<JoinPiece>(&p.kind)) {
            if (!(j->width > 0)) say(i, "join width not positive");
            if (p.lo < j->start || p.hi > j->start + j->width) say(i, "domain leaves its join window");
            if (!(j->slope_left > 0 && j->slope_right > 0)) say(i, "join slopes not positive");
        } else {
            if (!(std::get<AffinePiece>(p.kind).slope > 0)) say(i, "affine slope not positive");
        }
        auto end = p.value_exact(p.hi);
        if (!end) {
            say(i, "end value not exact");
        } else if (*end != start_values_[i + 1]) {
            say(i, "discontinuous at right end (value " + to_string(*end) + " vs " + to_string(start_values_[i + 1]) + ")");
        }
        auto ds = p.slope_exact(p.hi);
        std::optional<Rational> dn;
        if (i + 1 < pieces_.size()) dn = pieces_[i + 1].slope_exact(pieces_[i + 1].lo);
        else dn = pieces_.front().slope_exact(pieces_.front().lo);
        if (!ds || !dn || *ds != *dn) say(i, "derivative mismatch at right end");
        if (!(start_values_[i + 1] > start_values_[i])) say(i, "not increasing");
    }
    return issues;
}

std::size_t PieceTable::locate(const Rational& x) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](const Rational& v, const Piece& p) { return v < p.lo; });
    if (it == pieces_.begin()) return 0;
    return static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

std::size_t PieceTable::locate(const Real& x) const {
    std::size_t lo = 0, hi = pieces_.size();
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (x < to_real(pieces_[mid].lo)) hi = mid;
        else lo = mid;
    }
    return lo;
}

std::optional<Rational> PieceTable::value_exact(const Rational& x) const {
    return pieces_[locate(x)].value_exact(x);
}

Real PieceTable::value(const Real& x) const { return pieces_[locate(x)].value(x); }

Jet PieceTable::jet(const Real& x, unsigned order) const { return pieces_[locate(x)].jet(x, order); }

std::optional<Rational> PieceTable::solve_exact(const Rational& y) const {
    auto it = std::upper_bound(start_values_.begin(), start_values_.end() - 1, y);
    std::size_t i = it == start_values_.begin() ? 0 : static_cast<std::size_t>(it - start_values_.begin()) - 1;
    const Piece& p = pieces_[i];
    if (auto* a = std::get_if<AffinePiece>(&p.kind)) return (y - a->intercept) / a->slope;
    if (y == start_values_[i]) return p.lo;
    const auto& j = std::get<JoinPiece>(p.kind);
    Rational centre = j.start + j.width / 2;
    if (p.lo < centre && centre < p.hi) {
        auto v = p.value_exact(centre);
        if (v && *v == y) return centre;
    }
    return std::nullopt;
}

Real PieceTable::solve(const Real& y) const {
    std::size_t lo = 0, hi = pieces_.size();
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (y < to_real(start_values_[mid])) hi = mid;
        else lo = mid;
    }
    const Piece& p = pieces_[lo];
    if (auto* a = std::get_if<AffinePiece>(&p.kind)) return (y - to_real(a->intercept)) / to_real(a->slope);

    // Safeguarded Newton on the join piece.
    const auto& j = std::get<JoinPiece>(p.kind);
    Real a = to_real(p.lo), b = to_real(p.hi);
    Real ya = to_real(start_values_[lo]), yb = to_real(start_values_[lo + 1]);
    Real w = to_real(j.width), js = to_real(j.start);
    Real sl = to_real(j.slope_left), ds = to_real(j.slope_right - j.slope_left);
    Real x = a + (b - a) * (y - ya) / (yb - ya);
    Real tol = w * Real(1e-27);
    for (int it = 0; it < 200; ++it) {
        Real fx = p.value(x) - y;
        if (fx > 0) b = x;
        else a = x;
        Real d = sl + ds * join::sigma((x - js) / w);
        Real step = fx / d;
        Real nx = x - step;
        if (!(nx > a && nx < b)) nx = (a + b) / 2;
        Real moved = bmp::abs(nx - x);
        x = nx;
        if (moved < tol) break;
    }
    return x;
}

Rational PieceTable::max_slope() const {
    Rational m = 0;
    for (const auto& p : pieces_) {
        if (auto* a = std::get_if<AffinePiece>(&p.kind)) m = std::max(m, a->slope);
        else {
            const auto& j = std::get<JoinPiece>(p.kind);
            m = std::max({m, j.slope_left, j.slope_right});
        }
    }
    return m;
}

Rational PieceTable::min_slope() const {
    std::optional<Rational> m;
    auto take = [&](const Rational& v) { m = m ? std::min(*m, v) : v; };
    for (const auto& p : pieces_) {
        if (auto* a = std::get_if<AffinePiece>(&p.kind)) take(a->slope);
        else {
            const auto& j = std::get<JoinPiece>(p.kind);
            take(j.slope_left);
            take(j.slope_right);
        }
    }
    return *m;
}

// ---------------------------------------------------------------- factors

std::optional<Rational> apply_factor_exact(const Factor& f, const Rational& x) {
    return std::visit(
        overloaded{[&](const RotationFactor& r) -> std::optional<Rational> { return x + r.angle; },
                   [&](const LiftFactor& l) -> std::optional<Rational> {
                       Rational z = x * Rational(l.cover);
                       if (!l.inverse) {
                           BigInt k = floor(z);
                           auto v = l.table->value_exact(z - Rational(k));
                           if (!v) return std::nullopt;
                           return (*v + Rational(k)) / Rational(l.cover);
                       }
                       BigInt k = floor(z - l.table->value_at_zero());
                       auto v = l.table->solve_exact(z - Rational(k));
                       if (!v) return std::nullopt;
                       return (*v + Rational(k)) / Rational(l.cover);
                   }},
        f);
}

Real apply_factor(const Factor& f, const Real& x) {
    return std::visit(overloaded{[&](const RotationFactor& r) -> Real { return x + to_real(r.angle); },
                                 [&](const LiftFactor& l) -> Real {
                                     Real Q = to_real(l.cover);
                                     Real z = x * Q;
                                     if (!l.inverse) {
                                         BigInt k = real_floor(z);
                                         Real kr = to_real(k);
                                         return (l.table->value(z - kr) + kr) / Q;
                                     }
                                     BigInt k = real_floor(z - to_real(l.table->value_at_zero()));
                                     Real kr = to_real(k);
                                     return (l.table->solve(z - kr) + kr) / Q;
                                 }},
                      f);
}

namespace {

Factor flipped(const Factor& f) {
    return std::visit(overloaded{[](const RotationFactor& r) -> Factor { return RotationFactor{-r.angle}; },
                                 [](const LiftFactor& l) -> Factor {
                                     return LiftFactor{l.table, l.cover, !l.inverse};
                                 }},
                      f);
}

Jet forward_lift_jet(const LiftFactor& l, const Jet& x) {
    Real Q = to_real(l.cover);
    Real z = x.value() * Q;
    BigInt k = real_floor(z);
    Real kr = to_real(k);
    Jet local = x * Q;
    local -= kr;
    Jet p = l.table->jet(local.value(), x.order());
    Jet r = Jet::compose(p, local);
    r += kr;
    r /= Q;
    return r;
}

}  // namespace

Jet apply_factor_jet(const Factor& f, const Jet& x) {
    return std::visit(overloaded{[&](const RotationFactor& r) -> Jet { return x + to_real(r.angle); },
                                 [&](const LiftFactor& l) -> Jet {
                                     if (!l.inverse) return forward_lift_jet(l, x);
                                     LiftFactor fwd{l.table, l.cover, false};
                                     Real x0 = apply_factor(f, x.value());
                                     Jet j = forward_lift_jet(fwd, Jet::variable(x0, x.order()));
                                     Jet inv = j.revert(x0);
                                     return Jet::compose(inv, x);
                                 }},
                      f);
}

std::optional<Rational> factor_slope_exact(const Factor& f, const Rational& x) {
    return std::visit(
        overloaded{[&](const RotationFactor&) -> std::optional<Rational> { return Rational(1); },
                   [&](const LiftFactor& l) -> std::optional<Rational> {
                       Rational z = x * Rational(l.cover);
                       if (!l.inverse) {
                           Rational local = z - Rational(floor(z));
                           return l.table->pieces()[l.table->locate(local)].slope_exact(local);
                       }
                       BigInt k = floor(z - l.table->value_at_zero());
                       auto v = l.table->solve_exact(z - Rational(k));
                       if (!v) return std::nullopt;
                       auto s = l.table->pieces()[l.table->locate(*v)].slope_exact(*v);
                       if (!s) return std::nullopt;
                       return 1 / *s;
                   }},
        f);
}

// ---------------------------------------------------------------- PiecewiseMap

PiecewiseMap PiecewiseMap::rotation(const Rational& angle) {
    PiecewiseMap m;
    m.push_back(RotationFactor{angle});
    return m;
}

PiecewiseMap PiecewiseMap::from_factors(const std::vector<Factor>& factors) {
    PiecewiseMap m;
    for (const auto& f : factors) m.push_back(f);
    return m;
}

PiecewiseMap PiecewiseMap::from_table(TablePtr table) {
    PiecewiseMap m;
    m.factors_.push_back(LiftFactor{std::move(table), 1, false});
    return m;
}

void PiecewiseMap::push_back(const Factor& f) {
    if (auto* r = std::get_if<RotationFactor>(&f)) {
        Rational a = r->angle;
        if (!factors_.empty()) {
            if (auto* last = std::get_if<RotationFactor>(&factors_.back())) {
                a += last->angle;
                factors_.pop_back();
            }
        }
        a = frac(a);
        if (a != 0) factors_.push_back(RotationFactor{a});
        return;
    }
    factors_.push_back(f);
}

PiecewiseMap compose(const PiecewiseMap& f, const PiecewiseMap& g) {
    PiecewiseMap out = f;
    for (const auto& x : g.factors_) out.push_back(x);
    return out;
}

PiecewiseMap PiecewiseMap::inverse() const {
    PiecewiseMap out;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) out.push_back(flipped(*it));
    return out;
}

std::optional<Rational> PiecewiseMap::eval_exact(const Rational& x) const {
    Rational cur = x;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
        auto v = apply_factor_exact(*it, cur);
        if (!v) return std::nullopt;
        cur = std::move(*v);
    }
    return cur;
}

Real PiecewiseMap::eval(const Real& x) const {
    Real cur = x;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) cur = apply_factor(*it, cur);
    return cur;
}

Jet PiecewiseMap::eval_jet(const Jet& x) const {
    Jet cur = x;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) cur = apply_factor_jet(*it, cur);
    return cur;
}

std::optional<Rational> PiecewiseMap::eval_circle_exact(const Rational& x) const {
    auto v = eval_exact(x);
    if (!v) return std::nullopt;
    return frac(*v);
}

Real PiecewiseMap::eval_circle(const Real& x) const { return frac(eval(x)); }

Real PiecewiseMap::derivative(const Real& x, unsigned k) const {
    return eval_jet(Jet::variable(x, k)).derivative(k);
}

std::optional<Rational> PiecewiseMap::exact_slope(const Rational& x) const {
    Rational cur = x;
    Rational slope = 1;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
        auto s = factor_slope_exact(*it, cur);
        if (!s) return std::nullopt;
        slope *= *s;
        auto v = apply_factor_exact(*it, cur);
        if (!v) return std::nullopt;
        cur = std::move(*v);
    }
    return slope;
}

BigInt PiecewiseMap::max_cover() const {
    BigInt m = 1;
    for (const auto& f : factors_)
        if (auto* l = std::get_if<LiftFactor>(&f)) m = std::max(m, l->cover);
    return m;
}

Rational PiecewiseMap::lipschitz_bound() const {
    Rational b = 1;
    for (const auto& f : factors_) {
        if (auto* l = std::get_if<LiftFactor>(&f)) b *= l->inverse ? Rational(1 / l->table->min_slope()) : l->table->max_slope();
    }
    return b;
}

std::optional<Breakpoints> PiecewiseMap::breakpoints(std::size_t budget) const {
    BigInt total = 0;
    for (const auto& f : factors_)
        if (auto* l = std::get_if<LiftFactor>(&f)) total += l->cover * l->table->pieces().size();
    if (total > budget) return std::nullopt;

    Breakpoints out;
    // Walk outward; `inner` holds the factors applied before the current one.
    for (std::size_t k = factors_.size(); k-- > 0;) {
        auto* l = std::get_if<LiftFactor>(&factors_[k]);
        if (!l) continue;
        std::size_t Q = l->cover.convert_to<std::size_t>();
        std::vector<Real> local;
        const auto& tab = *l->table;
        for (std::size_t i = 0; i < tab.pieces().size(); ++i) {
            Real b = to_real(l->inverse ? Rational(tab.start_values()[i]) : tab.pieces()[i].lo);
            for (std::size_t j = 0; j < Q; ++j) local.push_back(frac(Real((b + j) / Q)));
        }
        for (Real p : local) {
            for (std::size_t m = k + 1; m < factors_.size(); ++m) p = apply_factor(flipped(factors_[m]), p);
            out.points.push_back(frac(p));
        }
    }
    std::sort(out.points.begin(), out.points.end());
    out.points.erase(std::unique(out.points.begin(), out.points.end()), out.points.end());
    return out;
}

PiecewiseMap cyclic_lift(const PiecewiseMap& hhat, const BigInt& Q, bool fix_zero) {
    if (Q < 1) throw std::invalid_argument("cyclic_lift: Q must be positive");
    if (hhat.is_identity()) return hhat;
    if (hhat.factors().size() != 1 || !std::holds_alternative<LiftFactor>(hhat.factors()[0]))
        throw std::invalid_argument("cyclic_lift: expects a single-table map");
    auto l = std::get<LiftFactor>(hhat.factors()[0]);
    if (fix_zero && l.table->value_at_zero() != 0)
        throw NoFixedPointLift("cyclic_lift: base map does not fix 0");
    l.cover *= Q;
    return PiecewiseMap::from_factors({l});
}

}  // namespace circlefac
