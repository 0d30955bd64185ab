#include "circlefac/trace_io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace circlefac {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw TraceIOError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw TraceIOError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw TraceIOError("cannot move trace into place at " + path);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceIOError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool LoadedTrace::intact() const {
    for (const auto& c : integrity)
        if (!c.passed) return false;
    return true;
}

namespace {

constexpr int kRealDigits = 60;

// ---------------------------------------------------------------- writing

std::string str(const Rational& q) { return to_string(q); }
std::string str(const BigInt& z) { return z.str(); }
std::string str(const Real& x) { return to_string(x, kRealDigits); }

json interval(const RationalInterval& I) { return json::array({str(I.lo), str(I.hi)}); }

json reals(const std::vector<Real>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(str(x));
    return a;
}

json piece_json(const Piece& p) {
    json j{{"lo", str(p.lo)}, {"hi", str(p.hi)}};
    if (const auto* a = std::get_if<AffinePiece>(&p.kind)) {
        j["kind"] = "affine";
        j["slope"] = str(a->slope);
        j["intercept"] = str(a->intercept);
    } else {
        const auto& k = std::get<JoinPiece>(p.kind);
        j["kind"] = "join";
        j["start"] = str(k.start);
        j["width"] = str(k.width);
        j["start_value"] = str(k.start_value);
        j["slope_left"] = str(k.slope_left);
        j["slope_right"] = str(k.slope_right);
    }
    return j;
}

json generator_json(const StageGenerator& g) {
    json pieces = json::array();
    for (const auto& p : g.table->pieces()) pieces.push_back(piece_json(p));
    return {{"type", to_string(g.type)},
            {"index", g.index},
            {"slopes",
             {{"symbol", g.slopes.symbol},
              {"base", str(g.slopes.base)},
              {"exp_plus", g.slopes.exp_plus},
              {"exp_minus", g.slopes.exp_minus},
              {"slope_plus", str(g.slopes.slope_plus)},
              {"slope_minus", str(g.slopes.slope_minus)}}},
            {"a", str(g.a)},
            {"delta", str(g.delta)},
            {"delta_prime", str(g.delta_prime)},
            {"J_minus", interval(g.J_minus)},
            {"J_plus", interval(g.J_plus)},
            {"I_minus", interval(g.I_minus)},
            {"I_plus", interval(g.I_plus)},
            {"K_prime", str(g.K_prime)},
            {"label", g.table->label()},
            {"pieces", pieces}};
}

json config_json(const ConstructionConfig& c) {
    json deltas = json::array();
    for (const auto& d : c.delta_overrides) deltas.push_back(str(d));
    return {{"type", to_string(c.family.type)},
            {"lambda", str(c.family.lambda)},
            {"lambda1", str(c.family.lambda1)},
            {"lambda2", str(c.family.lambda2)},
            {"offset", c.family.offset},
            {"r", c.r},
            {"max_stages", c.max_stages},
            {"oracle", {{"kind", c.oracle.kind}, {"base", str(c.oracle.base)}, {"value", str(c.oracle.value)}}},
            {"limits",
             {{"denominator_digits", c.limits.max_denominator_digits},
              {"denominator_cap", c.limits.denominator_cap ? json(str(*c.limits.denominator_cap)) : json()},
              {"max_bits", c.limits.max_bits}}},
            {"target_product", str(c.target_product)},
            {"delta_overrides", deltas},
            {"precision_bits", c.precision_bits},
            {"norms",
             {{"initial_grid", c.norms.initial_grid},
              {"max_grid", c.norms.max_grid},
              {"rel_tol", c.norms.rel_tol},
              {"breakpoint_budget", c.norms.breakpoint_budget}}},
            {"commutation_points", c.commutation_points},
            {"boundary_enumeration_limit", c.boundary_enumeration_limit},
            {"boundary_samples", c.boundary_samples},
            {"orbit_cap", c.orbit_cap},
            {"birkhoff_iterates", c.birkhoff_iterates},
            {"window_samples", c.window_samples},
            {"seed", c.seed}};
}

json stage_json(const StageRecord& s) {
    json checks = json::array();
    for (const auto& c : s.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}, {"detail", c.detail}});
    const auto& c = s.constraints;
    json constraints{{"n", c.n},
                     {"r", c.r},
                     {"eps", str(c.eps)},
                     {"N", c.N},
                     {"q_floor", c.q_floor ? json(str(*c.q_floor)) : json()},
                     {"delta", c.delta ? json(str(*c.delta)) : json()},
                     {"K", str(c.K)},
                     {"prev_alpha", c.prev_alpha ? json(str(*c.prev_alpha)) : json()},
                     {"lip_prev", str(c.lip_prev)},
                     {"first_stage_gap", c.first_stage_gap}};
    const auto& L = s.ledger;
    json ledger{{"n", L.n},
                {"r", L.r},
                {"C", str(L.C)},
                {"N", L.N},
                {"distance_poly", reals(L.distance_poly)},
                {"coarse_C_norm", str(L.coarse_C_norm)},
                {"coarse_N_norm", L.coarse_N_norm},
                {"coarse_C_dist", str(L.coarse_C_dist)},
                {"coarse_N_dist", L.coarse_N_dist},
                {"provenance", L.provenance}};
    return {{"n", s.n},
            {"schedule",
             {{"delta", str(s.schedule.delta)},
              {"denominator", str(s.schedule.denominator)},
              {"delta_prime", str(s.schedule.delta_prime)}}},
            {"generator", generator_json(s.generator)},
            {"sups", {{"forward", reals(s.sups.forward)}, {"inverse", reals(s.sups.inverse)}}},
            {"K", str(s.K)},
            {"K_prime_prev", str(s.K_prime_prev)},
            {"Q", str(s.Q)},
            {"ledger", ledger},
            {"constraints", constraints},
            {"selection",
             {{"alpha", str(s.selection.alpha)},
              {"eps", str(s.selection.eps)},
              {"N", s.selection.N},
              {"gap_bound", str(s.selection.gap_bound)}}},
            {"lip_prev", str(s.lip_prev)},
            {"built", s.built},
            {"checks", checks}};
}

const char* failure_name(FailureKind k) {
    switch (k) {
        case FailureKind::None: return "none";
        case FailureKind::Budget: return "budget";
        case FailureKind::Construction: return "construction";
        case FailureKind::Verification: return "verification";
    }
    return "none";
}

// ---------------------------------------------------------------- reading

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw TraceFormatError(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string text(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw TraceFormatError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

Rational rat(const json& j, const char* key) {
    try {
        return parse_rational(std::string_view(text(j, key)));
    } catch (const std::invalid_argument& e) {
        throw TraceFormatError(std::string("field '") + key + "': " + e.what());
    }
}

BigInt integer(const json& j, const char* key) {
    Rational q = rat(j, key);
    if (denominator(q) != 1) throw TraceFormatError(std::string("field '") + key + "' must be an integer");
    return numerator(q);
}

Real real(const std::string& s) {
    try {
        return Real(s);
    } catch (const std::exception&) {
        throw TraceFormatError("not a decimal: '" + s + "'");
    }
}

template <class T>
T num(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number()) throw TraceFormatError(std::string("field '") + key + "' must be a number");
    return v.get<T>();
}

std::vector<Real> real_list(const json& j, const char* key) {
    std::vector<Real> out;
    for (const auto& v : field(j, key)) {
        if (!v.is_string()) throw TraceFormatError(std::string("field '") + key + "' must hold strings");
        out.push_back(real(v.get<std::string>()));
    }
    return out;
}

std::optional<Rational> opt_rat(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return rat(j, key);
}

RationalInterval interval_from(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string())
        throw TraceFormatError(std::string("field '") + key + "' must be a [lo, hi] pair");
    try {
        return {parse_rational(std::string_view(v[0].get<std::string>())),
                parse_rational(std::string_view(v[1].get<std::string>()))};
    } catch (const std::invalid_argument& e) {
        throw TraceFormatError(std::string("field '") + key + "': " + e.what());
    }
}

Piece piece_from(const json& j) {
    Piece p;
    p.lo = rat(j, "lo");
    p.hi = rat(j, "hi");
    std::string kind = text(j, "kind");
    if (kind == "affine") {
        p.kind = AffinePiece{rat(j, "slope"), rat(j, "intercept")};
    } else if (kind == "join") {
        p.kind = JoinPiece{rat(j, "start"), rat(j, "width"), rat(j, "start_value"), rat(j, "slope_left"),
                           rat(j, "slope_right")};
    } else {
        throw TraceFormatError("unknown piece kind '" + kind + "'");
    }
    return p;
}

StageGenerator generator_from(const json& j) {
    StageGenerator g;
    try {
        g.type = parse_stage_type(text(j, "type"));
    } catch (const std::invalid_argument& e) {
        throw TraceFormatError(e.what());
    }
    g.index = num<unsigned>(j, "index");
    const auto& s = field(j, "slopes");
    g.slopes.symbol = text(s, "symbol");
    g.slopes.base = rat(s, "base");
    g.slopes.exp_plus = num<long>(s, "exp_plus");
    g.slopes.exp_minus = num<long>(s, "exp_minus");
    g.slopes.slope_plus = rat(s, "slope_plus");
    g.slopes.slope_minus = rat(s, "slope_minus");
    g.a = rat(j, "a");
    g.delta = rat(j, "delta");
    g.delta_prime = rat(j, "delta_prime");
    g.J_minus = interval_from(j, "J_minus");
    g.J_plus = interval_from(j, "J_plus");
    g.I_minus = interval_from(j, "I_minus");
    g.I_plus = interval_from(j, "I_plus");
    g.K_prime = integer(j, "K_prime");
    std::vector<Piece> pieces;
    for (const auto& p : field(j, "pieces")) pieces.push_back(piece_from(p));
    g.table = std::make_shared<const PieceTable>(std::move(pieces), text(j, "label"));
    return g;
}

ConstructionConfig config_from(const json& j) {
    ConstructionConfig c;
    try {
        c.family.type = parse_stage_type(text(j, "type"));
    } catch (const std::invalid_argument& e) {
        throw TraceFormatError(e.what());
    }
    c.family.lambda = rat(j, "lambda");
    c.family.lambda1 = rat(j, "lambda1");
    c.family.lambda2 = rat(j, "lambda2");
    c.family.offset = num<unsigned>(j, "offset");
    c.r = num<unsigned>(j, "r");
    c.max_stages = num<unsigned>(j, "max_stages");
    const auto& o = field(j, "oracle");
    c.oracle.kind = text(o, "kind");
    c.oracle.base = integer(o, "base");
    c.oracle.value = rat(o, "value");
    const auto& l = field(j, "limits");
    c.limits.max_denominator_digits = num<std::size_t>(l, "denominator_digits");
    if (!field(l, "denominator_cap").is_null()) c.limits.denominator_cap = integer(l, "denominator_cap");
    c.limits.max_bits = num<unsigned long>(l, "max_bits");
    c.target_product = rat(j, "target_product");
    for (const auto& d : field(j, "delta_overrides")) c.delta_overrides.push_back(parse_rational(std::string_view(d.get<std::string>())));
    c.precision_bits = num<unsigned>(j, "precision_bits");
    const auto& n = field(j, "norms");
    c.norms.initial_grid = num<std::size_t>(n, "initial_grid");
    c.norms.max_grid = num<std::size_t>(n, "max_grid");
    c.norms.rel_tol = num<double>(n, "rel_tol");
    c.norms.breakpoint_budget = num<std::size_t>(n, "breakpoint_budget");
    c.commutation_points = num<std::size_t>(j, "commutation_points");
    c.boundary_enumeration_limit = num<std::size_t>(j, "boundary_enumeration_limit");
    c.boundary_samples = num<std::size_t>(j, "boundary_samples");
    c.orbit_cap = num<std::size_t>(j, "orbit_cap");
    c.birkhoff_iterates = num<std::size_t>(j, "birkhoff_iterates");
    c.window_samples = num<std::size_t>(j, "window_samples");
    c.seed = num<std::uint64_t>(j, "seed");
    return c;
}

StageRecord stage_from(const json& j) {
    StageRecord s;
    s.n = num<unsigned>(j, "n");
    const auto& sc = field(j, "schedule");
    s.schedule = {rat(sc, "delta"), integer(sc, "denominator"), rat(sc, "delta_prime")};
    s.generator = generator_from(field(j, "generator"));
    const auto& su = field(j, "sups");
    s.sups.forward = real_list(su, "forward");
    s.sups.inverse = real_list(su, "inverse");
    s.K = integer(j, "K");
    s.K_prime_prev = integer(j, "K_prime_prev");
    s.Q = integer(j, "Q");
    const auto& L = field(j, "ledger");
    s.ledger.n = num<unsigned>(L, "n");
    s.ledger.r = num<unsigned>(L, "r");
    s.ledger.C = real(text(L, "C"));
    s.ledger.N = num<unsigned>(L, "N");
    s.ledger.distance_poly = real_list(L, "distance_poly");
    s.ledger.coarse_C_norm = real(text(L, "coarse_C_norm"));
    s.ledger.coarse_N_norm = num<unsigned>(L, "coarse_N_norm");
    s.ledger.coarse_C_dist = real(text(L, "coarse_C_dist"));
    s.ledger.coarse_N_dist = num<unsigned>(L, "coarse_N_dist");
    s.ledger.provenance = field(L, "provenance").get<std::vector<std::string>>();
    const auto& c = field(j, "constraints");
    s.constraints.n = num<unsigned>(c, "n");
    s.constraints.r = num<unsigned>(c, "r");
    s.constraints.eps = rat(c, "eps");
    s.constraints.N = num<unsigned long>(c, "N");
    if (auto v = opt_rat(c, "q_floor")) s.constraints.q_floor = numerator(*v);
    s.constraints.delta = opt_rat(c, "delta");
    s.constraints.K = integer(c, "K");
    s.constraints.prev_alpha = opt_rat(c, "prev_alpha");
    s.constraints.lip_prev = rat(c, "lip_prev");
    s.constraints.first_stage_gap = field(c, "first_stage_gap").get<bool>();
    const auto& sel = field(j, "selection");
    s.selection.alpha = rat(sel, "alpha");
    s.selection.eps = rat(sel, "eps");
    s.selection.N = num<unsigned long>(sel, "N");
    s.selection.gap_bound = rat(sel, "gap_bound");
    s.lip_prev = rat(j, "lip_prev");
    s.built = field(j, "built").get<bool>();
    for (const auto& ch : field(j, "checks"))
        s.checks.push_back({text(ch, "name"), field(ch, "passed").get<bool>(), text(ch, "margin"), text(ch, "detail")});
    return s;
}

// First difference between the stored and the rebuilt generator, or empty.
std::string compare_generators(const StageGenerator& stored, const StageGenerator& rebuilt) {
    auto neq = [](const RationalInterval& a, const RationalInterval& b) { return a.lo != b.lo || a.hi != b.hi; };
    if (stored.a != rebuilt.a) return "breakpoint a differs";
    if (stored.delta != rebuilt.delta) return "delta differs";
    if (stored.delta_prime != rebuilt.delta_prime) return "delta' differs";
    if (neq(stored.J_minus, rebuilt.J_minus) || neq(stored.J_plus, rebuilt.J_plus)) return "affine arcs differ";
    if (neq(stored.I_minus, rebuilt.I_minus) || neq(stored.I_plus, rebuilt.I_plus)) return "cores differ";
    if (stored.K_prime != rebuilt.K_prime) return "K' differs";
    if (stored.slopes.slope_plus != rebuilt.slopes.slope_plus || stored.slopes.slope_minus != rebuilt.slopes.slope_minus)
        return "slopes differ";
    const auto& P = stored.table->pieces();
    const auto& R = rebuilt.table->pieces();
    if (P.size() != R.size()) return "piece count differs";
    for (std::size_t i = 0; i < P.size(); ++i) {
        std::string where = "piece " + std::to_string(i);
        if (P[i].lo != R[i].lo) return where + ": breakpoint " + to_string(P[i].lo) + " != " + to_string(R[i].lo);
        if (P[i].hi != R[i].hi) return where + ": breakpoint " + to_string(P[i].hi) + " != " + to_string(R[i].hi);
        if (P[i].affine() != R[i].affine()) return where + ": kind differs";
        if (piece_json(P[i]) != piece_json(R[i])) return where + ": coefficients differ";
    }
    return {};
}

}  // namespace

std::string serialize_trace(const ConstructionTrace& trace, const std::string& analysis) {
    json doc;
    doc["format"] = "circlefac-trace";
    doc["version"] = kTraceVersion;
    doc["config"] = config_json(trace.config);
    json stages = json::array();
    for (const auto& s : trace.stages) stages.push_back(stage_json(s));
    doc["stages"] = stages;
    doc["lookahead"] = trace.lookahead ? stage_json(*trace.lookahead) : json();
    doc["failure"] = {{"kind", failure_name(trace.failure)},
                      {"stage", trace.failed_stage},
                      {"message", trace.failure_message}};
    doc["analysis"] = analysis.empty() ? json::object() : json::parse(analysis);
    doc["checksum"] = sha256_hex(doc.dump());
    return doc.dump(1) + "\n";
}

LoadedTrace parse_trace(const std::string& text_in) {
    json doc;
    try {
        doc = json::parse(text_in);
    } catch (const json::parse_error& e) {
        throw TraceFormatError(std::string("not a JSON trace: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "circlefac-trace")
        throw TraceFormatError("not a circlefac trace");
    if (!doc.contains("version") || doc["version"] != kTraceVersion)
        throw TraceFormatError("unsupported trace version (expected " + std::to_string(kTraceVersion) + ")");

    LoadedTrace out;
    std::string stored = text(doc, "checksum");
    json body = doc;
    body.erase("checksum");
    std::string computed = sha256_hex(body.dump());
    out.integrity.push_back({"checksum", stored == computed, computed,
                             stored == computed ? "" : "content does not match the stored checksum"});

    auto& tr = out.trace;
    // Enough precision to read the stored decimals back.
    PrecisionScope ps(kRealDigits * 4 + 64);
    try {
        tr.config = config_from(field(doc, "config"));
        for (const auto& s : field(doc, "stages")) tr.stages.push_back(stage_from(s));
        if (!field(doc, "lookahead").is_null()) tr.lookahead = stage_from(doc["lookahead"]);
        const auto& f = field(doc, "failure");
        std::string kind = text(f, "kind");
        tr.failure = kind == "budget"         ? FailureKind::Budget
                     : kind == "construction" ? FailureKind::Construction
                     : kind == "verification" ? FailureKind::Verification
                                              : FailureKind::None;
        tr.failed_stage = num<unsigned>(f, "stage");
        tr.failure_message = text(f, "message");
    } catch (const json::exception& e) {
        throw TraceFormatError(std::string("malformed trace: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw TraceFormatError(std::string("malformed trace: ") + e.what());
    }
    out.analysis = doc.contains("analysis") ? doc["analysis"].dump() : "{}";

    auto rebuild = [&](const StageRecord& s) {
        std::string name = "generator_table.stage_" + std::to_string(s.n);
        try {
            auto g = tr.config.family.make(s.n, s.schedule.delta, s.schedule.denominator);
            auto diff = compare_generators(s.generator, g);
            out.integrity.push_back({name, diff.empty(), to_string(g.delta_prime), diff});
        } catch (const std::exception& e) {
            out.integrity.push_back({name, false, "-", std::string("rebuild failed: ") + e.what()});
        }
    };
    for (const auto& s : tr.stages) rebuild(s);
    if (tr.lookahead) rebuild(*tr.lookahead);
    rebuild_maps(tr);
    return out;
}

LoadedTrace read_trace(const std::string& path) { return parse_trace(read_file(path)); }

}  // namespace circlefac
