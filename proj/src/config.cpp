#include "circlefac/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace circlefac {

namespace pt = boost::property_tree;

namespace {

Rational rational_value(const std::string& key, const std::string& text) {
    try {
        return parse_rational(std::string_view(text));
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a rational: '" + text + "'");
    }
}

const std::set<std::string> kKnown = {
    "run.type", "run.lambda", "run.lambda1", "run.lambda2", "run.r", "run.max_stages", "run.seed", "run.offset",
    "oracle.kind", "oracle.base", "oracle.value",
    "precision.bits", "precision.window_samples", "precision.commutation_points", "precision.boundary_samples",
    "precision.birkhoff_iterates", "precision.norm_grid", "precision.norm_tolerance",
    "budgets.denominator_digits", "budgets.denominator_cap", "budgets.component_cap", "budgets.orbit_cap",
    "budgets.boundary_enumeration_limit",
    "schedule.target_product", "schedule.deltas"};

template <class T>
T get_number(const pt::ptree& tree, const std::string& key, T fallback) {
    auto v = tree.get_optional<std::string>(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        long long x = std::stoll(*v, &used);
        if (used != v->size() || x < 0) throw std::invalid_argument(key);
        return static_cast<T>(x);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + *v + "'");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("key '" + section + "' outside a section");
        for (const auto& [key, _] : body)
            if (!kKnown.count(section + "." + key)) throw ConfigError("unknown key " + section + "." + key);
    }

    RunConfig cfg;
    auto& c = cfg.construction;
    try {
        c.family.type = parse_stage_type(tree.get<std::string>("run.type", "III_lambda"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("run.type: ") + e.what());
    }
    if (auto v = tree.get_optional<std::string>("run.lambda")) c.family.lambda = rational_value("run.lambda", *v);
    if (auto v = tree.get_optional<std::string>("run.lambda1")) c.family.lambda1 = rational_value("run.lambda1", *v);
    if (auto v = tree.get_optional<std::string>("run.lambda2")) c.family.lambda2 = rational_value("run.lambda2", *v);
    c.family.offset = get_number<unsigned>(tree, "run.offset", c.family.offset);
    c.r = get_number<unsigned>(tree, "run.r", c.r);
    c.max_stages = get_number<unsigned>(tree, "run.max_stages", c.max_stages);
    c.seed = get_number<std::uint64_t>(tree, "run.seed", c.seed);

    c.oracle.kind = tree.get<std::string>("oracle.kind", c.oracle.kind);
    if (auto v = tree.get_optional<std::string>("oracle.base")) {
        Rational b = rational_value("oracle.base", *v);
        if (denominator(b) != 1) throw ConfigError("oracle.base must be an integer");
        c.oracle.base = numerator(b);
    }
    if (auto v = tree.get_optional<std::string>("oracle.value")) c.oracle.value = rational_value("oracle.value", *v);

    c.precision_bits = get_number<unsigned>(tree, "precision.bits", c.precision_bits);
    c.window_samples = get_number<std::size_t>(tree, "precision.window_samples", c.window_samples);
    c.commutation_points = get_number<std::size_t>(tree, "precision.commutation_points", c.commutation_points);
    c.boundary_samples = get_number<std::size_t>(tree, "precision.boundary_samples", c.boundary_samples);
    c.birkhoff_iterates = get_number<std::size_t>(tree, "precision.birkhoff_iterates", c.birkhoff_iterates);
    c.norms.initial_grid = get_number<std::size_t>(tree, "precision.norm_grid", c.norms.initial_grid);
    if (auto v = tree.get_optional<std::string>("precision.norm_tolerance")) {
        try {
            c.norms.rel_tol = std::stod(*v);
        } catch (const std::exception&) {
            throw ConfigError("precision.norm_tolerance: not a number");
        }
    }

    c.limits.max_denominator_digits =
        get_number<std::size_t>(tree, "budgets.denominator_digits", c.limits.max_denominator_digits);
    if (auto v = tree.get_optional<std::string>("budgets.denominator_cap")) {
        Rational cap = rational_value("budgets.denominator_cap", *v);
        if (denominator(cap) != 1 || cap < 1) throw ConfigError("budgets.denominator_cap must be a positive integer");
        c.limits.denominator_cap = numerator(cap);
    }
    cfg.component_cap = get_number<std::size_t>(tree, "budgets.component_cap", cfg.component_cap);
    c.orbit_cap = get_number<std::size_t>(tree, "budgets.orbit_cap", c.orbit_cap);
    c.boundary_enumeration_limit =
        get_number<std::size_t>(tree, "budgets.boundary_enumeration_limit", c.boundary_enumeration_limit);

    if (auto v = tree.get_optional<std::string>("schedule.target_product")) c.target_product = rational_value("schedule.target_product", *v);
    if (auto v = tree.get_optional<std::string>("schedule.deltas")) {
        std::istringstream ds(*v);
        std::string item;
        while (std::getline(ds, item, ','))
            if (!item.empty()) c.delta_overrides.push_back(rational_value("schedule.deltas", item));
    }
    validate(cfg);
    return cfg;
}

void validate(const RunConfig& cfg) {
    const auto& c = cfg.construction;
    try {
        c.family.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.r < 1) throw ConfigError("run.r must be a positive integer");
    if (c.max_stages < 1) throw ConfigError("run.max_stages must be a positive integer");
    if (c.oracle.kind != "factorial_series" && c.oracle.kind != "golden_ratio" && c.oracle.kind != "rational")
        throw ConfigError("oracle.kind must be factorial_series, golden_ratio or rational");
    if (c.oracle.kind == "factorial_series" && c.oracle.base < 2) throw ConfigError("oracle.base must be >= 2");
    if (c.target_product < 0 || c.target_product >= 1) throw ConfigError("schedule.target_product must lie in [0, 1)");
    for (const auto& d : c.delta_overrides)
        if (d <= 0 || d >= Rational(1, 8)) throw ConfigError("schedule.deltas entries must lie in (0, 1/8)");
    if (c.precision_bits < 64) throw ConfigError("precision.bits must be at least 64");
    if (c.window_samples < 1 || c.commutation_points < 1 || c.birkhoff_iterates < 1)
        throw ConfigError("sample counts must be positive");
    if (cfg.component_cap < 1 || c.orbit_cap < 1) throw ConfigError("budgets must be positive");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config(ss.str());
    apply_environment(cfg);
    return cfg;
}

void apply_environment(RunConfig& cfg) {
    const char* env = std::getenv("CIRCLEFAC_PRECISION_BITS");
    if (!env || !*env) return;
    try {
        std::size_t used = 0;
        long v = std::stol(env, &used);
        if (used != std::strlen(env) || v < 64) throw std::invalid_argument("bits");
        cfg.construction.precision_bits = static_cast<unsigned>(v);
    } catch (const std::exception&) {
        throw ConfigError(std::string("CIRCLEFAC_PRECISION_BITS must be an integer >= 64, got '") + env + "'");
    }
}

}  // namespace circlefac
