// circlefac: construct, verify and export fast-approximation traces.
//
// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 construction
// failure, 4 budget exhausted, 5 trace format error, 6 IO error.

#include "circlefac/config.hpp"
#include "circlefac/construction.hpp"
#include "circlefac/ergodic.hpp"
#include "circlefac/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace circlefac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kVerify = 1, kConfig = 2, kConstruct = 3, kBudget = 4, kFormat = 5, kIO = 6 };

Rational stage_ratio(const ConstructionTrace& tr, unsigned n) {
    const auto& s = tr.stage(n).generator.slopes;
    return s.slope_plus / s.slope_minus;
}

json analysis_of(const ConstructionTrace& tr) {
    json a = json::object();
    if (!tr.passed() || tr.stages.empty()) return a;
    PrecisionScope ps(tr.working_bits());
    json depths = json::array();
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto m = xi_measure(tr, n);
        auto scan = component_pair_scan(tr, n);
        auto rp = find_return_pair(tr, n, stage_ratio(tr, n));
        depths.push_back({{"n", n},
                          {"product", to_string(m.exact)},
                          {"direct", to_string(m.direct)},
                          {"match", m.match},
                          {"pair_scan", scan.summary},
                          {"pair_values", scan.observed},
                          {"return_pair",
                           {{"found", rp.found},
                            {"x", to_string(rp.x)},
                            {"i", rp.i.str()},
                            {"value", rp.value.describe()}}}});
    }
    a["depths"] = depths;
    if (tr.config.family.type == StageType::II_infty) {
        auto s = singularity_diagnostic(tr, static_cast<unsigned>(tr.stages.size()));
        a["singularity"] = {{"verdict", s.verdict}, {"summary", s.summary}};
    }
    return a;
}

// ---------------------------------------------------------------- construct

int cmd_construct(const std::string& config_path, const std::string& out_path) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }
    ConstructionTrace tr;
    try {
        tr = run(cfg.construction);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    }
    std::string analysis;
    try {
        analysis = analysis_of(tr).dump();
    } catch (const std::exception& e) {
        std::cerr << "analysis failed: " << e.what() << "\n";
        return kConstruct;
    }
    try {
        write_file_atomic(out_path, serialize_trace(tr, analysis));
    } catch (const TraceIOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIO;
    }
    for (const auto& st : tr.stages) {
        std::size_t ok = 0;
        for (const auto& c : st.checks) ok += c.passed;
        std::cout << "stage " << st.n << ": q = " << (st.q().str().size() > 40 ? "10^" + std::to_string(st.q().str().size() - 1) : st.q().str())
                  << ", " << ok << "/" << st.checks.size() << " checks passed\n";
    }
    switch (tr.failure) {
        case FailureKind::None: std::cout << "trace written to " << out_path << "\n"; return kOk;
        case FailureKind::Budget: std::cerr << "budget exhausted: " << tr.failure_message << "\n"; return kBudget;
        default: std::cerr << "construction failed: " << tr.failure_message << "\n"; return kConstruct;
    }
}

// ---------------------------------------------------------------- verify

struct Report {
    std::size_t failures = 0;
    void line(bool ok, const std::string& name, const std::string& detail) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << (detail.empty() ? "" : "  " + detail) << "\n";
        if (!ok) ++failures;
    }
};

void suite_stages(const ConstructionTrace& tr, Report& rep) {
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto checks = verify_stage(tr, n);
        const auto& stored = tr.stage(n).checks;
        for (std::size_t k = 0; k < checks.size(); ++k) {
            const auto& c = checks[k];
            rep.line(c.passed, "stage" + std::to_string(n) + "." + c.name, c.detail.empty() ? c.margin : c.detail);
            if (k < stored.size() && (stored[k].name != c.name || stored[k].passed != c.passed))
                rep.line(false, "stage" + std::to_string(n) + ".stored_verdict", "stored verdict for " + c.name +
                                                                                      " differs from the re-check");
        }
        if (checks.size() != stored.size())
            rep.line(false, "stage" + std::to_string(n) + ".stored_verdict", "number of stored checks differs");
    }
}

void suite_measure(const ConstructionTrace& tr, Report& rep) {
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto m = xi_measure(tr, n);
        rep.line(m.match && m.equal_measure, "measure.depth" + std::to_string(n),
                 "m(Xi_n) = " + to_string(m.exact) + (m.match ? " exactly" : " vs direct " + to_string(m.direct)));
        bool above = m.partial_products.back() > tr.config.target_product;
        rep.line(above, "measure.product" + std::to_string(n), "above " + to_string(tr.config.target_product));
    }
}

void suite_ratio(const ConstructionTrace& tr, Report& rep) {
    const bool plus = tr.config.family.type == StageType::II_infty;
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto scan = component_pair_scan(tr, n);
        rep.line(scan.violations == 0 && scan.realised == scan.pairs, "ratio.pairs" + std::to_string(n), scan.summary);
        auto mem = ratio_membership(tr, n, component_midpoints(tr, n, 4, plus), 500);
        rep.line(mem.violations == 0 && mem.returns > 0, "ratio.scan" + std::to_string(n), mem.summary);
    }
}

void suite_returns(const ConstructionTrace& tr, Report& rep) {
    if (tr.config.family.type == StageType::II_infty) {
        rep.line(true, "returns", "II_inf: plus-returns are covered by the ratio suite");
        return;
    }
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto rp = find_return_pair(tr, n, stage_ratio(tr, n));
        rep.line(rp.found, "returns.depth" + std::to_string(n),
                 rp.found ? "i = " + std::string(rp.i.str().size() > 30 ? "(" + std::to_string(rp.i.str().size()) +
                                                                              " digits)"
                                                                        : rp.i.str()) +
                                ", derivative " + rp.value.describe()
                          : rp.diagnostic);
    }
}

void suite_singularity(const ConstructionTrace& tr, Report& rep) {
    if (tr.config.family.type != StageType::II_infty) {
        rep.line(true, "singularity", "not applicable to " + to_string(tr.config.family.type));
        return;
    }
    auto s = singularity_diagnostic(tr, static_cast<unsigned>(tr.stages.size()));
    rep.line(s.verdict, "singularity", s.summary);
}

int cmd_verify(const std::string& trace_path, const std::string& suite) {
    static const std::set<std::string> suites{"all", "integrity", "stages", "measure", "ratio", "returns",
                                              "singularity"};
    if (!suites.count(suite)) {
        std::cerr << "unknown suite '" << suite << "'\n";
        return kConfig;
    }
    LoadedTrace lt;
    try {
        lt = read_trace(trace_path);
    } catch (const TraceIOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIO;
    } catch (const TraceFormatError& e) {
        std::cerr << "trace format error: " << e.what() << "\n";
        return kFormat;
    }
    Report rep;
    for (const auto& c : lt.integrity) rep.line(c.passed, "integrity." + c.name, c.detail);
    const auto& tr = lt.trace;
    if (!tr.passed()) rep.line(false, "construction", tr.failure_message);
    if (!lt.intact()) {
        std::cout << "trace integrity failed; the first failing exact check is listed above\n";
        return kVerify;
    }
    try {
        auto want = [&](const char* s) { return suite == "all" || suite == s; };
        if (want("stages")) suite_stages(tr, rep);
        if (tr.passed() && !tr.stages.empty()) {
            if (want("measure")) suite_measure(tr, rep);
            if (want("ratio")) suite_ratio(tr, rep);
            if (want("returns")) suite_returns(tr, rep);
            if (want("singularity")) suite_singularity(tr, rep);
        }
    } catch (const std::exception& e) {
        rep.line(false, "verify", e.what());
    }
    std::cout << (rep.failures ? std::to_string(rep.failures) + " failing checks\n" : "all checks passed\n");
    return rep.failures ? kVerify : kOk;
}

// ---------------------------------------------------------------- export

void write_text(const fs::path& p, const std::string& content) { write_file_atomic(p.string(), content); }

std::string sample_graph(const PiecewiseMap& f, const Real& lo, const Real& hi, std::size_t m) {
    std::ostringstream os;
    os << "x,y\n";
    for (std::size_t k = 0; k <= m; ++k) {
        Real x = lo + (hi - lo) * Real(k) / Real(m);
        os << to_string(x, 17) << "," << to_string(f.eval(x), 17) << "\n";
    }
    return os.str();
}

void export_graphs(const ConstructionTrace& tr, const fs::path& dir) {
    PrecisionScope ps(tr.working_bits());
    const std::size_t m = 2000;
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        const auto& st = tr.stage(n);
        std::string k = std::to_string(n);
        write_text(dir / ("hhat_" + k + ".csv"), sample_graph(st.generator.map(), 0, 1, m));
        Real cell = Real(1) / to_real(st.Q);
        write_text(dir / ("h_" + k + "_cell.csv"), sample_graph(st.h, 0, cell, m));
        write_text(dir / ("H_" + k + ".csv"), sample_graph(st.H, 0, 1, m));
        write_text(dir / ("f_" + k + ".csv"), sample_graph(tr.f(n), 0, 1, m));
    }
}

void export_measures(const ConstructionTrace& tr, const fs::path& dir) {
    std::ostringstream os;
    os << "depth,delta_prime,product,product_decimal,direct,match\n";
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto m = xi_measure(tr, n);
        os << n << "," << to_string(tr.stage(n).generator.delta_prime) << "," << to_string(m.exact) << ","
           << to_string(to_real(m.exact), 17) << "," << to_string(m.direct) << "," << (m.match ? "true" : "false")
           << "\n";
    }
    write_text(dir / "measures.csv", os.str());
}

void export_returns(const ConstructionTrace& tr, const fs::path& dir) {
    PrecisionScope ps(tr.working_bits());
    std::ostringstream os;
    os << "depth,kind,x,i,sides_x,sides_y,value,violation\n";
    auto sides = [](const std::vector<int>& s) {
        std::string out;
        for (int v : s) out += v > 0 ? '+' : v < 0 ? '-' : '0';
        return out;
    };
    for (unsigned n = 1; n <= tr.stages.size(); ++n) {
        auto scan = component_pair_scan(tr, n);
        for (const auto& s : scan.samples)
            os << n << ",pair," << to_string(s.x) << "," << s.i.str() << "," << sides(s.sides_x) << ","
               << sides(s.sides_y) << ",\"" << s.value.describe() << "\"," << (s.violation ? "true" : "false") << "\n";
        if (tr.config.family.type != StageType::II_infty) {
            auto rp = find_return_pair(tr, n, stage_ratio(tr, n));
            if (rp.found)
                os << n << ",target," << to_string(rp.x) << "," << rp.i.str() << ",,,\"" << rp.value.describe()
                   << "\",false\n";
        }
    }
    write_text(dir / "returns.csv", os.str());
}

int cmd_export(const std::string& trace_path, const std::string& what, const std::string& out_dir) {
    std::set<std::string> kinds;
    std::istringstream ws(what);
    std::string item;
    while (std::getline(ws, item, ','))
        if (!item.empty()) kinds.insert(item);
    for (const auto& k : kinds)
        if (k != "graphs" && k != "measures" && k != "returns") {
            std::cerr << "unknown export kind '" << k << "' (graphs, measures, returns)\n";
            return kConfig;
        }
    if (kinds.empty()) return kOk;
    LoadedTrace lt;
    try {
        lt = read_trace(trace_path);
    } catch (const TraceIOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIO;
    } catch (const TraceFormatError& e) {
        std::cerr << "trace format error: " << e.what() << "\n";
        return kFormat;
    }
    if (!lt.intact()) {
        std::cerr << "trace integrity failed; run verify for details\n";
        return kFormat;
    }
    try {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw TraceIOError("cannot create " + out_dir);
        if (kinds.count("graphs")) export_graphs(lt.trace, out_dir);
        if (kinds.count("measures")) export_measures(lt.trace, out_dir);
        if (kinds.count("returns")) export_returns(lt.trace, out_dir);
    } catch (const TraceIOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIO;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fast-approximation constructions of circle diffeomorphisms"};
    app.require_subcommand(1);

    std::string config_path, out_path, trace_path, suite = "all", what, out_dir;
    auto* construct = app.add_subcommand("construct", "run a construction and write a trace");
    construct->add_option("--config", config_path, "INI run configuration")->required();
    construct->add_option("--out", out_path, "trace output path")->required();

    auto* verify = app.add_subcommand("verify", "re-verify a trace");
    verify->add_option("--trace", trace_path, "trace file")->required();
    verify->add_option("--suite", suite, "all, integrity, stages, measure, ratio, returns or singularity");

    auto* exp = app.add_subcommand("export", "export tabular data from a trace");
    exp->add_option("--trace", trace_path, "trace file")->required();
    exp->add_option("--what", what, "comma separated: graphs, measures, returns")->required();
    exp->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    try {
        if (*construct) return cmd_construct(config_path, out_path);
        if (*verify) return cmd_verify(trace_path, suite);
        if (*exp) return cmd_export(trace_path, what, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConstruct;
    }
    return kOk;
}
