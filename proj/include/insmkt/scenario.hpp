#pragma once

// Scenario files, artifact emission, and the drivers behind the command line
// front end.
//
// Scenario grammar: one "key = value" pair per line, '#' starts a comment,
// blank lines are ignored, later assignments win. Keys are the dotted field
// names of the parameter structs (insurance.l, financial.rho, ...) plus
//   eps         constant friction intensity, or "none" for the frictionless market
//   grid_points output grid size (>= 2)
//   seed        simulation seed
//   sim.n_paths, sim.n_steps
//   outputs     comma list drawn from: path, regime, statics, optimal_eps, oracle
// Unset keys keep the benchmark defaults baked into the structs.
//
// Every run rewrites its artifacts atomically (temp file, then rename) and
// regenerates scenario.resolved, the canonical full-precision restatement of
// the scenario. Re-running from scenario.resolved reproduces every artifact
// byte for byte.

#include "insmkt/model.hpp"
#include "insmkt/oracle.hpp"
#include "insmkt/welfare.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace insmkt {

struct Scenario {
    ModelParams params;
    std::optional<double> eps;  // constant friction; nullopt = frictionless
    int grid_points = 2001;
    SimSpec sim;
    std::vector<std::string> outputs{"path", "regime"};
};

class ScenarioError : public std::runtime_error {
public:
    std::string source;
    int line;
    std::string field;
    ScenarioError(std::string src, int ln, std::string fld, const std::string& msg)
        : std::runtime_error(src + ":" + std::to_string(ln) +
                             (fld.empty() ? "" : ": key '" + fld + "'") + ": " + msg),
          source(std::move(src)),
          line(ln),
          field(std::move(fld)) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, const std::string& src, int line,
                           const std::string& key) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw ScenarioError(src, line, key, "'" + v + "' is not a number");
    }
}

inline long long parse_int(const std::string& v, const std::string& src, int line,
                           const std::string& key) {
    try {
        std::size_t used = 0;
        const long long out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw ScenarioError(src, line, key, "'" + v + "' is not an integer");
    }
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline Scenario parse_scenario_text(const std::string& text, const std::string& source_name) {
    Scenario sc;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ScenarioError(source_name, lineno, "", "expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ScenarioError(source_name, lineno, "", "empty key");
        if (val.empty()) throw ScenarioError(source_name, lineno, key, "empty value");

        auto num = [&] { return detail::parse_double(val, source_name, lineno, key); };
        auto integer = [&] { return detail::parse_int(val, source_name, lineno, key); };

        ModelParams& p = sc.params;
        if (key == "insurance.l") p.insurance.l = num();
        else if (key == "insurance.eta") p.insurance.eta = num();
        else if (key == "financial.r") p.financial.r = num();
        else if (key == "financial.mu") p.financial.mu = num();
        else if (key == "financial.sigma") p.financial.sigma = num();
        else if (key == "financial.rho") p.financial.rho = num();
        else if (key == "insurer.gamma") p.insurer.gamma = num();
        else if (key == "insurer.t0") p.insurer.t0 = num();
        else if (key == "insurer.T") p.insurer.T = num();
        else if (key == "insurer.m0") p.insurer.m0 = num();
        else if (key == "regulator.theta_hi") p.regulator.theta_hi = num();
        else if (key == "regulator.theta_lo") p.regulator.theta_lo = num();
        else if (key == "regulator.eps_bar") p.regulator.eps_bar = num();
        else if (key == "eps") {
            if (val == "none") sc.eps = std::nullopt;
            else sc.eps = num();
        } else if (key == "grid_points") {
            sc.grid_points = static_cast<int>(integer());
        } else if (key == "seed") {
            sc.sim.seed = static_cast<std::uint64_t>(integer());
        } else if (key == "sim.n_paths") {
            sc.sim.n_paths = static_cast<long>(integer());
        } else if (key == "sim.n_steps") {
            sc.sim.n_steps = static_cast<int>(integer());
        } else if (key == "outputs") {
            const auto items = detail::split_list(val);
            if (items.empty()) throw ScenarioError(source_name, lineno, key, "empty list");
            for (const auto& item : items) {
                if (item != "path" && item != "regime" && item != "statics" &&
                    item != "optimal_eps" && item != "oracle") {
                    throw ScenarioError(source_name, lineno, key,
                                        "unknown output '" + item + "'");
                }
            }
            sc.outputs = items;
        } else {
            throw ScenarioError(source_name, lineno, key, "unknown key");
        }
    }
    return sc;
}

inline Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path, 0, "", "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

// Scenario-level checks layered on top of the parameter validation.
inline ValidationResult validate_scenario(const Scenario& sc) {
    ValidationResult res = validate(sc.params);
    if (sc.eps) {
        if (!(*sc.eps >= 0.0)) {
            res.violations.push_back({"eps", "eps >= 0 required"});
        } else if (*sc.eps > sc.params.regulator.eps_bar) {
            res.violations.push_back({"eps", "eps <= eps_bar required"});
        }
    }
    if (sc.grid_points < 2) res.violations.push_back({"grid_points", "at least 2 required"});
    if (sc.sim.n_paths < 1) res.violations.push_back({"sim.n_paths", "at least 1 required"});
    if (sc.sim.n_steps < 1) res.violations.push_back({"sim.n_steps", "at least 1 required"});
    return res;
}

inline std::string canonical_scenario_text(const Scenario& sc) {
    const ModelParams& p = sc.params;
    std::ostringstream out;
    out << "# resolved scenario, all keys explicit\n";
    out << "insurance.l = " << format_g17(p.insurance.l) << "\n";
    out << "insurance.eta = " << format_g17(p.insurance.eta) << "\n";
    out << "financial.r = " << format_g17(p.financial.r) << "\n";
    out << "financial.mu = " << format_g17(p.financial.mu) << "\n";
    out << "financial.sigma = " << format_g17(p.financial.sigma) << "\n";
    out << "financial.rho = " << format_g17(p.financial.rho) << "\n";
    out << "insurer.gamma = " << format_g17(p.insurer.gamma) << "\n";
    out << "insurer.t0 = " << format_g17(p.insurer.t0) << "\n";
    out << "insurer.T = " << format_g17(p.insurer.T) << "\n";
    out << "insurer.m0 = " << format_g17(p.insurer.m0) << "\n";
    out << "regulator.theta_hi = " << format_g17(p.regulator.theta_hi) << "\n";
    out << "regulator.theta_lo = " << format_g17(p.regulator.theta_lo) << "\n";
    out << "regulator.eps_bar = " << format_g17(p.regulator.eps_bar) << "\n";
    out << "eps = " << (sc.eps ? format_g17(*sc.eps) : std::string("none")) << "\n";
    out << "grid_points = " << sc.grid_points << "\n";
    out << "seed = " << sc.sim.seed << "\n";
    out << "sim.n_paths = " << sc.sim.n_paths << "\n";
    out << "sim.n_steps = " << sc.sim.n_steps << "\n";
    out << "outputs = ";
    for (std::size_t i = 0; i < sc.outputs.size(); ++i) {
        if (i) out << ",";
        out << sc.outputs[i];
    }
    out << "\n";
    return out.str();
}

// Write-then-rename so readers never observe a half-written artifact.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string default_out_dir() {
    if (const char* env = std::getenv("INSMKT_OUT")) return env;
    return "out";
}

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> files;
    std::string message;
};

namespace detail {

struct PathColumns {
    const std::vector<double>* grid;
    const std::vector<double>* theta;
    const std::vector<double>* x;
    const std::vector<double>* y;
    const std::vector<double>* w;  // may be null
};

inline void append_series_rows(std::ostringstream& out, const PathColumns& cols,
                               const std::string& series) {
    struct Block {
        const char* quantity;
        const std::vector<double>* values;
    };
    const Block blocks[] = {{"theta_star", cols.theta},
                            {"x_star", cols.x},
                            {"y_star", cols.y},
                            {"w_star", cols.w}};
    for (const Block& b : blocks) {
        if (!b.values) continue;
        for (std::size_t i = 0; i < cols.grid->size(); ++i) {
            out << format_g17((*cols.grid)[i]) << "," << b.quantity << ","
                << format_g17((*b.values)[i]) << "," << series << "\n";
        }
    }
}

inline bool wants(const Scenario& sc, const char* artifact) {
    for (const auto& o : sc.outputs) {
        if (o == artifact) return true;
    }
    return false;
}

}  // namespace detail

inline std::string format_oracle_report(const OracleReport& rep) {
    std::ostringstream out;
    for (const auto& c : rep.checks) {
        out << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": observed " << format_g17(c.observed)
            << ", tolerance " << format_g17(c.tolerance);
        if (!c.detail.empty()) out << " (" << c.detail << ")";
        out << "\n";
    }
    out << "overall = " << (rep.all_pass() ? "pass" : "fail") << "\n";
    return out.str();
}

// Evaluate one scenario and write its artifacts. Returns exit code 0 on
// success and 3 when the scenario hits market failure while artifacts beyond
// the regime report were requested; the regime report itself, including
// tau_f, is written either way. Parameter and scenario validation are the
// caller's job (the CLI reports violations and exits 2 before calling this).
inline RunResult run_scenario(const Scenario& sc, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const ModelParams& p = sc.params;
    fs::create_directories(out_dir);

    RunResult result;
    auto emit = [&](const char* name, const std::string& content) {
        const fs::path path = fs::path(out_dir) / name;
        write_file_atomic(path, content);
        result.files.push_back(path.string());
    };

    emit("scenario.resolved", canonical_scenario_text(sc));

    const bool perfect = std::abs(p.financial.rho) == 1.0;
    const TimeGrid grid = TimeGrid::uniform(p, sc.grid_points);
    std::ostringstream reg;

    if (perfect) {
        // May throw if the pinned loading falls outside the regulator band;
        // the CLI reports that as a validation failure.
        const EquilibriumPath path = perfect_correlation_path(p, grid);
        reg << "regime = PositiveMarket\n";
        reg << "perfect_correlation = true\n";
        reg << "binding_condition = loading pinned to rho*(mu-r)*eta/(sigma*l)\n";
        reg << "eps = " << (sc.eps ? format_g17(*sc.eps) : std::string("none")) << "\n";
        reg << "tau_f = none\n";
        reg << "tau_n = " << (path.tau_n ? format_g17(*path.tau_n) : std::string("none")) << "\n";
        reg << "note = statics, welfare and optimal_eps artifacts are not defined for |rho| = 1\n";
        if (detail::wants(sc, "regime")) emit("regime.txt", reg.str());
        if (detail::wants(sc, "path")) {
            std::ostringstream csv;
            csv << "s,quantity,value,series\n";
            detail::append_series_rows(
                csv, {&path.grid, &path.theta_star, &path.x_star, &path.y_star, nullptr},
                "base");
            emit("path.csv", csv.str());
        }
        result.message = "perfect-correlation path written";
        return result;
    }

    const double eps = sc.eps.value_or(0.0);
    const RegimeVerdict verdict = classify(p, eps);
    reg << "regime = " << to_string(verdict.regime) << "\n";
    reg << "perfect_correlation = false\n";
    reg << "binding_condition = " << verdict.binding_condition << "\n";
    reg << "eps = " << (sc.eps ? format_g17(*sc.eps) : std::string("none")) << "\n";
    reg << "tau_f = " << (verdict.tau_f ? format_g17(*verdict.tau_f) : std::string("none")) << "\n";

    if (verdict.regime == Regime::MarketFailure) {
        reg << "tau_n = none\n";
        emit("regime.txt", reg.str());
        const bool blocked = detail::wants(sc, "path") || detail::wants(sc, "statics") ||
                             detail::wants(sc, "optimal_eps") || detail::wants(sc, "oracle");
        result.exit_code = blocked ? 3 : 0;
        result.message = "market failure from s = " + format_g17(*verdict.tau_f) +
                         ", no clearing loading inside [theta_lo, theta_hi]";
        return result;
    }

    const std::optional<FrictionSchedule> eps_path =
        sc.eps ? std::optional<FrictionSchedule>(FrictionSchedule::constant(*sc.eps))
               : std::nullopt;
    const EquilibriumPath path = equilibrium_path(p, eps_path, grid);
    const bool positive = verdict.regime == Regime::PositiveMarket;
    reg << "tau_n = " << (path.tau_n ? format_g17(*path.tau_n) : std::string("none")) << "\n";

    std::optional<WelfarePath> welfare;
    if (positive) welfare = welfare_path(p, eps_path, grid);

    if (detail::wants(sc, "path")) {
        std::ostringstream csv;
        csv << "s,quantity,value,series\n";
        std::vector<double> zeros;
        const std::vector<double>* w = nullptr;
        if (welfare) {
            w = &welfare->w_star;
        } else {
            zeros.assign(path.grid.size(), 0.0);  // zero market trades nothing
            w = &zeros;
        }
        detail::append_series_rows(
            csv, {&path.grid, &path.theta_star, &path.x_star, &path.y_star, w}, "base");
        emit("path.csv", csv.str());
    }

    if (detail::wants(sc, "statics")) {
        if (positive) {
            std::ostringstream csv;
            csv << "s,derivative,quantity,analytic_sign,numeric\n";
            const SignReport sharpe_rep = sharpe_statics(p, grid);
            for (const auto& row : sharpe_rep.rows) {
                for (std::size_t i = 0; i < sharpe_rep.grid.size(); ++i) {
                    csv << format_g17(sharpe_rep.grid[i]) << ",sharpe," << row.quantity << ","
                        << row.analytic_sign[i] << "," << format_g17(row.numeric[i]) << "\n";
                }
            }
            const SignReport fric_rep = friction_statics(p, eps, grid);
            for (const auto& row : fric_rep.rows) {
                for (std::size_t i = 0; i < fric_rep.grid.size(); ++i) {
                    csv << format_g17(fric_rep.grid[i]) << ",friction," << row.quantity << ","
                        << row.analytic_sign[i] << "," << format_g17(row.numeric[i]) << "\n";
                }
            }
            emit("statics.csv", csv.str());
        } else {
            reg << "note = statics skipped, positive market required\n";
        }
    }

    if (detail::wants(sc, "optimal_eps")) {
        if (positive) {
            const OptimalRegulation opt = optimal_epsilon(p, grid);
            std::ostringstream csv;
            csv << "s,eps_star,rho_bar,rho_lo,case_tag\n";
            for (std::size_t i = 0; i < opt.grid.size(); ++i) {
                csv << format_g17(opt.grid[i]) << "," << format_g17(opt.eps_star[i]) << ","
                    << format_g17(opt.rho_bar[i]) << "," << format_g17(opt.rho_lo[i]) << ","
                    << opt.case_tag[i] << "\n";
            }
            emit("optimal_eps.csv", csv.str());
            reg << "optimal_eps_independent = " << (opt.independent ? "true" : "false") << "\n";
            reg << "optimal_eps_constant = " << (opt.constant_across_horizon ? "true" : "false")
                << "\n";
            for (const auto& w : opt.warnings) reg << "optimal_eps_warning = " << w << "\n";
        } else {
            reg << "note = optimal_eps skipped, positive market required\n";
        }
    }

    if (detail::wants(sc, "oracle")) {
        const OracleReport rep = run_verification(p, sc.eps, sc.grid_points, sc.sim);
        emit("oracle.txt", format_oracle_report(rep));
        if (!rep.all_pass()) {
            result.message = "oracle report contains failures";
        }
    }

    if (detail::wants(sc, "regime")) emit("regime.txt", reg.str());
    if (result.message.empty()) {
        result.message = std::string("regime ") + to_string(verdict.regime) + ", " +
                         std::to_string(result.files.size()) + " artifacts written";
    }
    return result;
}

// Curve families for the four shipped figure datasets:
//   2, 3: baseline plus the mu = 0.2, gamma = 4 and theta_lo = -0.3 variants
//         (2 is meant for a negative-correlation base, 3 for a positive one)
//   4, 5: friction sweep eps in {0, 0.1, 0.2} on the scenario's parameters
// Every variant must clear as a positive market.
inline RunResult emit_figure_data(const Scenario& sc, int figure, const std::string& out_dir) {
    namespace fs = std::filesystem;
    if (figure < 2 || figure > 5) {
        throw std::invalid_argument("figure id must be 2, 3, 4 or 5");
    }

    struct Variant {
        std::string label;
        ModelParams p;
        std::optional<double> eps;
    };
    std::vector<Variant> family;
    if (figure == 2 || figure == 3) {
        family.push_back({"baseline", sc.params, sc.eps});
        Variant mu{"mu=0.2", sc.params, sc.eps};
        mu.p.financial.mu = 0.2;
        family.push_back(mu);
        Variant ga{"gamma=4", sc.params, sc.eps};
        ga.p.insurer.gamma = 4.0;
        family.push_back(ga);
        Variant tl{"theta_lo=-0.3", sc.params, sc.eps};
        tl.p.regulator.theta_lo = -0.3;
        family.push_back(tl);
    } else {
        for (double e : {0.0, 0.1, 0.2}) {
            char label[32];
            std::snprintf(label, sizeof label, "eps=%g", e);
            family.push_back({label, sc.params, e});
        }
    }

    std::ostringstream csv;
    csv << "s,quantity,value,series\n";
    for (const Variant& var : family) {
        const TimeGrid grid = TimeGrid::uniform(var.p, sc.grid_points);
        const double eps = var.eps.value_or(0.0);
        const RegimeVerdict verdict = classify(var.p, eps);
        if (verdict.regime == Regime::MarketFailure) {
            throw market_failure_error(*verdict.tau_f,
                                       "figure variant '" + var.label +
                                           "' hits market failure from s = " +
                                           format_g17(*verdict.tau_f));
        }
        if (verdict.regime != Regime::PositiveMarket) {
            throw std::runtime_error("figure variant '" + var.label +
                                     "' is not a positive market");
        }
        const std::optional<FrictionSchedule> eps_path =
            var.eps ? std::optional<FrictionSchedule>(FrictionSchedule::constant(*var.eps))
                    : std::nullopt;
        const EquilibriumPath path = equilibrium_path(var.p, eps_path, grid);
        const WelfarePath wf = welfare_path(var.p, eps_path, grid);
        detail::append_series_rows(
            csv, {&path.grid, &path.theta_star, &path.x_star, &path.y_star, &wf.w_star},
            var.label);
    }

    fs::create_directories(out_dir);
    const std::string name = "figure" + std::to_string(figure) + ".csv";
    const fs::path out_path = fs::path(out_dir) / name;
    write_file_atomic(out_path, csv.str());

    RunResult result;
    result.files.push_back(out_path.string());
    result.message = name + " written (" + std::to_string(family.size()) + " series)";
    return result;
}

}  // namespace insmkt
