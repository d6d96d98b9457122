// Command line front end. Exit codes: 0 success, 1 verification breach,
// 2 parse or validation failure, 3 market failure while path-level artifacts
// were requested.

#include "insmkt/insmkt.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

int run_command(const std::string& scenario_path, const std::string& out_dir,
                int grid_override, long long seed_override) {
    insmkt::Scenario sc = insmkt::parse_scenario_file(scenario_path);
    if (grid_override > 0) sc.grid_points = grid_override;
    if (seed_override >= 0) sc.sim.seed = static_cast<std::uint64_t>(seed_override);

    const insmkt::ValidationResult vr = insmkt::validate_scenario(sc);
    if (!vr.ok()) {
        std::cerr << scenario_path << ": invalid scenario: " << vr.describe() << "\n";
        return 2;
    }

    const insmkt::RunResult res = insmkt::run_scenario(sc, out_dir);
    std::cout << res.message << "\n";
    for (const auto& f : res.files) std::cout << "  " << f << "\n";
    return res.exit_code;
}

int figure_command(const std::string& scenario_path, int figure, const std::string& out_dir) {
    insmkt::Scenario sc = insmkt::parse_scenario_file(scenario_path);
    const insmkt::ValidationResult vr = insmkt::validate_scenario(sc);
    if (!vr.ok()) {
        std::cerr << scenario_path << ": invalid scenario: " << vr.describe() << "\n";
        return 2;
    }
    const insmkt::RunResult res = insmkt::emit_figure_data(sc, figure, out_dir);
    std::cout << res.message << "\n";
    for (const auto& f : res.files) std::cout << "  " << f << "\n";
    return res.exit_code;
}

int verify_command(const std::string& scenario_path) {
    insmkt::Scenario sc = insmkt::parse_scenario_file(scenario_path);
    const insmkt::ValidationResult vr = insmkt::validate_scenario(sc);
    if (!vr.ok()) {
        std::cerr << scenario_path << ": invalid scenario: " << vr.describe() << "\n";
        return 2;
    }
    const insmkt::OracleReport rep =
        insmkt::run_verification(sc.params, sc.eps, sc.grid_points, sc.sim);
    std::cout << insmkt::format_oracle_report(rep);
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"insurance market equilibrium engine"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = insmkt::default_out_dir();
    int grid_override = -1;
    long long seed_override = -1;
    int figure = 0;

    CLI::App* run = app.add_subcommand("run", "evaluate a scenario and write its artifacts");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory (default: $INSMKT_OUT or ./out)");
    run->add_option("--grid", grid_override, "override the output grid size");
    run->add_option("--seed", seed_override, "override the simulation seed");

    CLI::App* fig = app.add_subcommand("figure", "emit a curve-family dataset");
    fig->add_option("scenario", scenario_path, "scenario file")->required();
    fig->add_option("--figure", figure, "family id: 2, 3, 4 or 5")
        ->required()
        ->check(CLI::Range(2, 5));
    fig->add_option("--out", out_dir, "output directory (default: $INSMKT_OUT or ./out)");

    CLI::App* ver = app.add_subcommand("verify", "run the numeric cross-checks and print a report");
    ver->add_option("scenario", scenario_path, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return run_command(scenario_path, out_dir, grid_override, seed_override);
        if (fig->parsed()) return figure_command(scenario_path, figure, out_dir);
        if (ver->parsed()) return verify_command(scenario_path);
    } catch (const insmkt::ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const insmkt::market_failure_error& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
