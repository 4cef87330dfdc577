#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qtank/reports.hpp"
#include "qtank/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw qtank::scenario::ValidationError("cannot open scenario file: " + path);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct CommonArgs {
    std::string scenario_path;
    std::string phase;
    double dt = 0.0;
    double t_end = 0.0;
    bool dt_set = false;
    bool t_end_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_path, "scenario file path (defaults apply when omitted)");
    cmd->add_option("--phase", args.phase, "operating point override: minus | plus")
        ->check(CLI::IsMember({"minus", "plus"}));
    cmd->add_option("--dt", args.dt, "integration step override, s")->each([&](const std::string&) {
        args.dt_set = true;
    });
    cmd->add_option("--t-end", args.t_end, "simulation length override, s")->each([&](const std::string&) {
        args.t_end_set = true;
    });
}

qtank::sim::SimConfig load_config(const CommonArgs& args) {
    qtank::scenario::Overrides ov;
    if (args.phase == "minus") ov.phase = qtank::plant::Phase::Minus;
    if (args.phase == "plus") ov.phase = qtank::plant::Phase::Plus;
    if (args.dt_set) ov.dt = args.dt;
    if (args.t_end_set) ov.t_end = args.t_end;
    const std::string text = args.scenario_path.empty() ? "" : read_file(args.scenario_path);
    return qtank::scenario::parse_scenario(text, ov);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadruple-tank process: analysis, observer design and closed-loop simulation"};
    app.require_subcommand(1);

    CommonArgs analyze_args, design_args, sim_args;
    std::string out_path = "trace.csv";

    CLI::App* analyze = app.add_subcommand("analyze", "frequency-domain analysis report");
    add_common(analyze, analyze_args);

    CLI::App* design = app.add_subcommand("design-observer", "distributed observer synthesis report");
    add_common(design, design_args);

    CLI::App* simulate = app.add_subcommand("simulate", "run the closed loop and write a CSV trace");
    add_common(simulate, sim_args);
    simulate->add_option("--out", out_path, "CSV output path (default trace.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            std::cout << qtank::cli::analyze_report(load_config(analyze_args));
        } else if (design->parsed()) {
            std::cout << qtank::cli::design_observer_report(load_config(design_args));
        } else {
            std::cout << qtank::cli::simulate_to_csv(load_config(sim_args), out_path);
        }
    } catch (const qtank::scenario::ParseError& e) {
        std::cerr << "scenario parse error: " << e.what() << "\n";
        return 1;
    } catch (const qtank::scenario::ValidationError& e) {
        std::cerr << "scenario validation error: " << e.what() << "\n";
        return 1;
    } catch (const qtank::sim::DesignRejected& e) {
        std::cerr << "design rejected: " << e.what() << "\n";
        return 1;
    } catch (const qtank::observer::NotDetectable& e) {
        std::cerr << "design error: " << e.what() << "\n";
        return 1;
    } catch (const qtank::observer::DisconnectedGraph& e) {
        std::cerr << "design error: " << e.what() << "\n";
        return 1;
    } catch (const qtank::observer::PlacementFailed& e) {
        std::cerr << "design error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
