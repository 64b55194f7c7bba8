// Command-line front end: scenario runs, parameter sweeps, susceptibility
// curves and CF2D rendering. Exit codes: 0 success, 2 validation error,
// 3 numeric-guard failure.
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cptclone/harness.hpp"

namespace {

using namespace cptclone;

std::vector<double> parse_values(const std::string& list, double from, double to, int points) {
    std::vector<double> values;
    if (!list.empty()) {
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            values.push_back(std::stod(item));
        }
    } else if (points > 0) {
        if (points < 2) throw ConfigError("sweep: --points must be >= 2");
        for (int i = 0; i < points; ++i) values.push_back(from + (to - from) * i / (points - 1));
    }
    return values;
}

void print_warnings(const RunReport& report) {
    for (const auto& w : report.warnings)
        std::cerr << "warning: border energy fraction " << w.value << " at z = " << w.z << " m ("
                  << w.context << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CPT image-cloning simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out";
    bool dump_fields = false, strict_guards = false;

    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_flag("--dump-fields", dump_fields, "also write CF2D field dumps");
    run_cmd->add_flag("--strict-guards", strict_guards, "treat border-energy warnings as failures");

    std::string param_name, values_list;
    double sweep_from = 0.0, sweep_to = 0.0;
    int sweep_points = 0;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter");
    sweep_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    sweep_cmd->add_option("--param", param_name, "probe_power|coupling_power|density")->required();
    sweep_cmd->add_option("--values", values_list, "comma-separated values (SI units)");
    sweep_cmd->add_option("--from", sweep_from, "range start (SI units)");
    sweep_cmd->add_option("--to", sweep_to, "range end (SI units)");
    sweep_cmd->add_option("--points", sweep_points, "number of range points");
    sweep_cmd->add_option("--out", out_dir, "output directory");

    std::string axis_name = "g", chi_out = "chi_curve.csv";
    double chi_from = 0.0, chi_to = 0.0;
    int chi_points = 41;
    auto* chi_cmd = app.add_subcommand("chi", "Tabulate the probe susceptibility along one axis");
    chi_cmd->add_option("--axis", axis_name, "g|G|N")->required();
    chi_cmd->add_option("--from", chi_from, "axis start (rad/s, or atoms/m^3 for N)")->required();
    chi_cmd->add_option("--to", chi_to, "axis end")->required();
    chi_cmd->add_option("--points", chi_points, "number of points");
    chi_cmd->add_option("--scenario", scenario_path, "scenario file for the fixed parameters");
    chi_cmd->add_option("--out", chi_out, "output CSV path");

    std::string cf2d_path, pgm_path;
    auto* render_cmd = app.add_subcommand("render", "Render a CF2D dump to 16-bit PGM");
    render_cmd->add_option("cf2d", cf2d_path, "CF2D field dump")->required();
    render_cmd->add_option("--out", pgm_path, "output PGM path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            ScenarioConfig config = load_scenario(scenario_path);
            if (dump_fields) config.outputs.dump_fields = true;
            RunOptions opts;
            opts.out_dir = out_dir;
            const RunResult result = run_scenario(config, opts);
            print_warnings(result.report);
            for (const auto& m : result.report.metrics)
                std::cout << m.name << " = " << m.value << " " << m.units << "\n";
            std::cout << "artifacts in " << out_dir << "\n";
            if (strict_guards && !result.report.warnings.empty()) {
                std::cerr << "error: border-energy guard tripped under --strict-guards\n";
                return 3;
            }
        } else if (sweep_cmd->parsed()) {
            const ScenarioConfig config = load_scenario(scenario_path);
            const SweepParameter param = sweep_parameter_from_name(param_name);
            std::vector<double> values = parse_values(values_list, sweep_from, sweep_to, sweep_points);
            if (values.empty()) values = default_sweep_values(param);
            const SweepResult result = sweep(config, param, values, out_dir);
            for (std::size_t i = 0; i < result.values.size(); ++i)
                std::cout << param_name << " = " << result.values[i]
                          << "  clone_ncc = " << result.clone_ncc[i] << "\n";
            std::cout << "sweep table: " << result.csv_path.string() << "\n";
        } else if (chi_cmd->parsed()) {
            ScenarioConfig config;
            if (!scenario_path.empty()) config = load_scenario(scenario_path);
            const ChiAxis axis = axis_name == "g"   ? ChiAxis::g
                                 : axis_name == "G" ? ChiAxis::G
                                 : axis_name == "N"
                                     ? ChiAxis::N
                                     : throw ConfigError("chi: --axis must be g|G|N");
            std::vector<std::string> notes;
            const auto curve = chi_curve(config, axis, chi_from, chi_to, chi_points, &notes);
            write_chi_curve_csv(chi_out, axis, curve, notes);
            std::cout << "wrote " << chi_out << " (" << curve.size() << " points)\n";
        } else if (render_cmd->parsed()) {
            render_cf2d_to_pgm(cf2d_path, pgm_path);
            std::cout << "wrote " << pgm_path << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericGuard& e) {
        std::cerr << "numeric-guard failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
