#include "mrb/errors.hpp"
#include "mrb/reports.hpp"
#include "mrb/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitEngine = 2;
constexpr int kExitAssertion = 3;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

int cmd_validate(const std::string& config_path) {
    try {
        const auto lc = mrb::load_config(config_path);
        std::cout << "ok: " << config_path << " (" << lc.string_cfg.n_modules() << " modules, "
                  << lc.string_cfg.n_groups() << " groups, scenario \"" << lc.scenario.name
                  << "\")\n";
        return kExitOk;
    } catch (const mrb::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
}

int cmd_sim(const std::string& config_path, std::string out_dir, double dt_override,
            bool full_length, long decimation_override, bool assert_mode) {
    mrb::LoadedConfig lc;
    try {
        lc = mrb::load_config(config_path);
    } catch (const mrb::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
    if (dt_override > 0.0) lc.sim.dt = dt_override;
    if (decimation_override > 0) {
        lc.sim.record_decimation = static_cast<std::size_t>(decimation_override);
    }
    if (out_dir.empty()) out_dir = "out/" + lc.scenario.name;

    mrb::ScenarioOutcome outcome;
    try {
        outcome = mrb::run_scenario(lc, full_length ? 10.0 / 3.0 : 1.0);
    } catch (const mrb::Error& e) {
        std::cerr << "engine error: " << e.what() << "\n";
        return kExitEngine;
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    std::string trace_csv = outcome.result.trace.to_csv();
    if (!outcome.result.error.empty()) {
        trace_csv += "# error: " + outcome.result.error + "\n";
    }
    write_file(dir / "trace.csv", trace_csv);
    write_file(dir / "metrics.json", mrb::metrics_to_json(outcome.metrics));
    outcome.manifest.outputs = {(dir / "trace.csv").string(), (dir / "metrics.json").string(),
                                (dir / "manifest.json").string()};
    write_file(dir / "manifest.json", outcome.manifest.to_json());

    std::cout << "scenario \"" << lc.scenario.name << "\": " << outcome.result.trace.n_rows()
              << " trace rows -> " << out_dir << "\n";
    for (std::size_t ph = 0; ph < outcome.metrics.phases.size(); ++ph) {
        const auto& p = outcome.metrics.phases[ph];
        std::cout << "  phase " << ph << " [" << p.t0 << ", " << p.t1
                  << ") s: output " << p.output_power << " W, efficiency " << p.efficiency
                  << ", max|i_circ| " << p.max_abs_icirc << " A\n    module power (W):";
        for (double w : p.module_power) std::cout << ' ' << w;
        std::cout << "\n";
    }
    std::cout << "  energy residual (rel): " << outcome.metrics.energy_residual_rel << "\n";

    if (!outcome.result.error.empty()) {
        std::cerr << "engine error: " << outcome.result.error << "\n";
        return kExitEngine;
    }
    if (assert_mode) {
        const auto check = mrb::evaluate_assertions(lc.scenario.assertions, outcome.metrics);
        for (const auto& f : check.failures) std::cerr << "assertion failed: " << f << "\n";
        if (!check.passed) return kExitAssertion;
        std::cout << "  " << lc.scenario.assertions.size() << " assertions passed\n";
    }
    return kExitOk;
}

int cmd_design(const std::string& config_path, std::string out_dir) {
    mrb::LoadedConfig lc;
    try {
        lc = mrb::load_config(config_path);
    } catch (const mrb::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
    const auto rep = mrb::design_report(lc.string_cfg, mrb::RippleSpec{});
    std::cout << rep.text;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "design.txt", rep.text);
    }
    return kExitOk;
}

int cmd_compare(double rho_min, double rho_max, std::size_t points, std::string out_dir) {
    if (!(rho_min >= 0.0) || !(rho_max > rho_min) || points == 0) {
        std::cerr << "compare: need 0 <= rho-min < rho-max and points >= 1\n";
        return kExitValidation;
    }
    const auto rep = mrb::compare_report(mrb::OperatingPoint{}, mrb::rho_grid(rho_min, rho_max, points));
    std::cout << rep.text;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "compare.csv", rep.csv);
    }
    return rep.ordering_ok ? kExitOk : kExitAssertion;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"modular reconfigurable battery string simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    double dt_override = 0.0;
    bool full_length = false;
    long decimation = 0;
    bool assert_mode = false;

    auto* sim = app.add_subcommand("sim", "run a scenario closed loop");
    sim->add_option("config", config_path, "configuration file")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--dt", dt_override, "integration step override, seconds");
    sim->add_flag("--full-length", full_length, "run the uncompressed schedule");
    sim->add_option("--csv-decimation", decimation, "trace rows every N steps");
    sim->add_flag("--assert", assert_mode, "evaluate the scenario's metric assertions");

    auto* design = app.add_subcommand("design", "component sizing report");
    design->add_option("config", config_path, "configuration file")->required();
    design->add_option("--out", out_dir, "output directory");

    double rho_min = 0.0, rho_max = 0.5;
    std::size_t points = 50;
    auto* compare = app.add_subcommand("compare", "loss and core-size comparison");
    compare->add_option("--rho-min", rho_min, "grid lower bound (exclusive)");
    compare->add_option("--rho-max", rho_max, "grid upper bound (inclusive)");
    compare->add_option("--points", points, "grid size");
    compare->add_option("--out", out_dir, "output directory");

    auto* validate = app.add_subcommand("validate", "schema check only");
    validate->add_option("config", config_path, "configuration file")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        return cmd_sim(config_path, out_dir, dt_override, full_length, decimation, assert_mode);
    }
    if (design->parsed()) return cmd_design(config_path, out_dir);
    if (compare->parsed()) return cmd_compare(rho_min, rho_max, points, out_dir);
    if (validate->parsed()) return cmd_validate(config_path);
    return kExitOk;
}
