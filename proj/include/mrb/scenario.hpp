#pragma once

#include "mrb/control.hpp"
#include "mrb/dynamics.hpp"
#include "mrb/engine.hpp"

#include <string>
#include <vector>

namespace mrb {

/// One bound on a phase metric, checked in --assert mode.
struct MetricCheck {
    std::string metric; // module_power | module_current | module_current_mag |
                        // module_rms_current | output_power | efficiency |
                        // max_icirc | v_track_err | soc_spread_final
    int module = -1;    // 1-based, 0 or -1 = n/a
    int phase = 0;      // 0-based phase index
    double min = -1e300;
    double max = 1e300;
};

struct Scenario {
    std::string name;
    double duration = 0.0;
    std::vector<RefPoint> refs;
    std::vector<LoadPoint> loads;
    std::vector<double> initial_soc; // optional per-module override
    double tail_fraction = 0.4;      // steady-state window of each phase
    std::vector<MetricCheck> assertions;

    [[nodiscard]] ScenarioProgram program(double time_scale = 1.0) const;
};

struct PhaseMetrics {
    double t0 = 0.0, t1 = 0.0;
    // tail-window averages
    std::vector<double> module_power;       // watts, discharge positive
    std::vector<double> module_current;     // amperes, charging positive
    std::vector<double> module_rms_current;
    std::vector<double> group_icirc_avg;
    double output_power = 0.0;
    double v_track_rms_err = 0.0; // relative to reference amplitude
    double max_abs_icirc = 0.0;   // over the whole phase
    double max_flux_residual_rel = 0.0; // over the tail window
    // full-phase energy view
    double efficiency = 0.0; // load energy / net battery discharge energy
    std::vector<double> module_power_full; // full-phase averages
};

struct SummaryMetrics {
    std::vector<PhaseMetrics> phases;
    double max_abs_icirc = 0.0;
    double energy_residual_rel = 0.0;
    double soc_spread_final = 0.0;
    double duration = 0.0;
};

[[nodiscard]] SummaryMetrics compute_metrics(const RunResult& result,
                                             const ScenarioProgram& program,
                                             double tail_fraction);

struct RunManifest {
    std::string config_path;
    std::string config_hash; // fnv1a-64 of the raw config bytes
    std::string tool_version;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;

    [[nodiscard]] std::string to_json() const;
};

[[nodiscard]] std::string fnv1a64_hex(const std::string& bytes);
[[nodiscard]] const char* tool_version();

/// Everything one config file defines.
struct LoadedConfig {
    StringConfig string_cfg;
    ControlConfig control_cfg;
    SimParams sim;
    Scenario scenario;
    std::string raw; // original file bytes, for the manifest hash
    std::string path;
};

/// Parses and fully validates a config file. Throws ParseError on syntax
/// problems and ValidationError listing every violated invariant.
[[nodiscard]] LoadedConfig load_config(const std::string& path);
[[nodiscard]] LoadedConfig parse_config(const std::string& json_text, const std::string& path);

struct AssertionOutcome {
    bool passed = true;
    std::vector<std::string> failures;
};

[[nodiscard]] AssertionOutcome evaluate_assertions(const std::vector<MetricCheck>& checks,
                                                   const SummaryMetrics& metrics);

struct ScenarioOutcome {
    RunResult result;
    SummaryMetrics metrics;
    RunManifest manifest;
};

/// Runs the configured scenario closed loop and computes phase metrics.
/// time_scale stretches the schedule (--full-length).
[[nodiscard]] ScenarioOutcome run_scenario(const LoadedConfig& lc, double time_scale = 1.0);

[[nodiscard]] std::string metrics_to_json(const SummaryMetrics& m);

} // namespace mrb
