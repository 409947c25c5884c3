#pragma once

#include "mrb/control.hpp"
#include "mrb/dynamics.hpp"
#include "mrb/modulation.hpp"
#include "mrb/trace.hpp"

#include <vector>

namespace mrb {

enum class RefWaveform : std::uint8_t { Sin50, Dc };

struct RefPoint {
    double t = 0.0;
    double volts = 0.0; // amplitude for Sin50, level for Dc
    RefWaveform waveform = RefWaveform::Sin50;
};

struct LoadPoint {
    double t = 0.0;
    double r = 6.0;
    double l = 100e-6;
};

/// Piecewise reference/load program the closed loop follows.
struct ScenarioProgram {
    double duration = 0.0;
    std::vector<RefPoint> refs;
    std::vector<LoadPoint> loads;

    [[nodiscard]] double v_ref(double t) const;
    [[nodiscard]] double v_amplitude(double t) const;
    [[nodiscard]] LoadParams load_at(double t) const;
    /// Phase boundaries: schedule breakpoints plus 0 and duration.
    [[nodiscard]] std::vector<double> breakpoints() const;
    [[nodiscard]] std::vector<std::string> check() const;
};

enum class GatePolicy : std::uint8_t {
    Modulated,     // closed loop: controller drives the carriers
    FixedCommand,  // open loop: one modulation command held for the whole run
    ForceParallel, // open loop: every group parallel, string detached from the load
};

/// Per-control-period averages, the measurement stream metrics are built from.
struct PeriodRecord {
    double t0 = 0.0, t1 = 0.0;
    double v_ref_mid = 0.0;
    double v_out_avg = 0.0;
    double i_out_avg = 0.0;
    double i_out_sq_avg = 0.0;
    double i_load_avg = 0.0;
    double i_load_sq_avg = 0.0;
    double p_out_avg = 0.0;           // v_out * i_out
    double v_err_sq_avg = 0.0;        // (v_ref - v_out)^2
    std::vector<double> p_b_avg;      // per module, discharge positive
    std::vector<double> v_b_avg;      // per module, terminal voltage
    std::vector<double> i_b_avg;      // per module
    std::vector<double> i_b_sq_avg;   // per module
    std::vector<double> i_circ_avg;   // per group
    std::vector<double> i1_sq_avg;    // per group, branch currents
    std::vector<double> i2_sq_avg;
    std::vector<double> soc;          // per module, at t1
    double max_abs_icirc = 0.0;
    double max_flux_residual_rel = 0.0; // |l*di| per carrier period over v_b*t_sw
    // command state applied from t1 on (closed loop only)
    double m0_cmd = 0.0;
    std::vector<double> md2_cmd;
    std::vector<double> i_ref_cmd;
};

struct PhaseEnergy {
    double t0 = 0.0, t1 = 0.0;
    StepLedger ledger;          // sums over this phase
    double stored_start = 0.0;
    double stored_end = 0.0;
};

struct RunResult {
    SimTrace trace;
    std::vector<PeriodRecord> periods;
    std::vector<PhaseEnergy> phases;
    StepLedger ledger; // whole run
    double stored_initial = 0.0;
    double stored_final = 0.0;
    double max_abs_icirc = 0.0;
    SimState final_state;
    /// Non-empty when the run aborted (trip limit, non-finite state); the
    /// trace then holds the partial run up to the abort instant.
    std::string error;

    /// Conservation residual against gross chemical throughput.
    [[nodiscard]] double energy_residual_rel() const;
};

/// Fixed-step closed-loop simulator. Gate states switch at the analytic
/// carrier-crossing instants; steps are subdivided at those boundaries so the
/// realized dwell times match the duration algebra exactly.
class Simulator {
public:
    Simulator(StringConfig cfg, ControlConfig ctl, SimParams params);

    [[nodiscard]] RunResult run(const ScenarioProgram& program);
    /// Open-loop run holding one command; series_allowed empty means all allowed.
    [[nodiscard]] RunResult run_fixed(const ScenarioProgram& program, const ModulationCommand& cmd,
                                      std::vector<bool> series_allowed = {});
    /// Open-loop pure-parallel run with the string detached from the load.
    [[nodiscard]] RunResult run_force_parallel(double t_end);

private:
    [[nodiscard]] RunResult run_impl(const ScenarioProgram& program, GatePolicy policy,
                                     const ModulationCommand* fixed_cmd,
                                     const std::vector<bool>& fixed_series_allowed);

    StringConfig cfg_;
    ControlConfig ctl_;
    SimParams params_;
};

} // namespace mrb
