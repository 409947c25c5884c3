#pragma once

#include "mrb/string_config.hpp"

#include <vector>

namespace mrb {

struct SimParams {
    double dt = 1e-6;                   // seconds
    double t_end = 0.0;                 // seconds
    double trip_current = 150.0;        // amperes, |i_circ| above this aborts
    std::size_t record_decimation = 25; // trace rows every this many steps

    [[nodiscard]] std::vector<std::string> check(double f_carrier) const;
};

/// Parameters of the closed-form steady-state circulating current.
struct CircSSParams {
    double k_dynamic = 0.0; // volts per SOC unit
    double z_dyn = 0.0;     // ohms
    double r_eq = 0.0;      // ohms: 4 r_DS(on) + r_bj + r_b(j+1) + ESR
};

struct SimState {
    std::vector<double> i_circ; // per group; positive flows module j -> j+1
    double i_filter = 0.0;      // string/filter inductor current (= i_out)
    double v_cout = 0.0;        // output capacitor voltage
    double i_load = 0.0;        // RL load current
    std::vector<BatteryState> batteries;
    double t = 0.0;
};

[[nodiscard]] SimState make_initial_state(const StringConfig& cfg);

/// Gate condition of the string at one instant. The outer bridges either
/// insert the chain into the load path or leave it freewheeling; each
/// interconnection group carries its mode. Module 0 is the base of the chain
/// when connected; module j+1 stacks a series level when group j is in Series,
/// joins module j's parallel cluster in Parallel/Buck/Boost, and is detached
/// in Bypass.
struct GateInstant {
    bool string_connected = true;
    int polarity = 1; // applied string polarity (negative modulation half cycle)
    bool module0_resting = false; // base module detached (rotating rest)
    std::vector<GroupMode> modes;
};

/// Circulating-current slope for one group. Series holds the quasi-static
/// current; Parallel is driven by the module voltage difference; the transfer
/// intervals apply the single-module drives whose volt-second balance against
/// the parallel interval reproduces the open-loop modulation index; Bypass
/// freewheels through r_eq.
[[nodiscard]] double dicirc_dt(GroupMode mode, double v_bj, double v_bj1, double i_circ,
                               double l_eff_dm, double r_eq);

/// (v_bj - v_bj1 + k_dynamic * delta_soc) / (r_eq + z_dyn).
[[nodiscard]] double steady_state_icirc(double v_bj, double v_bj1, const CircSSParams& p,
                                        double delta_soc);

/// Net volt-seconds over one period:
/// (v_bj - v_bj1 - i_circ*k_r)*t_p + (-v_bj1 - i_circ*k_b)*t_b.
/// Zero encodes the flux-balance condition.
[[nodiscard]] double flux_balance_residual(double v_bj, double v_bj1, double i_circ, double t_p,
                                           double t_b, double k_r, double k_b);

/// Battery currents (positive charging) at one instant: series levels carry
/// the full string current, parallel clusters split it (alpha/1-alpha for a
/// pair, equally beyond), bypassed modules carry nothing, and each group's
/// circulating current is added on the side(s) its conduction loop touches.
[[nodiscard]] std::vector<double> allocate_battery_currents(const GateInstant& gates,
                                                            double i_out,
                                                            const std::vector<double>& i_circ,
                                                            double alpha);

/// Per-step energy bookkeeping, joules. The conservation identity is
/// e_chem_out = e_battery_loss + e_path_loss + e_circ_loss + e_load_loss
///              + delta(stored_energy).
struct StepLedger {
    double e_chem_out = 0.0;     // sum of -ocv*i_b*dt, net
    double e_chem_gross = 0.0;   // sum of |ocv*i_b|*dt, throughput reference
    double e_battery_loss = 0.0; // i_b^2 * r_internal
    double e_path_loss = 0.0;    // load-path switch and winding resistance
    double e_circ_loss = 0.0;    // differential-path resistance
    double e_load_loss = 0.0;    // R_load * i_load^2
};

/// Magnetic plus electrostatic energy held in the filter, load, and
/// differential inductances.
[[nodiscard]] double stored_energy(const SimState& state, const StringConfig& cfg);

/// Advances all states by dt under a constant gate condition; semi-implicit
/// on the resistive terms. The ledger, when given, accumulates the energy
/// terms of this step; i_b_out receives the midpoint battery currents the
/// step integrated.
[[nodiscard]] SimState step(const SimState& state, const StringConfig& cfg,
                            const GateInstant& gates, double dt, StepLedger* ledger = nullptr,
                            std::vector<double>* i_b_out = nullptr);

} // namespace mrb
