#pragma once

#include "mrb/modulation.hpp"
#include "mrb/string_config.hpp"

#include <vector>

namespace mrb {

struct PIGains {
    double kp = 0.0;
    double ki = 0.0; // 1/seconds
    double out_min = -1.0;
    double out_max = 1.0;
};

struct PIState {
    double integrator = 0.0;
    bool saturated = false;
};

/// Standard PI with output clamping; the integrator freezes whenever pushing
/// further into a saturated output.
[[nodiscard]] double pi_update(const PIGains& gains, PIState& state, double error, double dt);

/// Open-loop modulation index sustaining i_circ_target between modules at
/// voltages v_bj, v_bj1 under output index m0:
/// (v_bj - v_bj1 - i*r_eq) * (1 - m0) / (v_bj + v_bj1 + i*r_eq).
/// Throws DegenerateDenominator when the denominator is <= 0.
[[nodiscard]] double feedforward_md(double v_bj, double v_bj1, double m0, double i_circ_target,
                                    double r_eq);

enum class CircRefMode : std::uint8_t { Zero, SocBalance, SocPlusLoad, EnergyCap };

struct CircRefPolicy {
    CircRefMode mode = CircRefMode::Zero;
    double k_soc = 0.0;       // amperes per SOC unit
    double k_load = 0.0;
    bool alternating = false; // multiply by sin(omega*t)
};

/// Circulating-current reference for a group: zero, SOC balancing
/// k_soc*(soc_avg - soc_next), optionally plus k_load*i_load, optionally
/// modulated by sin(omega*t).
[[nodiscard]] double circ_reference(const CircRefPolicy& policy, double soc_avg, double soc_next,
                                    double i_load, double t, double omega);

struct EnergyCapPolicy {
    double p_energy_max = 300.0; // watts per energy module
    double gain = 2.5;           // reference slew per watt of power error, A/(W*s)
    double i_ref_limit = 70.0;   // amperes
    double power_tau = 0.010;    // seconds, measurement filter ahead of the chain
};

/// Reference slew (A/s) for a boundary group: positive drives energy-module
/// surplus into the power modules, negative draws the deficit back.
[[nodiscard]] double energy_cap_reference(double p_upstream_actual, double p_upstream_target,
                                          const EnergyCapPolicy& cap);

/// Modes a group may take; entry 0 describes the outer bridge pair.
struct AllowedModes {
    bool series = false;
    bool parallel = false;
    bool transfer = false; // buck/boost energy exchange
    bool bypass = false;
};

/// Table-driven assignment for the string at a demand level: the outer pair
/// stays in its bypass role, series participation grows with demand, the
/// energy/power boundary group keeps its parallel/boost exchange, trailing
/// groups stay parallel. Throws DemandExceedsCapability above the full-series
/// voltage.
[[nodiscard]] std::vector<AllowedModes> schedule_group_modes(const StringConfig& cfg,
                                                             double demand);

/// Period-averaged measurements driving one control update.
struct Measurements {
    double t = 0.0;
    double v_out_avg = 0.0;
    double i_out_avg = 0.0;
    double i_cap_avg = 0.0;  // filter minus load current
    double i_load_avg = 0.0;
    std::vector<double> i_circ_avg; // per group
    std::vector<double> p_b_avg;    // per module, discharge positive
    std::vector<double> v_b_avg;    // per module, terminal voltage
    std::vector<double> soc;        // per module
};

struct References {
    double v_ref = 0.0;       // target matching the measurement window (PI error)
    double v_ref_ff = 0.0;    // target over the upcoming period (feedforward)
    double v_amplitude = 0.0; // schedule amplitude, sets series participation
};

struct ControlConfig {
    PIGains pi_voltage{0.001, 1.0, -0.95, 0.95};
    PIGains pi_circ{0.0, 0.05, -0.005, 0.005};
    double ff_gain = 1.03;        // conservative index feedforward, PI trims the rest
    double deadbeat_gain = 0.4;   // per-period fraction of the current error removed
    double active_damping = 0.0;  // index per ampere of capacitor current
    double md2_limit = 0.02;
    int carrier_rotation_periods = 0; // slip one phase slot every N periods; 0 = off
    int rest_rotation_periods = 20;   // zero-policy resting rotation, aligned to ref zero crossings
    double bypass_floor = 0.08;       // |m0| below this bypasses the transfer loops for the period
    double demand_margin = 0.95;  // fraction of the reference the scheduler must cover
    CircRefPolicy policy;
    EnergyCapPolicy cap;
};

struct ControllerState {
    PIState pi_v;
    std::vector<PIState> pi_c;     // per group
    std::vector<double> i_ref;     // per group, policy-integrated references
    std::vector<double> p_b_filt;  // per module, filtered powers for the chain
    ModulationCommand last_command;
    bool command_saturated = false;
};

/// Full two-loop controller: the voltage PI produces m0 (sign = polarity),
/// each group's md2 combines the feedforward index with its current PI.
class Controller {
public:
    Controller(const StringConfig& cfg, ControlConfig ctl);

    /// One update per carrier period.
    ModulationCommand update(const Measurements& m, const References& refs, double dt);

    [[nodiscard]] const ControllerState& state() const { return state_; }
    [[nodiscard]] const std::vector<bool>& series_allowed() const { return series_allowed_; }
    [[nodiscard]] const std::vector<bool>& parallel_disabled() const { return parallel_disabled_; }
    [[nodiscard]] bool module0_resting() const { return module0_resting_; }
    [[nodiscard]] const ControlConfig& config() const { return ctl_; }

private:
    void update_references(const Measurements& m, double dt);

    const StringConfig* cfg_;
    ControlConfig ctl_;
    ControllerState state_;
    std::vector<bool> series_allowed_;
    std::size_t n_energy_ = 0;
    double capability_ = 0.0;   // full-series string voltage
    double period_ = 5e-4;      // carrier period
    std::vector<double> l_dm_;  // differential inductances per group
    std::vector<bool> parallel_disabled_;
    bool module0_resting_ = false;
    long update_count_ = 0;
    std::vector<double> rest_credit_;
    std::vector<bool> resting_;
};

/// Spec-surface single update against explicit state.
[[nodiscard]] ModulationCommand control_step(Controller& ctrl, const Measurements& m,
                                             const References& refs, double dt);

} // namespace mrb
