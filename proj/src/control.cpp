#include "mrb/control.hpp"

#include "mrb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mrb {

double pi_update(const PIGains& gains, PIState& state, double error, double dt) {
    const double delta = gains.ki * error * dt;
    const double candidate = state.integrator + delta;
    double u = gains.kp * error + candidate;
    if (u > gains.out_max) {
        // freeze: only commit integrator movement that unwinds the saturation
        if (delta < 0.0) state.integrator = candidate;
        state.saturated = true;
        return gains.out_max;
    }
    if (u < gains.out_min) {
        if (delta > 0.0) state.integrator = candidate;
        state.saturated = true;
        return gains.out_min;
    }
    state.integrator = candidate;
    state.saturated = false;
    return u;
}

double feedforward_md(double v_bj, double v_bj1, double m0, double i_circ_target, double r_eq) {
    const double denom = v_bj + v_bj1 + i_circ_target * r_eq;
    if (!(denom > 0.0)) {
        throw DegenerateDenominator("feedforward_md: v_bj + v_bj1 + i*r_eq must be > 0");
    }
    return (v_bj - v_bj1 - i_circ_target * r_eq) * (1.0 - m0) / denom;
}

double circ_reference(const CircRefPolicy& policy, double soc_avg, double soc_next, double i_load,
                      double t, double omega) {
    double ref = 0.0;
    switch (policy.mode) {
    case CircRefMode::Zero:
    case CircRefMode::EnergyCap: // integrated separately by the controller
        return 0.0;
    case CircRefMode::SocPlusLoad:
        ref = policy.k_soc * (soc_avg - soc_next) + policy.k_load * i_load;
        break;
    case CircRefMode::SocBalance:
        ref = policy.k_soc * (soc_avg - soc_next);
        break;
    }
    if (policy.alternating) ref *= std::sin(omega * t);
    return ref;
}

double energy_cap_reference(double p_upstream_actual, double p_upstream_target,
                            const EnergyCapPolicy& cap) {
    return cap.gain * (p_upstream_target - p_upstream_actual);
}

std::vector<AllowedModes> schedule_group_modes(const StringConfig& cfg, double demand) {
    const std::size_t n = cfg.n_modules();
    double capability = 0.0;
    double v_min = 0.0;
    for (const auto& m : cfg.modules) {
        const double v = m.battery.ocv(m.battery.soc_init);
        capability += v;
        v_min = v_min == 0.0 ? v : std::min(v_min, v);
    }
    if (demand > capability * (1.0 + 1e-9)) {
        throw DemandExceedsCapability("schedule_group_modes: demand " + std::to_string(demand) +
                                      " V exceeds string capability " +
                                      std::to_string(capability) + " V");
    }
    std::size_t n_insert = 0;
    if (demand > 0.0 && v_min > 0.0) {
        n_insert = static_cast<std::size_t>(std::ceil(demand / v_min - 1e-9));
        n_insert = std::clamp<std::size_t>(n_insert, 1, n);
    }

    std::size_t n_energy = 0;
    while (n_energy < n && cfg.modules[n_energy].role == ModuleRole::Energy) ++n_energy;
    const bool has_boundary = n_energy > 0 && n_energy < n;

    std::vector<AllowedModes> plan(cfg.n_groups() + 1);
    plan[0].bypass = true; // outer pair: string insertion / polarity role
    for (std::size_t i = 1; i < plan.size(); ++i) {
        plan[i].parallel = true;
        if (has_boundary && i == n_energy) plan[i].transfer = true;
    }
    // Series slots fill from the non-boundary groups first: the boundary keeps
    // its full-width parallel window (its circulating current only moves
    // battery charge outside the series dwell), joining the series set only
    // when full demand requires every module.
    std::size_t slots = n_insert > 0 ? n_insert - 1 : 0;
    for (std::size_t i = 1; i < plan.size() && slots > 0; ++i) {
        if (has_boundary && i == n_energy) continue;
        plan[i].series = true;
        --slots;
    }
    if (slots > 0 && has_boundary) plan[n_energy].series = true;
    return plan;
}

namespace {

/// Per-period transfer index from the volt-second balance: pick md2 so the
/// period's net flux moves the circulating current a fraction k_track of the
/// way to its reference. With zero error this reduces to the open-loop index
/// relation. The flux is piecewise linear in md2 with both branch slopes
/// negative, so the solve is a monotone two-branch division.
double deadbeat_md(double v_j, double v_j1, double i_meas, double i_ref, double m0_mag,
                   bool series_allowed, double r_eq, double l_dm, double t_sw, double k_track) {
    const double dv = v_j - v_j1 - i_meas * r_eq; // parallel-interval drive at i_meas
    const double base_p = series_allowed ? 1.0 - m0_mag : 1.0;
    const double c_p = series_allowed ? 1.0 : 2.0;
    const double phi0 = base_p * dv; // flux per unit t_sw at md2 = 0
    const double phi_target = k_track * l_dm * (i_ref - i_meas) / t_sw;
    // slopes of phi(md2) on each branch, per unit t_sw; both negative
    const double slope_pos = -c_p * dv - 2.0 * (v_j1 + i_meas * r_eq);
    const double slope_neg = c_p * dv - 2.0 * (v_j - i_meas * r_eq);
    const double need = phi_target - phi0;
    double md = 0.0;
    if (need <= 0.0) {
        if (slope_pos < -1e-9) md = need / slope_pos;
    } else {
        if (slope_neg < -1e-9) md = need / slope_neg;
    }
    return md;
}

} // namespace

Controller::Controller(const StringConfig& cfg, ControlConfig ctl)
    : cfg_(&cfg), ctl_(std::move(ctl)) {
    state_.pi_c.resize(cfg.n_groups());
    state_.i_ref.assign(cfg.n_groups(), 0.0);
    state_.last_command.md2.assign(cfg.n_groups(), 0.0);
    series_allowed_.assign(cfg.n_groups(), false);
    while (n_energy_ < cfg.n_modules() &&
           cfg.modules[n_energy_].role == ModuleRole::Energy) {
        ++n_energy_;
    }
    for (const auto& m : cfg.modules) capability_ += m.battery.ocv(m.battery.soc_init);
    period_ = 1.0 / cfg.f_carrier;
    l_dm_.reserve(cfg.n_groups());
    for (std::size_t g = 0; g < cfg.n_groups(); ++g) {
        l_dm_.push_back(effective_inductances(cfg.inductors[g]).differential_mode);
    }
}

void Controller::update_references(const Measurements& m, double dt) {
    const std::size_t n_groups = cfg_->n_groups();
    const std::size_t n = cfg_->n_modules();
    if (ctl_.policy.mode == CircRefMode::EnergyCap) {
        if (n_energy_ == 0 || n_energy_ == n) {
            std::fill(state_.i_ref.begin(), state_.i_ref.end(), 0.0);
            return;
        }
        // the chain schedules against cycle-averaged module powers, not the
        // half-grid-cycle snapshots one carrier period sees
        if (state_.p_b_filt.size() != n) state_.p_b_filt.assign(n, 0.0);
        const double a = std::min(1.0, dt / std::max(ctl_.cap.power_tau, dt));
        for (std::size_t j = 0; j < n; ++j) {
            state_.p_b_filt[j] += (m.p_b_avg[j] - state_.p_b_filt[j]) * a;
        }
        const std::size_t n_power = n - n_energy_;
        double p_power_total = 0.0;
        for (std::size_t j = n_energy_; j < n; ++j) p_power_total += state_.p_b_filt[j];
        const double p_power_mean = p_power_total / static_cast<double>(n_power);
        double upstream = 0.0;
        for (std::size_t g = 0; g < n_groups; ++g) {
            double target;
            if (g < n_energy_) {
                upstream = g == 0 ? state_.p_b_filt[0] : upstream + state_.p_b_filt[g];
                target = static_cast<double>(g + 1) * ctl_.cap.p_energy_max;
            } else {
                if (g == n_energy_) upstream = state_.p_b_filt[g];
                else upstream += state_.p_b_filt[g];
                target = static_cast<double>(g + 1 - n_energy_) * p_power_mean;
            }
            state_.i_ref[g] += energy_cap_reference(upstream, target, ctl_.cap) * dt;
            state_.i_ref[g] =
                std::clamp(state_.i_ref[g], -ctl_.cap.i_ref_limit, ctl_.cap.i_ref_limit);
        }
        return;
    }
    double soc_avg = 0.0;
    for (double s : m.soc) soc_avg += s;
    soc_avg /= static_cast<double>(m.soc.size());
    const double omega = state_.last_command.omega;
    for (std::size_t g = 0; g < n_groups; ++g) {
        state_.i_ref[g] =
            circ_reference(ctl_.policy, soc_avg, m.soc[g + 1], m.i_load_avg, m.t, omega);
    }
}

ModulationCommand Controller::update(const Measurements& m, const References& refs, double dt) {
    const std::size_t n_groups = cfg_->n_groups();
    const std::size_t n = cfg_->n_modules();
    const double demand = std::min(refs.v_amplitude * ctl_.demand_margin, capability_);
    const auto plan = schedule_group_modes(*cfg_, demand);
    for (std::size_t g = 0; g < n_groups; ++g) series_allowed_[g] = plan[g + 1].series;
    parallel_disabled_.assign(n_groups, false);
    module0_resting_ = false;
    ++update_count_;

    // With no scheduled energy exchange, spare capacity rests a few modules at
    // a time. Which ones rest follows a discharge-credit ledger, so whichever
    // modules have delivered the most sit out next and every battery averages
    // the same share of the load without any circulating current.
    if (ctl_.policy.mode == CircRefMode::Zero && ctl_.rest_rotation_periods > 0) {
        std::size_t n_insert = 1;
        for (std::size_t g = 0; g < n_groups; ++g) {
            if (plan[g + 1].series) ++n_insert;
        }
        const std::size_t n_rest = n - std::min(n_insert, n);
        if (n_rest > 0) {
            if (rest_credit_.size() != n) rest_credit_.assign(n, 0.0);
            double mean = 0.0;
            for (std::size_t j = 0; j < n; ++j) mean += m.p_b_avg[j];
            mean /= static_cast<double>(n);
            // cumulative energy surplus; the max-credit selection bounds the
            // spread by one rotation slot's worth of energy
            for (std::size_t j = 0; j < n; ++j) {
                rest_credit_[j] += (m.p_b_avg[j] - mean) * dt;
            }
            if (update_count_ % ctl_.rest_rotation_periods == 0 || resting_.size() != n) {
                resting_.assign(n, false);
                for (std::size_t i = 0; i < n_rest; ++i) {
                    std::size_t pick = 0;
                    double best = -1e300;
                    for (std::size_t j = 0; j < n; ++j) {
                        if (!resting_[j] && rest_credit_[j] > best) {
                            best = rest_credit_[j];
                            pick = j;
                        }
                    }
                    resting_[pick] = true;
                }
            }
            module0_resting_ = resting_[0];
            for (std::size_t g = 0; g < n_groups; ++g) {
                series_allowed_[g] = !resting_[g + 1];
                parallel_disabled_[g] = resting_[g] || resting_[g + 1];
            }
        }
    }

    // Index feedforward over the scheduled participation; the PI trims the
    // residual tracking error with a bandwidth well below the filter
    // resonance.
    double v_participating =
        module0_resting_ ? 0.0 : cfg_->modules[0].battery.ocv(m.soc.empty() ? 0.5 : m.soc[0]);
    for (std::size_t g = 0; g < n_groups; ++g) {
        if (series_allowed_[g]) {
            v_participating += cfg_->modules[g + 1].battery.ocv(m.soc[g + 1]);
        }
    }
    double m0 = ctl_.ff_gain * refs.v_ref_ff / std::max(v_participating, 1.0);
    m0 += pi_update(ctl_.pi_voltage, state_.pi_v, refs.v_ref - m.v_out_avg, dt);
    m0 -= ctl_.active_damping * m.i_cap_avg;
    m0 = std::clamp(m0, ctl_.pi_voltage.out_min, ctl_.pi_voltage.out_max);
    const double m0_mag = std::abs(m0);

    update_references(m, dt);

    ModulationCommand cmd;
    cmd.m0 = m0;
    cmd.omega = 2.0 * std::numbers::pi * cfg_->f_carrier;
    cmd.md2.resize(n_groups);
    state_.command_saturated = false;
    for (std::size_t g = 0; g < n_groups; ++g) {
        if (parallel_disabled_[g]) {
            // no parallel window to balance against; leave the loop freewheeling
            cmd.md2[g] = 0.0;
            continue;
        }
        const double v_j = cfg_->modules[g].battery.ocv(m.soc[g]);
        const double v_j1 = cfg_->modules[g + 1].battery.ocv(m.soc[g + 1]);
        const double target = state_.i_ref[g];
        const double i_meas = g < m.i_circ_avg.size() ? m.i_circ_avg[g] : 0.0;
        // volt-second solve around the open-loop index, plus a slow PI trim;
        // the plant's md2-to-current gain is negative, hence the minus
        double md = deadbeat_md(v_j, v_j1, i_meas, target, m0_mag, series_allowed_[g],
                                cfg_->r_eq(g), l_dm_[g], period_, ctl_.deadbeat_gain);
        md -= pi_update(ctl_.pi_circ, state_.pi_c[g], target - i_meas, dt);
        const double limit = std::min(ctl_.md2_limit, std::max(0.0, 1.0 - m0_mag));
        if (std::abs(md) > limit) {
            md = std::clamp(md, -limit, limit);
            state_.command_saturated = true;
        }
        cmd.md2[g] = md;
    }
    state_.last_command = cmd;
    return cmd;
}

ModulationCommand control_step(Controller& ctrl, const Measurements& m, const References& refs,
                               double dt) {
    return ctrl.update(m, refs, dt);
}

} // namespace mrb
