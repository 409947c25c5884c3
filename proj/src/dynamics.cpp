#include "mrb/dynamics.hpp"

#include "mrb/errors.hpp"

#include <cmath>

namespace mrb {

std::vector<std::string> SimParams::check(double f_carrier) const {
    std::vector<std::string> v;
    if (!(dt > 0.0)) v.push_back("sim.dt: must be > 0");
    if (f_carrier > 0.0 && dt > 1.0 / (20.0 * f_carrier) * (1.0 + 1e-12)) {
        v.push_back("sim.dt: must be <= 1/(20*f_carrier)");
    }
    if (t_end < 0.0) v.push_back("sim.t_end: must be >= 0");
    if (!(trip_current > 0.0)) v.push_back("sim.trip_current: must be > 0");
    if (record_decimation == 0) v.push_back("sim.record_decimation: must be >= 1");
    return v;
}

SimState make_initial_state(const StringConfig& cfg) {
    SimState s;
    s.i_circ.assign(cfg.n_groups(), 0.0);
    s.batteries.reserve(cfg.n_modules());
    for (const auto& m : cfg.modules) {
        s.batteries.push_back(make_battery_state(m.battery, m.battery.soc_init));
    }
    return s;
}

double dicirc_dt(GroupMode mode, double v_bj, double v_bj1, double i_circ, double l_eff_dm,
                 double r_eq) {
    switch (mode) {
    case GroupMode::Series:
        return 0.0; // quasi-static: the common-mode inductance cancels
    case GroupMode::Parallel:
        return (v_bj - v_bj1 - i_circ * r_eq) / l_eff_dm;
    case GroupMode::Buck:
        // md2 > 0 interval: the inductor discharges against module j+1 so the
        // period balance lands on the open-loop modulation index.
        return (-v_bj1 - i_circ * r_eq) / l_eff_dm;
    case GroupMode::Boost:
        // md2 < 0 interval: module j magnetizes the differential inductance.
        return (v_bj - i_circ * r_eq) / l_eff_dm;
    case GroupMode::Bypass:
        return -i_circ * r_eq / l_eff_dm;
    }
    return 0.0;
}

double steady_state_icirc(double v_bj, double v_bj1, const CircSSParams& p, double delta_soc) {
    return (v_bj - v_bj1 + p.k_dynamic * delta_soc) / (p.r_eq + p.z_dyn);
}

double flux_balance_residual(double v_bj, double v_bj1, double i_circ, double t_p, double t_b,
                             double k_r, double k_b) {
    return (v_bj - v_bj1 - i_circ * k_r) * t_p + (-v_bj1 - i_circ * k_b) * t_b;
}

namespace {

struct Clusters {
    std::vector<int> id;           // per module, -1 = detached
    std::vector<double> weight;    // per module, load share within its cluster
    std::vector<int> size;         // per cluster
};

Clusters build_clusters(const GateInstant& gates, std::size_t n_modules, double alpha) {
    Clusters c;
    c.id.assign(n_modules, -1);
    c.weight.assign(n_modules, 0.0);
    if (!gates.string_connected) return c;
    int next = 0;
    // carry: cluster reachable through the contiguous run of closed parallel
    // links, hopping over bypassed (resting) modules
    int carry = -1;
    if (!gates.module0_resting) {
        c.id[0] = next++;
        carry = c.id[0];
    }
    for (std::size_t j = 1; j < n_modules; ++j) {
        switch (gates.modes[j - 1]) {
        case GroupMode::Series:
            c.id[j] = next++;
            carry = c.id[j];
            break;
        case GroupMode::Parallel:
        case GroupMode::Buck:
        case GroupMode::Boost:
            c.id[j] = carry;
            break;
        case GroupMode::Bypass:
            c.id[j] = -1;
            carry = -1; // an open link breaks the parallel bus
            break;
        }
    }
    c.size.assign(static_cast<std::size_t>(next), 0);
    for (std::size_t j = 0; j < n_modules; ++j) {
        if (c.id[j] >= 0) ++c.size[static_cast<std::size_t>(c.id[j])];
    }
    std::vector<bool> seen(static_cast<std::size_t>(next), false);
    for (std::size_t j = 0; j < n_modules; ++j) {
        if (c.id[j] < 0) continue;
        const auto cl = static_cast<std::size_t>(c.id[j]);
        if (c.size[cl] == 2) {
            c.weight[j] = seen[cl] ? 1.0 - alpha : alpha;
        } else {
            c.weight[j] = 1.0 / static_cast<double>(c.size[cl]);
        }
        seen[cl] = true;
    }
    return c;
}

} // namespace

std::vector<double> allocate_battery_currents(const GateInstant& gates, double i_out,
                                              const std::vector<double>& i_circ, double alpha) {
    const std::size_t n_modules = gates.modes.size() + 1;
    if (i_circ.size() != gates.modes.size()) {
        throw InconsistentTopology(
            "allocate_battery_currents: circulating currents must match group count");
    }
    const Clusters cl = build_clusters(gates, n_modules, alpha);
    std::vector<double> i_b(n_modules, 0.0);
    const double i_s = static_cast<double>(gates.polarity) * i_out;
    for (std::size_t j = 0; j < n_modules; ++j) {
        if (cl.id[j] >= 0) i_b[j] = -i_s * cl.weight[j];
    }
    for (std::size_t g = 0; g < gates.modes.size(); ++g) {
        switch (gates.modes[g]) {
        case GroupMode::Parallel:
            i_b[g] -= i_circ[g];
            i_b[g + 1] += i_circ[g];
            break;
        case GroupMode::Buck:
            i_b[g + 1] += i_circ[g]; // conduction loop through module j+1 only
            break;
        case GroupMode::Boost:
            i_b[g] -= i_circ[g]; // conduction loop through module j only
            break;
        case GroupMode::Series: // circulating component stays in the winding pair
        case GroupMode::Bypass:
            break;
        }
    }
    return i_b;
}

double stored_energy(const SimState& state, const StringConfig& cfg) {
    double l_cm_total = 0.0;
    double e_circ = 0.0;
    for (std::size_t g = 0; g < cfg.n_groups(); ++g) {
        const auto eff = effective_inductances(cfg.inductors[g]);
        l_cm_total += eff.common_mode;
        e_circ += 0.5 * eff.differential_mode * state.i_circ[g] * state.i_circ[g];
    }
    const double l_path = cfg.filter.l_filter + l_cm_total;
    return e_circ + 0.5 * l_path * state.i_filter * state.i_filter +
           0.5 * cfg.filter.c_out * state.v_cout * state.v_cout +
           0.5 * cfg.load.l * state.i_load * state.i_load;
}

SimState step(const SimState& state, const StringConfig& cfg, const GateInstant& gates, double dt,
              StepLedger* ledger, std::vector<double>* i_b_out) {
    const std::size_t n_groups = cfg.n_groups();
    const std::size_t n_modules = cfg.n_modules();
    if (gates.modes.size() != n_groups || state.i_circ.size() != n_groups ||
        state.batteries.size() != n_modules) {
        throw InconsistentTopology("step: state/gate sizes do not match the configuration");
    }

    SimState next = state;
    const double i_out = state.i_filter;
    const std::vector<double> i_b =
        allocate_battery_currents(gates, i_out, state.i_circ, cfg.alpha);

    // Contribution of each group's own circulating current to its adjacent
    // batteries; removed when forming the drive so the resistive term stays
    // fully implicit.
    std::vector<double> ocv(n_modules);
    for (std::size_t j = 0; j < n_modules; ++j) {
        ocv[j] = cfg.modules[j].battery.ocv(state.batteries[j].soc);
    }

    // Circulating currents, one semi-implicit update per group.
    double l_cm_total = 0.0;
    for (std::size_t g = 0; g < n_groups; ++g) {
        const auto eff = effective_inductances(cfg.inductors[g]);
        l_cm_total += eff.common_mode;
        const double l = eff.differential_mode;
        const double r_eq = cfg.r_eq(g);
        const double r_j = cfg.modules[g].battery.r_internal;
        const double r_j1 = cfg.modules[g + 1].battery.r_internal;
        const double ic = state.i_circ[g];

        double own_j = 0.0, own_j1 = 0.0; // own-group terms inside i_b
        double drive0 = 0.0;              // drive at zero circulating current
        double r_implicit = 0.0;
        double r_booked = 0.0; // dissipation booked to the differential path
        switch (gates.modes[g]) {
        case GroupMode::Series:
            break;
        case GroupMode::Parallel: {
            own_j = -ic;
            own_j1 = ic;
            const double vj = ocv[g] + (i_b[g] - own_j) * r_j;
            const double vj1 = ocv[g + 1] + (i_b[g + 1] - own_j1) * r_j1;
            drive0 = vj - vj1;
            r_implicit = r_eq;
            r_booked = cfg.r_circ_path(g);
            break;
        }
        case GroupMode::Buck: {
            own_j1 = ic;
            const double vj1 = ocv[g + 1] + (i_b[g + 1] - own_j1) * r_j1;
            drive0 = -vj1;
            r_implicit = r_eq;
            r_booked = cfg.r_circ_path(g) + r_j;
            break;
        }
        case GroupMode::Boost: {
            own_j = -ic;
            const double vj = ocv[g] + (i_b[g] - own_j) * r_j;
            drive0 = vj;
            r_implicit = r_eq;
            r_booked = cfg.r_circ_path(g) + r_j1;
            break;
        }
        case GroupMode::Bypass:
            drive0 = 0.0;
            r_implicit = r_eq;
            r_booked = r_eq;
            break;
        }
        if (gates.modes[g] == GroupMode::Series) {
            next.i_circ[g] = ic;
        } else {
            next.i_circ[g] = (ic + dt * drive0 / l) / (1.0 + dt * r_implicit / l);
        }
        if (ledger) {
            const double i_sq = 0.5 * (ic * ic + next.i_circ[g] * next.i_circ[g]);
            ledger->e_circ_loss += i_sq * r_booked * dt;
        }
    }

    // String source voltage: weighted terminal voltages of each inserted
    // cluster, with the load-share resistive drop folded into an effective
    // series resistance.
    const Clusters cl = build_clusters(gates, n_modules, cfg.alpha);
    double v_src0 = 0.0;
    double r_batt_eff = 0.0;
    for (std::size_t j = 0; j < n_modules; ++j) {
        if (cl.id[j] < 0) continue;
        const double c_j = i_b[j] + static_cast<double>(gates.polarity) * i_out * cl.weight[j];
        v_src0 += cl.weight[j] * (ocv[j] + c_j * cfg.modules[j].battery.r_internal);
        r_batt_eff += cl.weight[j] * cl.weight[j] * cfg.modules[j].battery.r_internal;
    }
    v_src0 *= static_cast<double>(gates.polarity);

    double r_path = static_cast<double>(n_modules) * 2.0 * cfg.r_ds_on;
    for (std::size_t g = 0; g < n_groups; ++g) r_path += 0.5 * cfg.inductors[g].esr;

    const double l_path = cfg.filter.l_filter + l_cm_total;
    const double r_filter_total = r_path + (gates.string_connected ? r_batt_eff : 0.0);
    const double v_drive = gates.string_connected ? v_src0 : 0.0;

    next.i_filter = (state.i_filter + dt * (v_drive - state.v_cout) / l_path) /
                    (1.0 + dt * r_filter_total / l_path);
    next.v_cout = state.v_cout + dt * (next.i_filter - state.i_load) / cfg.filter.c_out;
    next.i_load = (state.i_load + dt * next.v_cout / cfg.load.l) /
                  (1.0 + dt * cfg.load.r / cfg.load.l);

    // Integrate the batteries with midpoint currents so the energy ledger
    // closes to second order against the filter-side integrals.
    std::vector<double> ic_mid(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        ic_mid[g] = 0.5 * (state.i_circ[g] + next.i_circ[g]);
    }
    const double i_out_mid = 0.5 * (state.i_filter + next.i_filter);
    const std::vector<double> i_b_mid =
        allocate_battery_currents(gates, i_out_mid, ic_mid, cfg.alpha);

    for (std::size_t j = 0; j < n_modules; ++j) {
        next.batteries[j] = battery_step(state.batteries[j], cfg.modules[j].battery, i_b_mid[j], dt);
    }
    next.t = state.t + dt;

    if (ledger) {
        for (std::size_t j = 0; j < n_modules; ++j) {
            ledger->e_chem_out += -ocv[j] * i_b_mid[j] * dt;
            ledger->e_chem_gross += std::abs(ocv[j] * i_b_mid[j]) * dt;
            ledger->e_battery_loss +=
                i_b_mid[j] * i_b_mid[j] * cfg.modules[j].battery.r_internal * dt;
        }
        const double if_sq = 0.5 * (state.i_filter * state.i_filter + next.i_filter * next.i_filter);
        ledger->e_path_loss += if_sq * r_path * dt;
        const double il_sq = 0.5 * (state.i_load * state.i_load + next.i_load * next.i_load);
        ledger->e_load_loss += il_sq * cfg.load.r * dt;
    }
    if (i_b_out) *i_b_out = i_b_mid;
    return next;
}

} // namespace mrb
