#include "mrb/engine.hpp"

#include "mrb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mrb {

namespace {
constexpr double kGridHz = 50.0;
constexpr double kBoundaryEps = 1e-12; // seconds
} // namespace

double ScenarioProgram::v_ref(double t) const {
    if (refs.empty()) return 0.0;
    const RefPoint* active = &refs.front();
    for (const auto& rp : refs) {
        if (rp.t <= t) active = &rp;
    }
    if (active->waveform == RefWaveform::Dc) return active->volts;
    return active->volts * std::sin(2.0 * std::numbers::pi * kGridHz * t);
}

double ScenarioProgram::v_amplitude(double t) const {
    if (refs.empty()) return 0.0;
    const RefPoint* active = &refs.front();
    for (const auto& rp : refs) {
        if (rp.t <= t) active = &rp;
    }
    return std::abs(active->volts);
}

LoadParams ScenarioProgram::load_at(double t) const {
    LoadParams lp;
    if (loads.empty()) return lp;
    const LoadPoint* active = &loads.front();
    for (const auto& p : loads) {
        if (p.t <= t) active = &p;
    }
    lp.r = active->r;
    lp.l = active->l;
    return lp;
}

std::vector<double> ScenarioProgram::breakpoints() const {
    std::vector<double> bp{0.0};
    for (const auto& rp : refs) {
        if (rp.t > 0.0 && rp.t < duration) bp.push_back(rp.t);
    }
    for (const auto& lp : loads) {
        if (lp.t > 0.0 && lp.t < duration) bp.push_back(lp.t);
    }
    bp.push_back(duration);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             bp.end());
    return bp;
}

std::vector<std::string> ScenarioProgram::check() const {
    std::vector<std::string> v;
    if (duration < 0.0) v.push_back("scenario.duration: must be >= 0");
    auto sorted_from_zero = [&v](const auto& pts, const char* what) {
        if (pts.empty()) {
            v.push_back(std::string("scenario.") + what + ": needs at least one entry");
            return;
        }
        if (pts.front().t != 0.0) {
            v.push_back(std::string("scenario.") + what + ": first entry must start at t=0");
        }
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (pts[i].t <= pts[i - 1].t) {
                v.push_back(std::string("scenario.") + what + ": entries must be time-sorted");
                break;
            }
        }
    };
    sorted_from_zero(refs, "v_ref");
    sorted_from_zero(loads, "load");
    return v;
}

double RunResult::energy_residual_rel() const {
    const double losses = ledger.e_battery_loss + ledger.e_path_loss + ledger.e_circ_loss +
                          ledger.e_load_loss;
    const double residual = ledger.e_chem_out - losses - (stored_final - stored_initial);
    const double throughput = std::max(ledger.e_chem_gross, 1e-9);
    return std::abs(residual) / throughput;
}

Simulator::Simulator(StringConfig cfg, ControlConfig ctl, SimParams params)
    : cfg_(std::move(cfg)), ctl_(std::move(ctl)), params_(params) {
    cfg_.validate();
    auto pv = params_.check(cfg_.f_carrier);
    if (!pv.empty()) throw ValidationError(std::move(pv));
}

namespace {

// One carrier slot with a fixed phase. Which string function (base insertion
// or an interconnection group) it currently modulates is given by the rotating
// slot map.
struct Track {
    double t_start = 0.0; // trough opening the current period
    double t_len = 0.0;
    std::size_t idx = 0;
    std::size_t func = 0; // 0 = base, 1 + g = interconnection group g
    // latched per-period command
    double m0 = 0.0;
    double md2 = 0.0;
    bool series_allowed = true;
    bool bypassed = false;
    double icirc_at_start = 0.0;
    bool flux_valid = false;
    std::vector<PeriodSegment> segs;
};

struct Pending {
    double m0_mag = 0.0;
    double bypass_floor = 0.0;
    int polarity = 1;
    std::vector<double> md2;
    std::vector<bool> series_allowed;
    std::vector<bool> parallel_disabled;
    bool module0_resting = false;
};

struct Accumulator {
    double elapsed = 0.0;
    double v_out = 0.0, i_out = 0.0, i_out_sq = 0.0, i_load = 0.0, i_cap = 0.0;
    double i_load_sq = 0.0, p_out = 0.0, v_err_sq = 0.0;
    std::vector<double> p_b, i_b, i_b_sq, v_b, icirc, i1_sq, i2_sq;
    double max_ic = 0.0;
    double max_flux_rel = 0.0;

    void reset(std::size_t n_modules, std::size_t n_groups) {
        elapsed = v_out = i_out = i_out_sq = i_load = i_cap = 0.0;
        i_load_sq = p_out = v_err_sq = 0.0;
        max_ic = max_flux_rel = 0.0;
        p_b.assign(n_modules, 0.0);
        v_b.assign(n_modules, 0.0);
        i_b.assign(n_modules, 0.0);
        i_b_sq.assign(n_modules, 0.0);
        icirc.assign(n_groups, 0.0);
        i1_sq.assign(n_groups, 0.0);
        i2_sq.assign(n_groups, 0.0);
    }
};

void rebuild_track(Track& tr, const Pending& pending) {
    if (tr.func == 0) {
        tr.m0 = pending.m0_mag;
        tr.md2 = 0.0;
        tr.bypassed = false;
        tr.segs = group_period_segments(tr.m0, 0.0, tr.t_start, tr.t_len, false);
    } else {
        const std::size_t group = tr.func - 1;
        tr.m0 = pending.m0_mag;
        tr.md2 = pending.md2[group];
        tr.series_allowed = pending.series_allowed[group];
        tr.bypassed = bypass_check(tr.m0, tr.md2) || tr.m0 < pending.bypass_floor;
        tr.segs = group_period_segments(tr.m0, tr.md2, tr.t_start, tr.t_len, tr.bypassed);
        if (!tr.series_allowed) {
            for (auto& s : tr.segs) {
                if (s.mode == GroupMode::Series) s.mode = GroupMode::Parallel;
            }
        }
        if (pending.parallel_disabled[group]) {
            for (auto& s : tr.segs) {
                if (s.mode == GroupMode::Parallel) s.mode = GroupMode::Bypass;
            }
        }
    }
    tr.idx = 0;
}

} // namespace

RunResult Simulator::run(const ScenarioProgram& program) {
    return run_impl(program, GatePolicy::Modulated, nullptr, {});
}

RunResult Simulator::run_fixed(const ScenarioProgram& program, const ModulationCommand& cmd,
                               std::vector<bool> series_allowed) {
    if (series_allowed.empty()) series_allowed.assign(cfg_.n_groups(), true);
    return run_impl(program, GatePolicy::FixedCommand, &cmd, series_allowed);
}

RunResult Simulator::run_force_parallel(double t_end) {
    ScenarioProgram prog;
    prog.duration = t_end;
    prog.refs = {{0.0, 0.0, RefWaveform::Dc}};
    prog.loads = {{0.0, cfg_.load.r, cfg_.load.l}};
    return run_impl(prog, GatePolicy::ForceParallel, nullptr, {});
}

RunResult Simulator::run_impl(const ScenarioProgram& program, GatePolicy policy,
                              const ModulationCommand* fixed_cmd,
                              const std::vector<bool>& fixed_series_allowed) {
    auto pv = program.check();
    if (!pv.empty()) throw ValidationError(std::move(pv));

    const std::size_t n_groups = cfg_.n_groups();
    const std::size_t n_modules = cfg_.n_modules();
    const double dt = params_.dt;
    const double period = 1.0 / cfg_.f_carrier;
    const auto total_steps = static_cast<long long>(std::llround(program.duration / dt));
    const std::size_t n_tracks = n_groups + 1;

    RunResult result;
    result.trace = SimTrace(n_modules, n_groups);

    StringConfig active = cfg_;
    active.load = program.load_at(0.0);
    SimState state = make_initial_state(active);
    result.stored_initial = stored_energy(state, active);

    // differential inductances and nominal voltages for the flux bookkeeping
    std::vector<double> l_dm(n_groups), v_nom(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        l_dm[g] = effective_inductances(cfg_.inductors[g]).differential_mode;
        v_nom[g] = cfg_.modules[g].battery.ocv(cfg_.modules[g].battery.soc_init);
    }

    Controller controller(cfg_, ctl_);
    Pending pending;
    pending.bypass_floor = policy == GatePolicy::Modulated ? ctl_.bypass_floor : 0.0;
    pending.md2.assign(n_groups, 0.0);
    pending.series_allowed.assign(n_groups, true);
    pending.parallel_disabled.assign(n_groups, false);

    Accumulator acc;
    acc.reset(n_modules, n_groups);
    double last_ctrl_t = 0.0;

    auto make_measurements = [&](double t_now) {
        Measurements m;
        m.t = t_now;
        m.soc.resize(n_modules);
        for (std::size_t j = 0; j < n_modules; ++j) m.soc[j] = state.batteries[j].soc;
        if (acc.elapsed > 0.0) {
            const double inv = 1.0 / acc.elapsed;
            m.v_out_avg = acc.v_out * inv;
            m.i_out_avg = acc.i_out * inv;
            m.i_cap_avg = acc.i_cap * inv;
            m.i_load_avg = acc.i_load * inv;
            m.i_circ_avg.resize(n_groups);
            m.p_b_avg.resize(n_modules);
            m.v_b_avg.resize(n_modules);
            for (std::size_t g = 0; g < n_groups; ++g) m.i_circ_avg[g] = acc.icirc[g] * inv;
            for (std::size_t j = 0; j < n_modules; ++j) {
                m.p_b_avg[j] = acc.p_b[j] * inv;
                m.v_b_avg[j] = acc.v_b[j] * inv;
            }
        } else {
            m.i_circ_avg.assign(n_groups, 0.0);
            m.p_b_avg.assign(n_modules, 0.0);
        }
        return m;
    };

    bool engagement_changed = false;
    auto controller_update = [&](double t_now) {
        const Measurements m = make_measurements(t_now);
        References refs;
        refs.v_ref = program.v_ref(std::max(0.0, t_now - 0.5 * period));
        refs.v_ref_ff = program.v_ref(t_now + 0.5 * period);
        refs.v_amplitude = program.v_amplitude(t_now);
        const ModulationCommand cmd = controller.update(m, refs, period);
        pending.m0_mag = std::abs(cmd.m0);
        pending.polarity = cmd.m0 < 0.0 ? -1 : 1;
        pending.md2 = cmd.md2;
        const auto& allowed = controller.series_allowed();
        const auto& pdis = controller.parallel_disabled();
        engagement_changed = pending.module0_resting != controller.module0_resting();
        for (std::size_t g = 0; g < n_groups; ++g) {
            if (pending.series_allowed[g] != allowed[g] ||
                pending.parallel_disabled[g] != pdis[g]) {
                engagement_changed = true;
            }
            pending.series_allowed[g] = allowed[g];
            pending.parallel_disabled[g] = pdis[g];
        }
        pending.module0_resting = controller.module0_resting();
    };

    auto flush_period_record = [&](double t_now) {
        PeriodRecord rec;
        rec.t0 = last_ctrl_t;
        rec.t1 = t_now;
        rec.v_ref_mid = program.v_ref(std::max(0.0, t_now - 0.5 * period));
        if (acc.elapsed > 0.0) {
            const double inv = 1.0 / acc.elapsed;
            rec.v_out_avg = acc.v_out * inv;
            rec.i_out_avg = acc.i_out * inv;
            rec.i_out_sq_avg = acc.i_out_sq * inv;
            rec.i_load_avg = acc.i_load * inv;
            rec.i_load_sq_avg = acc.i_load_sq * inv;
            rec.p_out_avg = acc.p_out * inv;
            rec.v_err_sq_avg = acc.v_err_sq * inv;
            rec.p_b_avg.resize(n_modules);
            rec.v_b_avg.resize(n_modules);
            rec.i_b_avg.resize(n_modules);
            rec.i_b_sq_avg.resize(n_modules);
            for (std::size_t j = 0; j < n_modules; ++j) {
                rec.p_b_avg[j] = acc.p_b[j] * inv;
                rec.v_b_avg[j] = acc.v_b[j] * inv;
                rec.i_b_avg[j] = acc.i_b[j] * inv;
                rec.i_b_sq_avg[j] = acc.i_b_sq[j] * inv;
            }
            rec.i_circ_avg.resize(n_groups);
            rec.i1_sq_avg.resize(n_groups);
            rec.i2_sq_avg.resize(n_groups);
            for (std::size_t g = 0; g < n_groups; ++g) {
                rec.i_circ_avg[g] = acc.icirc[g] * inv;
                rec.i1_sq_avg[g] = acc.i1_sq[g] * inv;
                rec.i2_sq_avg[g] = acc.i2_sq[g] * inv;
            }
        }
        rec.soc.resize(n_modules);
        for (std::size_t j = 0; j < n_modules; ++j) rec.soc[j] = state.batteries[j].soc;
        rec.max_abs_icirc = acc.max_ic;
        rec.max_flux_residual_rel = acc.max_flux_rel;
        result.periods.push_back(std::move(rec));
        acc.reset(n_modules, n_groups);
        last_ctrl_t = t_now;
    };

    // carrier tracks (unused for ForceParallel)
    std::vector<Track> tracks(n_tracks);
    int polarity = 1;
    if (policy != GatePolicy::ForceParallel) {
        if (policy == GatePolicy::FixedCommand) {
            pending.m0_mag = std::abs(fixed_cmd->m0);
            pending.polarity = fixed_cmd->m0 < 0.0 ? -1 : 1;
            pending.md2 = fixed_cmd->md2;
            for (std::size_t g = 0; g < n_groups; ++g) {
                pending.series_allowed[g] = fixed_series_allowed[g];
            }
        } else {
            controller_update(0.0);
        }
        polarity = pending.polarity;
        for (std::size_t k = 0; k < n_tracks; ++k) {
            tracks[k].t_start =
                -static_cast<double>(k) / static_cast<double>(n_tracks) * period;
            tracks[k].t_len = period;
            tracks[k].func = k;
            rebuild_track(tracks[k], pending);
        }
    }

    const int rotation_periods =
        policy == GatePolicy::Modulated ? ctl_.carrier_rotation_periods : 0;
    const std::vector<double> bps = program.breakpoints();
    std::size_t bp_idx = 0;
    StepLedger phase_ledger_start;
    double phase_stored_start = result.stored_initial;
    double phase_t_start = 0.0;

    GateInstant gates;
    gates.modes.assign(n_groups, GroupMode::Parallel);
    if (policy == GatePolicy::ForceParallel) {
        gates.string_connected = false;
        gates.polarity = 1;
    }

    std::vector<double> i_b_mid(n_modules);
    long long next_ctrl_step = 0;
    long ctrl_count = 0;
    std::size_t rotation = 0;
    long rotation_count = 1;
    long long next_rotation_step = rotation_periods > 0
        ? static_cast<long long>(std::llround(
              static_cast<double>(rotation_periods) * period / dt))
        : -1;

    for (long long step_idx = 0; step_idx < total_steps; ++step_idx) {
        const double t0 = static_cast<double>(step_idx) * dt;
        const double t1 = static_cast<double>(step_idx + 1) * dt;

        if (policy != GatePolicy::ForceParallel && step_idx == next_ctrl_step) {
            if (policy == GatePolicy::Modulated && step_idx > 0) {
                controller_update(t0); // reads the accumulator the flush consumes
                flush_period_record(t0);
                auto& rec = result.periods.back();
                rec.m0_cmd = pending.polarity > 0 ? pending.m0_mag : -pending.m0_mag;
                rec.md2_cmd = pending.md2;
                rec.i_ref_cmd = controller.state().i_ref;
            } else if (step_idx > 0) {
                flush_period_record(t0);
            }
            // an engagement change applies to every track at once; staggered
            // per-trough latching would mix old and new gear for a period
            if (engagement_changed) {
                engagement_changed = false;
                for (auto& tr : tracks) {
                    rebuild_track(tr, pending);
                    while (t0 >= tr.segs[tr.idx].t_end - kBoundaryEps &&
                           tr.idx + 1 < tr.segs.size()) {
                        ++tr.idx;
                    }
                }
                if (pending.module0_resting) gates.module0_resting = true;
            }
            ++ctrl_count;
            next_ctrl_step = static_cast<long long>(
                std::llround(static_cast<double>(ctrl_count) * period / dt));
        }

        // rotate the slot map so every function samples every carrier phase
        if (rotation_periods > 0 && step_idx == next_rotation_step) {
            rotation = (rotation + 1) % n_tracks;
            for (std::size_t k = 0; k < n_tracks; ++k) {
                Track& tr = tracks[k];
                tr.func = (k + n_tracks - rotation) % n_tracks;
                tr.flux_valid = false;
                rebuild_track(tr, pending);
                while (t0 >= tr.segs[tr.idx].t_end - kBoundaryEps &&
                       tr.idx + 1 < tr.segs.size()) {
                    ++tr.idx;
                }
            }
            ++rotation_count;
            next_rotation_step = static_cast<long long>(std::llround(
                static_cast<double>(rotation_count) *
                static_cast<double>(rotation_periods) * period / dt));
        }

        // load schedule
        if (!program.loads.empty()) {
            active.load = program.load_at(t0);
        }

        double t_cur = t0;
        while (t_cur < t1 - kBoundaryEps) {
            double t_next = t1;
            if (policy != GatePolicy::ForceParallel) {
                for (std::size_t k = 0; k < n_tracks; ++k) {
                    Track& tr = tracks[k];
                    while (t_cur >= tr.segs[tr.idx].t_end - kBoundaryEps) {
                        ++tr.idx;
                        if (tr.idx >= tr.segs.size()) {
                            if (tr.func != 0) {
                                const std::size_t g = tr.func - 1;
                                if (tr.flux_valid) {
                                    const double res =
                                        l_dm[g] * (state.i_circ[g] - tr.icirc_at_start);
                                    const double rel = std::abs(res) / (v_nom[g] * period);
                                    acc.max_flux_rel = std::max(acc.max_flux_rel, rel);
                                }
                                tr.icirc_at_start = state.i_circ[g];
                                tr.flux_valid = true;
                            }
                            tr.t_start += tr.t_len;
                            tr.t_len = period;
                            rebuild_track(tr, pending);
                            if (tr.func == 0) {
                                polarity = pending.polarity;
                                gates.module0_resting = pending.module0_resting;
                            }
                        }
                    }
                    const Track& ft = tr;
                    const GroupMode mode = ft.segs[ft.idx].mode;
                    if (ft.func == 0) {
                        gates.string_connected = mode == GroupMode::Series;
                    } else {
                        gates.modes[ft.func - 1] = mode;
                    }
                    t_next = std::min(t_next, ft.segs[ft.idx].t_end);
                }
                gates.polarity = polarity;
            }
            const double h = t_next - t_cur;
            if (h <= 0.0) break;
            state = step(state, active, gates, h, &result.ledger, &i_b_mid);

            // measurement integrals
            acc.elapsed += h;
            acc.v_out += state.v_cout * h;
            acc.i_out += state.i_filter * h;
            acc.i_out_sq += state.i_filter * state.i_filter * h;
            acc.i_load += state.i_load * h;
            acc.i_load_sq += state.i_load * state.i_load * h;
            acc.i_cap += (state.i_filter - state.i_load) * h;
            acc.p_out += state.v_cout * state.i_filter * h;
            {
                const double verr = program.v_ref(t_next) - state.v_cout;
                acc.v_err_sq += verr * verr * h;
            }
            for (std::size_t j = 0; j < n_modules; ++j) {
                acc.i_b[j] += i_b_mid[j] * h;
                acc.i_b_sq[j] += i_b_mid[j] * i_b_mid[j] * h;
                acc.p_b[j] += -state.batteries[j].v_terminal * i_b_mid[j] * h;
                acc.v_b[j] += state.batteries[j].v_terminal * h;
            }
            for (std::size_t g = 0; g < n_groups; ++g) {
                acc.icirc[g] += state.i_circ[g] * h;
                const auto br = split_branch_currents(state.i_filter, state.i_circ[g], cfg_.alpha);
                acc.i1_sq[g] += br.i1 * br.i1 * h;
                acc.i2_sq[g] += br.i2 * br.i2 * h;
                const double a = std::abs(state.i_circ[g]);
                if (a > acc.max_ic) acc.max_ic = a;
                if (a > result.max_abs_icirc) result.max_abs_icirc = a;
            }
            t_cur = t_next;
        }

        // guards; an abort keeps the partial results
        if (!std::isfinite(state.i_filter) || !std::isfinite(state.v_cout) ||
            !std::isfinite(state.i_load)) {
            result.error = "non-finite state at t=" + std::to_string(t1);
            break;
        }
        for (std::size_t g = 0; g < n_groups; ++g) {
            if (std::abs(state.i_circ[g]) > params_.trip_current) {
                result.error = "trip limit: |i_circ| of group " + std::to_string(g + 1) +
                               " exceeded " + std::to_string(params_.trip_current) +
                               " A at t=" + std::to_string(t1);
                break;
            }
        }
        if (!result.error.empty()) break;

        // phase boundary bookkeeping
        if (bp_idx + 1 < bps.size() &&
            t1 >= bps[bp_idx + 1] - kBoundaryEps) {
            PhaseEnergy pe;
            pe.t0 = phase_t_start;
            pe.t1 = t1;
            pe.ledger.e_chem_out = result.ledger.e_chem_out - phase_ledger_start.e_chem_out;
            pe.ledger.e_chem_gross = result.ledger.e_chem_gross - phase_ledger_start.e_chem_gross;
            pe.ledger.e_battery_loss =
                result.ledger.e_battery_loss - phase_ledger_start.e_battery_loss;
            pe.ledger.e_path_loss = result.ledger.e_path_loss - phase_ledger_start.e_path_loss;
            pe.ledger.e_circ_loss = result.ledger.e_circ_loss - phase_ledger_start.e_circ_loss;
            pe.ledger.e_load_loss = result.ledger.e_load_loss - phase_ledger_start.e_load_loss;
            pe.stored_start = phase_stored_start;
            pe.stored_end = stored_energy(state, active);
            result.phases.push_back(pe);
            phase_ledger_start = result.ledger;
            phase_stored_start = pe.stored_end;
            phase_t_start = t1;
            ++bp_idx;
        }

        if ((step_idx + 1) % static_cast<long long>(params_.record_decimation) == 0) {
            std::vector<double> row;
            row.reserve(result.trace.n_cols());
            row.push_back(t1);
            row.push_back(program.v_ref(t1));
            row.push_back(state.v_cout);
            row.push_back(state.i_filter);
            row.push_back(state.i_load);
            row.push_back(state.v_cout * state.i_filter);
            for (std::size_t j = 0; j < n_modules; ++j) {
                const auto& b = state.batteries[j];
                row.push_back(b.i_b);
                row.push_back(b.v_terminal);
                row.push_back(-b.v_terminal * b.i_b);
                row.push_back(b.soc);
            }
            for (std::size_t g = 0; g < n_groups; ++g) {
                const auto br = split_branch_currents(state.i_filter, state.i_circ[g], cfg_.alpha);
                row.push_back(state.i_circ[g]);
                row.push_back(br.i1);
                row.push_back(br.i2);
                row.push_back(static_cast<double>(gates.modes[g]));
            }
            result.trace.append_row(row);
        }
    }

    if (policy != GatePolicy::ForceParallel || total_steps > 0) {
        flush_period_record(static_cast<double>(total_steps) * dt);
    }
    result.stored_final = stored_energy(state, active);
    result.final_state = state;
    return result;
}

} // namespace mrb
