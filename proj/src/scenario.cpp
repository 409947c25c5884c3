#include "mrb/scenario.hpp"

#include "mrb/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace mrb {

using nlohmann::json;

const char* tool_version() { return "mrbsim 1.0.0"; }

ScenarioProgram Scenario::program(double time_scale) const {
    ScenarioProgram p;
    p.duration = duration * time_scale;
    p.refs = refs;
    p.loads = loads;
    for (auto& r : p.refs) r.t *= time_scale;
    for (auto& l : p.loads) l.t *= time_scale;
    return p;
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SummaryMetrics compute_metrics(const RunResult& result, const ScenarioProgram& program,
                               double tail_fraction) {
    SummaryMetrics sm;
    sm.duration = program.duration;
    sm.max_abs_icirc = result.max_abs_icirc;
    sm.energy_residual_rel = result.energy_residual_rel();

    if (!result.final_state.batteries.empty()) {
        double lo = 1.0, hi = 0.0;
        for (const auto& b : result.final_state.batteries) {
            lo = std::min(lo, b.soc);
            hi = std::max(hi, b.soc);
        }
        sm.soc_spread_final = hi - lo;
    }

    const auto bps = program.breakpoints();
    if (bps.size() < 2 || result.periods.empty()) return sm;

    const std::size_t n_modules =
        result.periods.front().p_b_avg.empty() ? 0 : result.periods.front().p_b_avg.size();
    const std::size_t n_groups = result.periods.front().i_circ_avg.size();

    for (std::size_t ph = 0; ph + 1 < bps.size(); ++ph) {
        PhaseMetrics pm;
        pm.t0 = bps[ph];
        pm.t1 = bps[ph + 1];
        const double tail_start = pm.t1 - tail_fraction * (pm.t1 - pm.t0);
        pm.module_power.assign(n_modules, 0.0);
        pm.module_current.assign(n_modules, 0.0);
        pm.module_rms_current.assign(n_modules, 0.0);
        pm.module_power_full.assign(n_modules, 0.0);
        pm.group_icirc_avg.assign(n_groups, 0.0);
        double w_tail = 0.0, w_full = 0.0, err_sq = 0.0, amp_sq = 0.0, p_out = 0.0;
        std::vector<double> i_sq(n_modules, 0.0);
        for (const auto& rec : result.periods) {
            const double mid = 0.5 * (rec.t0 + rec.t1);
            if (mid < pm.t0 || mid >= pm.t1) continue;
            const double w = rec.t1 - rec.t0;
            w_full += w;
            for (std::size_t j = 0; j < n_modules; ++j) {
                pm.module_power_full[j] += rec.p_b_avg[j] * w;
            }
            pm.max_abs_icirc = std::max(pm.max_abs_icirc, rec.max_abs_icirc);
            if (mid < tail_start) continue;
            w_tail += w;
            for (std::size_t j = 0; j < n_modules; ++j) {
                pm.module_power[j] += rec.p_b_avg[j] * w;
                pm.module_current[j] += rec.i_b_avg[j] * w;
                i_sq[j] += rec.i_b_sq_avg[j] * w;
            }
            for (std::size_t g = 0; g < n_groups; ++g) {
                pm.group_icirc_avg[g] += rec.i_circ_avg[g] * w;
            }
            p_out += rec.p_out_avg * w;
            err_sq += rec.v_err_sq_avg * w;
            const double amp = program.v_amplitude(mid);
            amp_sq += amp * amp * w;
            pm.max_flux_residual_rel = std::max(pm.max_flux_residual_rel,
                                                rec.max_flux_residual_rel);
        }
        if (w_full > 0.0) {
            for (auto& p : pm.module_power_full) p /= w_full;
        }
        if (w_tail > 0.0) {
            for (std::size_t j = 0; j < n_modules; ++j) {
                pm.module_power[j] /= w_tail;
                pm.module_current[j] /= w_tail;
                pm.module_rms_current[j] = std::sqrt(i_sq[j] / w_tail);
            }
            for (auto& g : pm.group_icirc_avg) g /= w_tail;
            pm.output_power = p_out / w_tail;
            if (amp_sq > 0.0) {
                pm.v_track_rms_err = std::sqrt(err_sq / w_tail) / std::sqrt(amp_sq / w_tail);
            }
        }
        if (ph < result.phases.size()) {
            const auto& pe = result.phases[ph];
            if (pe.ledger.e_chem_out > 1e-12) {
                pm.efficiency = pe.ledger.e_load_loss / pe.ledger.e_chem_out;
            }
        }
        sm.phases.push_back(std::move(pm));
    }
    return sm;
}

AssertionOutcome evaluate_assertions(const std::vector<MetricCheck>& checks,
                                     const SummaryMetrics& metrics) {
    AssertionOutcome out;
    for (const auto& c : checks) {
        double value = 0.0;
        bool known = true;
        const PhaseMetrics* pm = nullptr;
        if (c.phase >= 0 && static_cast<std::size_t>(c.phase) < metrics.phases.size()) {
            pm = &metrics.phases[static_cast<std::size_t>(c.phase)];
        }
        const std::size_t j = c.module > 0 ? static_cast<std::size_t>(c.module - 1) : 0;
        if (c.metric == "soc_spread_final") {
            value = metrics.soc_spread_final;
        } else if (c.metric == "max_icirc_run") {
            value = metrics.max_abs_icirc;
        } else if (pm == nullptr) {
            known = false;
        } else if (c.metric == "module_power") {
            value = j < pm->module_power.size() ? pm->module_power[j] : 0.0;
        } else if (c.metric == "module_current") {
            value = j < pm->module_current.size() ? pm->module_current[j] : 0.0;
        } else if (c.metric == "module_current_mag") {
            value = j < pm->module_current.size() ? std::abs(pm->module_current[j]) : 0.0;
        } else if (c.metric == "module_rms_current") {
            value = j < pm->module_rms_current.size() ? pm->module_rms_current[j] : 0.0;
        } else if (c.metric == "output_power") {
            value = pm->output_power;
        } else if (c.metric == "efficiency") {
            value = pm->efficiency;
        } else if (c.metric == "max_icirc") {
            value = pm->max_abs_icirc;
        } else if (c.metric == "v_track_err") {
            value = pm->v_track_rms_err;
        } else {
            known = false;
        }
        if (!known) {
            out.passed = false;
            out.failures.push_back("unknown metric or phase: " + c.metric);
            continue;
        }
        if (value < c.min || value > c.max) {
            std::ostringstream os;
            os << c.metric;
            if (c.module > 0) os << "[module " << c.module << "]";
            os << " phase " << c.phase << " = " << value << " outside [" << c.min << ", "
               << c.max << "]";
            out.passed = false;
            out.failures.push_back(os.str());
        }
    }
    return out;
}

namespace {
std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}
} // namespace

std::string RunManifest::to_json() const {
    json j;
    j["config_path"] = config_path;
    j["config_hash_fnv1a64"] = config_hash;
    j["tool_version"] = tool_version;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

ScenarioOutcome run_scenario(const LoadedConfig& lc, double time_scale) {
    ScenarioOutcome out;
    out.manifest.config_path = lc.path;
    out.manifest.config_hash = fnv1a64_hex(lc.raw);
    out.manifest.tool_version = tool_version();
    out.manifest.started_at = iso_now();

    StringConfig cfg = lc.string_cfg;
    if (!lc.scenario.initial_soc.empty()) {
        for (std::size_t j = 0; j < cfg.modules.size() && j < lc.scenario.initial_soc.size();
             ++j) {
            cfg.modules[j].battery.soc_init = lc.scenario.initial_soc[j];
        }
    }
    if (!lc.scenario.loads.empty()) {
        cfg.load.r = lc.scenario.loads.front().r;
        cfg.load.l = lc.scenario.loads.front().l;
    }

    Simulator sim(cfg, lc.control_cfg, lc.sim);
    const ScenarioProgram program = lc.scenario.program(time_scale);
    out.result = sim.run(program);
    out.metrics = compute_metrics(out.result, program, lc.scenario.tail_fraction);
    out.manifest.finished_at = iso_now();
    return out;
}

std::string metrics_to_json(const SummaryMetrics& m) {
    json j;
    j["duration_s"] = m.duration;
    j["max_abs_icirc_a"] = m.max_abs_icirc;
    j["energy_residual_rel"] = m.energy_residual_rel;
    j["soc_spread_final"] = m.soc_spread_final;
    j["phases"] = json::array();
    for (const auto& p : m.phases) {
        json pj;
        pj["t0"] = p.t0;
        pj["t1"] = p.t1;
        pj["module_power_w"] = p.module_power;
        pj["module_power_full_w"] = p.module_power_full;
        pj["module_current_a"] = p.module_current;
        pj["module_rms_current_a"] = p.module_rms_current;
        pj["group_icirc_avg_a"] = p.group_icirc_avg;
        pj["output_power_w"] = p.output_power;
        pj["efficiency"] = p.efficiency;
        pj["max_abs_icirc_a"] = p.max_abs_icirc;
        pj["v_track_rms_err"] = p.v_track_rms_err;
        pj["max_flux_residual_rel"] = p.max_flux_residual_rel;
        j["phases"].push_back(pj);
    }
    return j.dump(2) + "\n";
}

} // namespace mrb
