#include "mrb/errors.hpp"
#include "mrb/scenario.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace mrb {

using nlohmann::json;

namespace {

PIGains parse_pi(const json& j, const PIGains& defaults) {
    PIGains g = defaults;
    g.kp = j.value("kp", g.kp);
    g.ki = j.value("ki", g.ki);
    g.out_min = j.value("min", g.out_min);
    g.out_max = j.value("max", g.out_max);
    return g;
}

BatteryModel parse_battery(const json& j) {
    BatteryModel b;
    b.capacity_ah = j.value("capacity_ah", b.capacity_ah);
    b.r_internal = j.value("r_internal", b.r_internal);
    b.soc_init = j.value("soc_init", b.soc_init);
    if (j.contains("ocv_points")) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : j.at("ocv_points")) {
            pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        b.ocv = OcvCurve(std::move(pts));
    }
    return b;
}

RefWaveform parse_waveform(const std::string& s) {
    if (s == "sin50") return RefWaveform::Sin50;
    if (s == "dc") return RefWaveform::Dc;
    throw ParseError("scenario.v_ref.waveform: expected \"sin50\" or \"dc\", got \"" + s + "\"");
}

CircRefMode parse_policy_mode(const std::string& s) {
    if (s == "zero") return CircRefMode::Zero;
    if (s == "soc_balance") return CircRefMode::SocBalance;
    if (s == "soc_plus_load") return CircRefMode::SocPlusLoad;
    if (s == "energy_cap") return CircRefMode::EnergyCap;
    throw ParseError("control.policy.mode: unknown mode \"" + s + "\"");
}

} // namespace

LoadedConfig parse_config(const std::string& text, const std::string& path) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ParseError(path + ": empty configuration file");
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }

    LoadedConfig lc;
    lc.raw = text;
    lc.path = path;
    try {
        if (j.contains("modules")) {
            lc.string_cfg.modules.clear();
            for (const auto& mj : j.at("modules")) {
                ModuleConfig mc;
                mc.battery = parse_battery(mj);
                const std::string role = mj.value("role", std::string("energy"));
                if (role != "energy" && role != "power") {
                    throw ParseError("modules[].role: expected \"energy\" or \"power\"");
                }
                mc.role = role == "energy" ? ModuleRole::Energy : ModuleRole::Power;
                lc.string_cfg.modules.push_back(std::move(mc));
            }
            lc.string_cfg.inductors.clear();
            if (lc.string_cfg.modules.size() > 1) {
                lc.string_cfg.inductors.resize(lc.string_cfg.modules.size() - 1);
            }
        } else {
            lc.string_cfg = default_string_config();
        }
        if (j.contains("inductors")) {
            lc.string_cfg.inductors.clear();
            for (const auto& ij : j.at("inductors")) {
                CoupledInductorParams p;
                p.l1 = ij.value("l1", p.l1);
                p.l2 = ij.value("l2", p.l2);
                p.m12 = ij.value("m12", p.m12);
                p.m21 = ij.value("m21", p.m21);
                p.delta_l = ij.value("delta_l", p.delta_l);
                p.delta_r = ij.value("delta_r", p.delta_r);
                p.esr = ij.value("esr", p.esr);
                lc.string_cfg.inductors.push_back(p);
            }
        }
        if (j.contains("string")) {
            const auto& sj = j.at("string");
            auto& c = lc.string_cfg;
            c.alpha = sj.value("alpha", c.alpha);
            c.r_ds_on = sj.value("r_ds_on", c.r_ds_on);
            c.f_carrier = sj.value("f_carrier", c.f_carrier);
            c.rated_output_current = sj.value("rated_output_current", c.rated_output_current);
            if (sj.contains("switch_timings")) {
                const auto& tj = sj.at("switch_timings");
                c.switch_timings.t_ri = tj.value("t_ri", c.switch_timings.t_ri);
                c.switch_timings.t_fi = tj.value("t_fi", c.switch_timings.t_fi);
                c.switch_timings.t_rv = tj.value("t_rv", c.switch_timings.t_rv);
                c.switch_timings.t_fv = tj.value("t_fv", c.switch_timings.t_fv);
            }
            if (sj.contains("filter")) {
                const auto& fj = sj.at("filter");
                c.filter.l_filter = fj.value("l_filter", c.filter.l_filter);
                c.filter.c_out = fj.value("c_out", c.filter.c_out);
            }
        }
        if (j.contains("control")) {
            const auto& cj = j.at("control");
            auto& ctl = lc.control_cfg;
            if (cj.contains("pi_voltage")) ctl.pi_voltage = parse_pi(cj.at("pi_voltage"), ctl.pi_voltage);
            if (cj.contains("pi_circ")) ctl.pi_circ = parse_pi(cj.at("pi_circ"), ctl.pi_circ);
            ctl.ff_gain = cj.value("ff_gain", ctl.ff_gain);
            ctl.deadbeat_gain = cj.value("deadbeat_gain", ctl.deadbeat_gain);
            ctl.active_damping = cj.value("active_damping", ctl.active_damping);
            ctl.md2_limit = cj.value("md2_limit", ctl.md2_limit);
            ctl.carrier_rotation_periods = cj.value("carrier_rotation_periods", ctl.carrier_rotation_periods);
            ctl.rest_rotation_periods = cj.value("rest_rotation_periods", ctl.rest_rotation_periods);
            ctl.bypass_floor = cj.value("bypass_floor", ctl.bypass_floor);
            ctl.demand_margin = cj.value("demand_margin", ctl.demand_margin);
            if (cj.contains("policy")) {
                const auto& pj = cj.at("policy");
                ctl.policy.mode = parse_policy_mode(pj.value("mode", std::string("zero")));
                ctl.policy.k_soc = pj.value("k_soc", ctl.policy.k_soc);
                ctl.policy.k_load = pj.value("k_load", ctl.policy.k_load);
                ctl.policy.alternating = pj.value("alternating", ctl.policy.alternating);
            }
            if (cj.contains("energy_cap")) {
                const auto& ej = cj.at("energy_cap");
                ctl.cap.p_energy_max = ej.value("p_energy_max", ctl.cap.p_energy_max);
                ctl.cap.gain = ej.value("gain", ctl.cap.gain);
                ctl.cap.i_ref_limit = ej.value("i_ref_limit", ctl.cap.i_ref_limit);
                ctl.cap.power_tau = ej.value("power_tau", ctl.cap.power_tau);
            }
        }
        if (j.contains("sim")) {
            const auto& sj = j.at("sim");
            lc.sim.dt = sj.value("dt", lc.sim.dt);
            lc.sim.trip_current = sj.value("trip_current", lc.sim.trip_current);
            lc.sim.record_decimation = sj.value("record_decimation", lc.sim.record_decimation);
        }
        if (j.contains("scenario")) {
            const auto& sj = j.at("scenario");
            auto& sc = lc.scenario;
            sc.name = sj.value("name", std::string("unnamed"));
            sc.duration = sj.value("duration", 0.0);
            sc.tail_fraction = sj.value("tail_fraction", 0.4);
            if (sj.contains("initial_soc")) {
                sc.initial_soc = sj.at("initial_soc").get<std::vector<double>>();
            }
            if (sj.contains("v_ref")) {
                for (const auto& rj : sj.at("v_ref")) {
                    RefPoint rp;
                    rp.t = rj.value("t", 0.0);
                    rp.volts = rj.value("volts", 0.0);
                    rp.waveform = parse_waveform(rj.value("waveform", std::string("sin50")));
                    sc.refs.push_back(rp);
                }
            }
            if (sj.contains("load")) {
                for (const auto& lj : sj.at("load")) {
                    LoadPoint lp;
                    lp.t = lj.value("t", 0.0);
                    lp.r = lj.value("r", 6.0);
                    lp.l = lj.value("l", 100e-6);
                    sc.loads.push_back(lp);
                }
            }
            if (sj.contains("assertions")) {
                for (const auto& aj : sj.at("assertions")) {
                    MetricCheck mc;
                    mc.metric = aj.value("metric", std::string());
                    mc.module = aj.value("module", -1);
                    mc.phase = aj.value("phase", 0);
                    mc.min = aj.value("min", -1e300);
                    mc.max = aj.value("max", 1e300);
                    sc.assertions.push_back(std::move(mc));
                }
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (lc.scenario.refs.empty()) lc.scenario.refs.push_back({0.0, 0.0, RefWaveform::Dc});
    if (lc.scenario.loads.empty()) {
        lc.scenario.loads.push_back({0.0, lc.string_cfg.load.r, lc.string_cfg.load.l});
    }

    // collect every violated invariant with its field path
    std::vector<std::string> violations = lc.string_cfg.check();
    auto sv = lc.sim.check(lc.string_cfg.f_carrier);
    violations.insert(violations.end(), sv.begin(), sv.end());
    auto pv = lc.scenario.program().check();
    violations.insert(violations.end(), pv.begin(), pv.end());
    if (!lc.scenario.initial_soc.empty()) {
        if (lc.scenario.initial_soc.size() != lc.string_cfg.modules.size()) {
            violations.push_back("scenario.initial_soc: size must match module count");
        }
        for (double s : lc.scenario.initial_soc) {
            if (s < 0.0 || s > 1.0) {
                violations.push_back("scenario.initial_soc: entries must be in [0,1]");
                break;
            }
        }
    }
    if (!(lc.scenario.tail_fraction > 0.0 && lc.scenario.tail_fraction <= 1.0)) {
        violations.push_back("scenario.tail_fraction: must be in (0,1]");
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return lc;
}

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace mrb
