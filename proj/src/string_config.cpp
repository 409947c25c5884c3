#include "mrb/string_config.hpp"

#include "mrb/errors.hpp"

#include <cmath>

namespace mrb {

const char* to_string(GroupMode m) {
    switch (m) {
    case GroupMode::Series: return "series";
    case GroupMode::Parallel: return "parallel";
    case GroupMode::Buck: return "buck";
    case GroupMode::Boost: return "boost";
    case GroupMode::Bypass: return "bypass";
    }
    return "?";
}

double StringConfig::r_circ_path(std::size_t group) const {
    return 4.0 * r_ds_on + inductors.at(group).esr;
}

double StringConfig::r_eq(std::size_t group) const {
    return r_circ_path(group) + modules.at(group).battery.r_internal +
           modules.at(group + 1).battery.r_internal;
}

std::vector<std::string> StringConfig::check() const {
    std::vector<std::string> v;
    if (modules.empty()) v.push_back("modules: at least one module required");
    if (inductors.size() + 1 != modules.size()) {
        v.push_back("inductors: count must equal number of modules - 1 (got " +
                    std::to_string(inductors.size()) + " for " + std::to_string(modules.size()) +
                    " modules)");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) v.push_back("alpha: must be in (0,1)");
    if (!(r_ds_on > 0.0)) v.push_back("r_ds_on: must be > 0");
    if (!(f_carrier > 0.0)) v.push_back("f_carrier: must be > 0");
    if (!(load.r > 0.0)) v.push_back("load.r: must be > 0");
    if (!(load.l > 0.0)) v.push_back("load.l: must be > 0");
    if (!(filter.l_filter > 0.0)) v.push_back("filter.l_filter: must be > 0");
    if (!(filter.c_out > 0.0)) v.push_back("filter.c_out: must be > 0");
    if (!(rated_output_current > 0.0)) v.push_back("rated_output_current: must be > 0");
    if (switch_timings.t_ri < 0.0 || switch_timings.t_fi < 0.0 || switch_timings.t_rv < 0.0 ||
        switch_timings.t_fv < 0.0) {
        v.push_back("switch_timings: all must be >= 0");
    }
    for (std::size_t i = 0; i < modules.size(); ++i) {
        auto mv = modules[i].battery.check("modules[" + std::to_string(i) + "]");
        v.insert(v.end(), mv.begin(), mv.end());
    }
    for (std::size_t i = 0; i < inductors.size(); ++i) {
        auto iv = inductors[i].check("inductors[" + std::to_string(i) + "]");
        v.insert(v.end(), iv.begin(), iv.end());
    }
    // A contiguous prefix of energy modules, power modules after it.
    bool seen_power = false;
    for (std::size_t i = 0; i < modules.size(); ++i) {
        if (modules[i].role == ModuleRole::Power) {
            seen_power = true;
        } else if (seen_power) {
            v.push_back("modules[" + std::to_string(i) +
                        "].role: energy modules must form a contiguous prefix");
            break;
        }
    }
    return v;
}

void StringConfig::validate() const {
    auto v = check();
    if (!v.empty()) throw ValidationError(std::move(v));
}

StringConfig default_string_config() {
    StringConfig cfg;
    cfg.modules.resize(5);
    // ocv(0.76) = 22.7 V, ocv(0.52) = 22.4 V with the default curve.
    for (std::size_t i = 0; i < 5; ++i) {
        cfg.modules[i].battery.soc_init = i < 2 ? 0.76 : 0.52;
        cfg.modules[i].role = i < 2 ? ModuleRole::Energy : ModuleRole::Power;
    }
    cfg.inductors.resize(4);
    return cfg;
}

BranchCurrents split_branch_currents(double i_out, double i_circ, double alpha) {
    return {alpha * i_out + i_circ, alpha * i_out - i_circ};
}

double string_output_voltage(const std::vector<int>& series_flags,
                             const std::vector<double>& v_b) {
    if (series_flags.size() != v_b.size()) {
        throw LengthMismatch("string_output_voltage: flags and voltages differ in length");
    }
    double v = 0.0;
    for (std::size_t i = 0; i < v_b.size(); ++i) {
        if (series_flags[i] != 0) v += v_b[i];
    }
    return v;
}

} // namespace mrb
