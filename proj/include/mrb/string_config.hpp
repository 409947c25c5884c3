#pragma once

#include "mrb/battery.hpp"
#include "mrb/coupled_inductor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mrb {

/// Operating state of one interconnection group (an adjacent module pair,
/// its coupled inductor and the two facing full bridges).
enum class GroupMode : std::uint8_t { Series, Parallel, Buck, Boost, Bypass };

[[nodiscard]] const char* to_string(GroupMode m);

enum class ModuleRole : std::uint8_t { Energy, Power };

struct SwitchTimings {
    double t_ri = 20e-9; // seconds
    double t_fi = 20e-9;
    double t_rv = 20e-9;
    double t_fv = 20e-9;

    [[nodiscard]] double total() const { return t_ri + t_fi + t_rv + t_fv; }
};

struct FilterParams {
    double l_filter = 0.5e-3; // henries
    double c_out = 600e-6;    // farads
};

struct LoadParams {
    double r = 6.0;    // ohms
    double l = 100e-6; // henries
};

struct ModuleConfig {
    BatteryModel battery;
    ModuleRole role = ModuleRole::Energy;
};

/// Full electrical description of the string. Interconnection group g couples
/// modules g and g+1 (0-based); there is always one inductor per adjacent pair.
struct StringConfig {
    std::vector<ModuleConfig> modules;
    std::vector<CoupledInductorParams> inductors;
    double alpha = 0.5;      // current-sharing ratio between the two inductor branches
    double r_ds_on = 1e-3;   // ohms
    SwitchTimings switch_timings;
    double f_carrier = 2000.0; // hertz
    LoadParams load;
    FilterParams filter;
    double rated_output_current = 50.0; // amperes

    [[nodiscard]] std::size_t n_modules() const { return modules.size(); }
    [[nodiscard]] std::size_t n_groups() const { return inductors.size(); }

    /// Differential-loop external resistance: 4 r_DS(on) plus winding ESR.
    /// Battery internal resistances enter through the terminal voltages.
    [[nodiscard]] double r_circ_path(std::size_t group) const;

    /// R_eq of the steady-state relation: 4 r_DS(on) + r_b(j) + r_b(j+1) + ESR.
    [[nodiscard]] double r_eq(std::size_t group) const;

    /// Throws ValidationError listing every violated invariant.
    void validate() const;
    [[nodiscard]] std::vector<std::string> check() const;
};

/// Default five-module string per the reference parameter set: two energy
/// modules at 22.7 V, three power modules at 22.4 V, 25 uH coupled inductors.
[[nodiscard]] StringConfig default_string_config();

struct BranchCurrents {
    double i1 = 0.0; // alpha*i_out + i_circ
    double i2 = 0.0; // alpha*i_out - i_circ
};

/// Splits the through current of a group across the two coupled-inductor
/// branches. Total function; with alpha = 0.5 the branches sum to i_out exactly.
[[nodiscard]] BranchCurrents split_branch_currents(double i_out, double i_circ, double alpha);

/// Sum of s_i * v_bi over the string. s_i = 1 only for modules contributing a
/// series voltage step; parallel/buck/boost/bypassed modules contribute 0.
[[nodiscard]] double string_output_voltage(const std::vector<int>& series_flags,
                                           const std::vector<double>& v_b);

} // namespace mrb
