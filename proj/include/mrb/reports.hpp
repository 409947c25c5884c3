#pragma once

#include "mrb/analysis.hpp"
#include "mrb/string_config.hpp"

#include <string>
#include <vector>

namespace mrb {

/// Ripple/duty targets the sizing report evaluates the configuration against.
struct RippleSpec {
    double md2 = 0.05;
    double delta_i_diff = 1.0;  // amperes of allowed magnetizing ripple
    double i_circ_rated = 10.0; // amperes
    double duty = 0.5;          // output duty for the filter/capacitor relations
    double delta_v_frac = 0.01; // output voltage ripple bound
    double v_out = 70.0;        // volts, operating output for the capacitor rule
};

struct DesignReport {
    double l_eff_cm = 0.0;
    double l_eff_dm = 0.0;
    double l_dm_required = 0.0;
    double i_magnetize_bound = 0.0;
    double area_product = 0.0;
    double l_filter_required = 0.0;
    double c_out_required = 0.0;
    bool l_dm_ok = false;
    bool l_filter_ok = false;
    bool c_out_ok = false;
    std::string text;
};

[[nodiscard]] DesignReport design_report(const StringConfig& cfg, const RippleSpec& spec);

struct CompareReport {
    std::vector<LossSweepRow> rows;
    bool ordering_ok = false;      // proposed below benchmark on every row
    double core_ratio_at_max = 0.0;
    std::string text;
    std::string csv;
};

[[nodiscard]] CompareReport compare_report(const OperatingPoint& base,
                                           const std::vector<double>& rhos);

/// Evenly spaced grid over (rho_min, rho_max], inclusive of the endpoint.
[[nodiscard]] std::vector<double> rho_grid(double rho_min, double rho_max, std::size_t points);

} // namespace mrb
