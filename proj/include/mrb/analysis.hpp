#pragma once

#include "mrb/string_config.hpp"

#include <string>
#include <vector>

namespace mrb {

/// Area-product core sizing constants. k_t follows the cited convention;
/// inputs in H, A, T, K. The remaining factors have conventional defaults
/// since the source never fixes them.
struct CoreDesignParams {
    double k_t = 48200.0;
    double gamma = 0.0;   // ripple factor
    double b_max = 0.3;   // tesla
    double k_i = 1.0;
    double k_u = 0.4;
    double delta_t = 40.0; // kelvin
};

/// A_p = [k_t * L * I^2 * sqrt(1+gamma) / (b_max * k_i * sqrt(k_u * dT))]^(8/7).
/// Scales as I^(16/7).
[[nodiscard]] double core_area_product(double inductance, double i_peak,
                                       const CoreDesignParams& p);

/// Area-product ratio proposed/benchmark at rho = i_circ/i_out: the proposed
/// inductor magnetizes only i_circ while benchmarks carry i_out/2 + i_circ,
/// giving (rho / (0.5 + rho))^(16/7).
[[nodiscard]] double core_area_ratio(double rho);

/// Minimum differential-mode inductance limiting the peak magnetizing
/// circulating current: 2 * v_b_max * md2 / (delta_i_diff * f_sw).
[[nodiscard]] double min_diff_inductance(double v_b_max, double md2, double delta_i_diff,
                                         double f_sw);

/// CCM upper envelope of the magnetizing current:
/// i_circ_rated + 2 * v_bj1 * md2 / (l_eff_dm * f_sw).
[[nodiscard]] double magnetize_current_bound(double i_circ_rated, double v_bj1, double md2,
                                             double l_eff_dm, double f_sw);

/// Minimum filter inductance for a 15% output current ripple:
/// v_b * m0 / (0.15 * i_out_rated * n_modules * f_sw).
[[nodiscard]] double min_filter_inductance(double v_b, double m0, double i_out_rated,
                                           std::size_t n_modules, double f_sw);

/// Minimum output capacitance limiting ripple to delta_v:
/// v_out * duty / (r_out * delta_v * f_sw).
[[nodiscard]] double min_output_capacitance(double v_out, double duty, double r_out,
                                            double delta_v, double f_sw);

enum class Topology : std::uint8_t { Proposed, Benchmark };

struct OperatingPoint {
    double i_out = 10.0;  // amperes
    double i_circ = 2.0;  // amperes
    double m0 = 0.6;
    double md2 = 0.05;
    double v_b = 22.4;    // volts
    double r_ds = 1e-3;   // ohms
    double f_sw = 2000.0; // hertz
    SwitchTimings timings;
};

/// Which current expression a conduction term squares.
enum class BranchCurrent : std::uint8_t {
    PlusHalf,  // (i_out/2 + i_circ) / 2
    MinusHalf, // (i_out/2 - i_circ) / 2
    PlusFull,  // i_out/2 + i_circ
    MinusFull, // i_out/2 - i_circ
};

/// One conduction-loss term: weight * current^2 * (d0 + dm*m0 + dd*md2),
/// annotated with the switch designators it stands for so the transcription
/// stays auditable as data.
struct CondTerm {
    const char* switches;
    double weight;
    BranchCurrent current;
    double d0, dm, dd; // duty factor, affine in (m0, md2)
};

/// Term tables per group; index 0 is the outer bridge pair of the string ends.
[[nodiscard]] const std::vector<std::vector<CondTerm>>& conduction_terms(Topology topology);

struct LossBreakdown {
    Topology topology = Topology::Proposed;
    std::vector<double> group_conduction; // watts, index 0 = outer group
    double conduction_total = 0.0;
    double switching_total = 0.0;
    double total = 0.0;
};

/// Evaluates the per-group conduction term tables (factor 2*r_ds applied per
/// group) plus the switching loss at the operating point.
[[nodiscard]] LossBreakdown conduction_losses(const OperatingPoint& op, Topology topology);

/// 5 * v_b * i_out * f_sw * (t_ri + t_fi + t_rv + t_fv); the +-i_circ branch
/// terms cancel so the result is independent of i_circ.
[[nodiscard]] double switching_losses(const OperatingPoint& op);

struct LossSweepRow {
    double rho = 0.0;
    double p_proposed = 0.0;  // conduction, watts
    double p_benchmark = 0.0; // conduction, watts
    double core_ratio = 0.0;
};

/// Evaluates both topologies over a grid of rho = i_circ/i_out at fixed i_out.
[[nodiscard]] std::vector<LossSweepRow> loss_sweep(const OperatingPoint& op_base,
                                                   const std::vector<double>& rhos);

} // namespace mrb
