#include "mrb/reports.hpp"

#include "mrb/coupled_inductor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mrb {

DesignReport design_report(const StringConfig& cfg, const RippleSpec& spec) {
    DesignReport r;
    double v_b_max = 0.0;
    for (const auto& m : cfg.modules) {
        v_b_max = std::max(v_b_max, m.battery.ocv(1.0));
    }
    const auto eff = effective_inductances(cfg.inductors.front());
    r.l_eff_cm = eff.common_mode;
    r.l_eff_dm = eff.differential_mode;
    r.l_dm_required = min_diff_inductance(v_b_max, spec.md2, spec.delta_i_diff, cfg.f_carrier);
    r.i_magnetize_bound = magnetize_current_bound(spec.i_circ_rated, v_b_max, spec.md2,
                                                  r.l_eff_dm, cfg.f_carrier);
    r.area_product = core_area_product(r.l_eff_dm, spec.i_circ_rated, CoreDesignParams{});
    r.l_filter_required = min_filter_inductance(v_b_max, spec.duty, cfg.rated_output_current,
                                                cfg.n_modules(), cfg.f_carrier);
    r.c_out_required = min_output_capacitance(spec.v_out, spec.duty, cfg.load.r,
                                              spec.delta_v_frac * spec.v_out, cfg.f_carrier);
    r.l_dm_ok = r.l_eff_dm >= r.l_dm_required;
    r.l_filter_ok = cfg.filter.l_filter >= r.l_filter_required;
    r.c_out_ok = cfg.filter.c_out >= r.c_out_required;

    std::ostringstream os;
    os << "component sizing report\n";
    os << "  coupled inductor: L_eff,CM = " << r.l_eff_cm * 1e6 << " uH, L_eff,DM = "
       << r.l_eff_dm * 1e6 << " uH\n";
    os << "  minimum differential inductance (md2=" << spec.md2 << ", di=" << spec.delta_i_diff
       << " A, f=" << cfg.f_carrier << " Hz): " << r.l_dm_required * 1e6 << " uH ["
       << (r.l_dm_ok ? "pass" : "FAIL") << "]\n";
    os << "  magnetizing current bound: " << r.i_magnetize_bound << " A\n";
    os << "  core area product at " << spec.i_circ_rated << " A: " << r.area_product << "\n";
    os << "  minimum filter inductance: " << r.l_filter_required * 1e3 << " mH vs configured "
       << cfg.filter.l_filter * 1e3 << " mH [" << (r.l_filter_ok ? "pass" : "FAIL") << "]\n";
    os << "  minimum output capacitance: " << r.c_out_required * 1e6 << " uF vs configured "
       << cfg.filter.c_out * 1e6 << " uF [" << (r.c_out_ok ? "pass" : "FAIL") << "]\n";
    r.text = os.str();
    return r;
}

std::vector<double> rho_grid(double rho_min, double rho_max, std::size_t points) {
    std::vector<double> rhos;
    rhos.reserve(points);
    if (points == 0) return rhos;
    const double step = (rho_max - rho_min) / static_cast<double>(points);
    for (std::size_t i = 1; i <= points; ++i) {
        rhos.push_back(rho_min + step * static_cast<double>(i));
    }
    return rhos;
}

CompareReport compare_report(const OperatingPoint& base, const std::vector<double>& rhos) {
    CompareReport rep;
    rep.rows = loss_sweep(base, rhos);
    rep.ordering_ok = !rep.rows.empty();
    std::ostringstream csv, txt;
    csv << "rho,p_conduction_proposed_w,p_conduction_benchmark_w,core_area_ratio\n";
    txt << "conduction-loss and core-size comparison (i_out = " << base.i_out << " A, m0 = "
        << base.m0 << ", md2 = " << base.md2 << ", r_ds = " << base.r_ds << " ohm)\n";
    txt << "  rho      P_proposed   P_benchmark  core_ratio\n";
    for (const auto& row : rep.rows) {
        if (!(row.p_proposed < row.p_benchmark)) rep.ordering_ok = false;
        csv << row.rho << ',' << row.p_proposed << ',' << row.p_benchmark << ','
            << row.core_ratio << '\n';
        char line[128];
        std::snprintf(line, sizeof line, "  %-8.3f %-12.5f %-12.5f %-10.5f\n", row.rho,
                      row.p_proposed, row.p_benchmark, row.core_ratio);
        txt << line;
    }
    if (!rep.rows.empty()) rep.core_ratio_at_max = rep.rows.back().core_ratio;
    txt << "  verdict: proposed " << (rep.ordering_ok ? "<" : "NOT <")
        << " benchmark on every row; core ratio at rho=" << (rep.rows.empty() ? 0.0 : rep.rows.back().rho)
        << " is " << rep.core_ratio_at_max << "\n";
    rep.text = txt.str();
    rep.csv = csv.str();
    return rep;
}

} // namespace mrb
