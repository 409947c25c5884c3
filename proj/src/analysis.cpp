#include "mrb/analysis.hpp"

#include <cmath>

namespace mrb {

double core_area_product(double inductance, double i_peak, const CoreDesignParams& p) {
    const double inner = p.k_t * inductance * i_peak * i_peak * std::sqrt(1.0 + p.gamma) /
                         (p.b_max * p.k_i * std::sqrt(p.k_u * p.delta_t));
    return std::pow(inner, 8.0 / 7.0);
}

double core_area_ratio(double rho) {
    return std::pow(rho / (0.5 + rho), 16.0 / 7.0);
}

double min_diff_inductance(double v_b_max, double md2, double delta_i_diff, double f_sw) {
    return 2.0 * v_b_max * md2 / (delta_i_diff * f_sw);
}

double magnetize_current_bound(double i_circ_rated, double v_bj1, double md2, double l_eff_dm,
                               double f_sw) {
    return i_circ_rated + 2.0 * v_bj1 * md2 / (l_eff_dm * f_sw);
}

double min_filter_inductance(double v_b, double m0, double i_out_rated, std::size_t n_modules,
                             double f_sw) {
    return v_b * m0 / (0.15 * i_out_rated * static_cast<double>(n_modules) * f_sw);
}

double min_output_capacitance(double v_out, double duty, double r_out, double delta_v,
                              double f_sw) {
    return v_out * duty / (r_out * delta_v * f_sw);
}

namespace {

// Duty factors as (d0, dm, dd) meaning d0 + dm*m0 + dd*md2.
constexpr double P = 1.0; // readability anchors for the tables below

const std::vector<std::vector<CondTerm>>& proposed_terms() {
    using BC = BranchCurrent;
    static const std::vector<std::vector<CondTerm>> tables = {
        // Group 0: outer bridges of modules 1 and 5, doubled for the negative
        // half cycle of the modulation index.
        {
            {"S11+S12", 2.0, BC::PlusHalf, P, -1.0, -1.0},
            {"S55+S56", 2.0, BC::MinusHalf, P, -1.0, -1.0},
        },
        // Group 1
        {
            {"S17+S18", 2.0, BC::PlusHalf, 0.0, 1.0, -1.0},
            {"S21+S22", 2.0, BC::MinusHalf, 0.0, 1.0, 1.0},
            {"S15", 1.0, BC::PlusFull, P, -1.0, -1.0},
            {"S18", 1.0, BC::PlusFull, P, -1.0, -1.0},
            {"S22", 1.0, BC::MinusFull, P, -1.0, -1.0},
            {"S23", 1.0, BC::MinusFull, P, -1.0, -1.0},
        },
        // Group 2
        {
            {"S25", 1.0, BC::PlusFull, P, -1.0, 1.0},
            {"S28", 1.0, BC::PlusFull, P, -1.0, 1.0},
            {"S33", 1.0, BC::MinusFull, P, -1.0, 1.0},
            {"S32", 1.0, BC::MinusFull, P, -1.0, -1.0},
            {"S34", 1.0, BC::MinusFull, 0.0, 0.0, 2.0},
        },
        // Group 3
        {
            {"S35", 1.0, BC::PlusFull, P, -1.0, -1.0},
            {"S38", 1.0, BC::PlusFull, P, -1.0, -1.0},
            {"S42", 1.0, BC::MinusFull, P, -1.0, -1.0},
            {"S43", 1.0, BC::MinusFull, P, -1.0, -1.0},
        },
        // Group 4
        {
            {"S45", 1.0, BC::PlusFull, P, -1.0, -1.0},
            {"S48", 1.0, BC::PlusFull, P, -1.0, -1.0},
            {"S52", 1.0, BC::MinusFull, P, -1.0, -1.0},
            {"S53", 1.0, BC::MinusFull, P, -1.0, -1.0},
        },
    };
    return tables;
}

const std::vector<std::vector<CondTerm>>& benchmark_terms() {
    using BC = BranchCurrent;
    static const std::vector<std::vector<CondTerm>> tables = {
        // Group 0
        {
            {"S11+S12", 2.0, BC::MinusFull, P, 0.0, -2.0},
            {"S55..S58", 2.0, BC::PlusFull, P, 0.0, -2.0},
        },
        // Groups 1-4 share one table; the benchmark keeps every group active,
        // including a continuously conducting switch per group.
        {
            {"S18", 1.0, BC::PlusFull, P, 0.0, 0.0},
            {"S22", 1.0, BC::MinusFull, P, 0.0, -2.0},
            {"S15", 1.0, BC::PlusFull, P, -1.0, 1.0},
            {"S23", 1.0, BC::MinusFull, P, -1.0, 1.0},
            {"S21+S17", 2.0, BC::PlusFull, 0.0, 1.0, -1.0},
            {"S24", 2.0, BC::MinusFull, 0.0, 0.0, 2.0},
        },
    };
    static const std::vector<std::vector<CondTerm>> expanded = {
        tables[0], tables[1], tables[1], tables[1], tables[1]};
    return expanded;
}

double branch_current(BranchCurrent which, double i_out, double i_circ) {
    const double plus = 0.5 * i_out + i_circ;
    const double minus = 0.5 * i_out - i_circ;
    switch (which) {
    case BranchCurrent::PlusHalf: return 0.5 * plus;
    case BranchCurrent::MinusHalf: return 0.5 * minus;
    case BranchCurrent::PlusFull: return plus;
    case BranchCurrent::MinusFull: return minus;
    }
    return 0.0;
}

} // namespace

const std::vector<std::vector<CondTerm>>& conduction_terms(Topology topology) {
    return topology == Topology::Proposed ? proposed_terms() : benchmark_terms();
}

LossBreakdown conduction_losses(const OperatingPoint& op, Topology topology) {
    LossBreakdown lb;
    lb.topology = topology;
    const auto& tables = conduction_terms(topology);
    lb.group_conduction.reserve(tables.size());
    for (const auto& group : tables) {
        double sum = 0.0;
        for (const auto& term : group) {
            const double i = branch_current(term.current, op.i_out, op.i_circ);
            const double duty = term.d0 + term.dm * op.m0 + term.dd * op.md2;
            sum += term.weight * i * i * duty;
        }
        lb.group_conduction.push_back(2.0 * op.r_ds * sum);
    }
    for (double p : lb.group_conduction) lb.conduction_total += p;
    lb.switching_total = switching_losses(op);
    lb.total = lb.conduction_total + lb.switching_total;
    return lb;
}

double switching_losses(const OperatingPoint& op) {
    // 5 v_b (2(i_out/2 - i_circ) + 2(i_out/2 + i_circ)) (f/2) sum(t); the
    // circulating terms cancel algebraically.
    return 5.0 * op.v_b * 2.0 * op.i_out * (op.f_sw / 2.0) * op.timings.total();
}

std::vector<LossSweepRow> loss_sweep(const OperatingPoint& op_base,
                                     const std::vector<double>& rhos) {
    std::vector<LossSweepRow> rows;
    rows.reserve(rhos.size());
    for (double rho : rhos) {
        OperatingPoint op = op_base;
        op.i_circ = rho * op.i_out;
        LossSweepRow row;
        row.rho = rho;
        row.p_proposed = conduction_losses(op, Topology::Proposed).conduction_total;
        row.p_benchmark = conduction_losses(op, Topology::Benchmark).conduction_total;
        row.core_ratio = core_area_ratio(rho);
        rows.push_back(row);
    }
    return rows;
}

} // namespace mrb
