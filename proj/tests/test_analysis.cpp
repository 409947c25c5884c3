#include "mrb/analysis.hpp"
#include "mrb/reports.hpp"

#include <doctest.h>

#include <cmath>

using namespace mrb;

TEST_CASE("core area product") {
    CoreDesignParams p; // gamma 0, b_max 0.3 T, k_i 1, k_u 0.4, dT 40 K
    SUBCASE("reference evaluation") {
        const double ap = core_area_product(100e-6, 5.0, p);
        CHECK(ap == doctest::Approx(193.95).epsilon(1e-3));
    }
    SUBCASE("zero current gives zero") { CHECK(core_area_product(100e-6, 0.0, p) == 0.0); }
    SUBCASE("doubling the current scales by 2^(16/7)") {
        const double a1 = core_area_product(100e-6, 5.0, p);
        const double a2 = core_area_product(100e-6, 10.0, p);
        CHECK(a2 / a1 == doctest::Approx(std::pow(2.0, 16.0 / 7.0)).epsilon(1e-9));
    }
}

TEST_CASE("core area ratio") {
    CHECK(core_area_ratio(0.5) == doctest::Approx(0.2052).epsilon(1e-3));
    CHECK(core_area_ratio(0.5) < 0.21);
    CHECK(core_area_ratio(0.1) == doctest::Approx(0.0167).epsilon(2e-2));
    CHECK(core_area_ratio(1e9) == doctest::Approx(1.0).epsilon(1e-6));
    // monotone increasing
    double prev = 0.0;
    for (int i = 1; i <= 50; ++i) {
        const double r = core_area_ratio(0.01 * i);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("minimum differential inductance") {
    CHECK(min_diff_inductance(23.0, 0.05, 1.0, 10e3) == doctest::Approx(230e-6).epsilon(1e-3));
    CHECK(min_diff_inductance(23.0, 0.0, 1.0, 10e3) == 0.0);
    CHECK(min_diff_inductance(23.0, 0.10, 1.0, 10e3) == doctest::Approx(460e-6).epsilon(1e-3));
}

TEST_CASE("magnetizing current bound") {
    CHECK(magnetize_current_bound(10.0, 22.4, 0.05, 100e-6, 10e3) ==
          doctest::Approx(12.24).epsilon(1e-6));
    CHECK(magnetize_current_bound(10.0, 22.4, 0.0, 100e-6, 10e3) == 10.0);
    CHECK(magnetize_current_bound(0.0, 23.0, 0.05, 230e-6, 10e3) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("minimum filter inductance") {
    CHECK(min_filter_inductance(22.0, 0.5, 10.0, 5, 2000.0) ==
          doctest::Approx(0.7333e-3).epsilon(1e-3));
    CHECK(min_filter_inductance(22.0, 0.0, 10.0, 5, 2000.0) == 0.0);
    CHECK(min_filter_inductance(22.0, 0.5, 10.0, 10, 2000.0) ==
          doctest::Approx(0.5 * min_filter_inductance(22.0, 0.5, 10.0, 5, 2000.0)).epsilon(1e-12));
}

TEST_CASE("minimum output capacitance") {
    CHECK(min_output_capacitance(70.0, 0.5, 10.0, 0.7, 10e3) ==
          doctest::Approx(500e-6).epsilon(1e-9));
    CHECK(min_output_capacitance(70.0, 0.0, 10.0, 0.7, 10e3) == 0.0);
    CHECK(min_output_capacitance(70.0, 0.5, 10.0, 0.35, 10e3) ==
          doctest::Approx(1000e-6).epsilon(1e-9));
}

TEST_CASE("conduction losses of the outer group, reference point") {
    OperatingPoint op;
    op.i_out = 10.0;
    op.i_circ = 2.0;
    op.m0 = 0.6;
    op.md2 = 0.05;
    op.r_ds = 2e-3;
    const auto lb = conduction_losses(op, Topology::Proposed);
    REQUIRE(lb.group_conduction.size() == 5);
    CHECK(lb.group_conduction[0] == doctest::Approx(0.0406).epsilon(1e-9));
}

TEST_CASE("conduction losses vanish with no current") {
    OperatingPoint op;
    op.i_out = 0.0;
    op.i_circ = 0.0;
    for (auto topo : {Topology::Proposed, Topology::Benchmark}) {
        const auto lb = conduction_losses(op, topo);
        CHECK(lb.conduction_total == 0.0);
    }
}

TEST_CASE("benchmark exceeds the proposed topology at the reference point") {
    OperatingPoint op;
    op.i_out = 10.0;
    op.i_circ = 2.0;
    op.m0 = 0.6;
    op.md2 = 0.05;
    op.r_ds = 2e-3;
    const auto p = conduction_losses(op, Topology::Proposed);
    const auto b = conduction_losses(op, Topology::Benchmark);
    CHECK(p.conduction_total < b.conduction_total);
}

TEST_CASE("switching losses") {
    OperatingPoint op;
    op.v_b = 22.4;
    op.i_out = 10.0;
    op.f_sw = 2000.0;
    op.timings = SwitchTimings{20e-9, 20e-9, 20e-9, 20e-9};
    SUBCASE("reference evaluation") {
        CHECK(switching_losses(op) == doctest::Approx(0.1792).epsilon(1e-9));
    }
    SUBCASE("zero output current gives zero") {
        op.i_out = 0.0;
        CHECK(switching_losses(op) == 0.0);
    }
    SUBCASE("independent of the circulating current, exactly") {
        const double base = switching_losses(op);
        for (double ic : {-5.0, -1.0, 0.5, 3.0, 5.0}) {
            op.i_circ = ic;
            CHECK(switching_losses(op) == base);
        }
    }
}

TEST_CASE("loss sweep ordering and monotonicity on the comparison grid") {
    OperatingPoint op; // defaults: i_out 10 A, m0 0.6, md2 0.05, r_ds 1 mOhm
    const auto rows = loss_sweep(op, rho_grid(0.0, 0.5, 50));
    REQUIRE(rows.size() == 50);
    double prev_p = 0.0, prev_b = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].p_proposed < rows[i].p_benchmark);
        if (i > 0) {
            CHECK(rows[i].p_proposed >= prev_p);
            CHECK(rows[i].p_benchmark >= prev_b);
        }
        prev_p = rows[i].p_proposed;
        prev_b = rows[i].p_benchmark;
    }
    CHECK(rows.back().core_ratio == doctest::Approx(0.2052).epsilon(1e-3));
}

TEST_CASE("empty rho grid gives an empty table") {
    OperatingPoint op;
    CHECK(loss_sweep(op, {}).empty());
}

TEST_CASE("term tables carry switch annotations") {
    for (auto topo : {Topology::Proposed, Topology::Benchmark}) {
        for (const auto& group : conduction_terms(topo)) {
            for (const auto& term : group) {
                CHECK(term.switches != nullptr);
                CHECK(term.weight > 0.0);
            }
        }
    }
}
