#include "mrb/dynamics.hpp"
#include "mrb/engine.hpp"
#include "mrb/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mrb;

TEST_CASE("circulating-current slopes per mode") {
    SUBCASE("parallel with a 0.3 V difference") {
        CHECK(dicirc_dt(GroupMode::Parallel, 22.7, 22.4, 0.0, 100e-6, 0.03) ==
              doctest::Approx(3000.0));
    }
    SUBCASE("series holds the current") {
        CHECK(dicirc_dt(GroupMode::Series, 22.7, 22.4, 5.0, 100e-6, 0.03) == 0.0);
    }
    SUBCASE("parallel with equal voltages and no current") {
        CHECK(dicirc_dt(GroupMode::Parallel, 22.4, 22.4, 0.0, 100e-6, 0.03) == 0.0);
    }
    SUBCASE("bypass freewheels toward zero") {
        CHECK(dicirc_dt(GroupMode::Bypass, 22.7, 22.4, 2.0, 100e-6, 0.03) ==
              doctest::Approx(-2.0 * 0.03 / 100e-6));
    }
    SUBCASE("the transfer drives oppose each other") {
        const double buck = dicirc_dt(GroupMode::Buck, 22.7, 22.4, 0.0, 100e-6, 0.03);
        const double boost = dicirc_dt(GroupMode::Boost, 22.7, 22.4, 0.0, 100e-6, 0.03);
        CHECK(buck < 0.0);
        CHECK(boost > 0.0);
    }
}

TEST_CASE("steady-state circulating current") {
    CircSSParams p;
    p.r_eq = 0.03;
    CHECK(steady_state_icirc(22.7, 22.4, p, 0.0) == doctest::Approx(10.0));
    CHECK(steady_state_icirc(22.4, 22.4, p, 0.0) == 0.0);
    CHECK(steady_state_icirc(22.4, 22.7, p, 0.0) == doctest::Approx(-10.0));
}

TEST_CASE("flux balance residual") {
    SUBCASE("balanced dwell pair") {
        CHECK(flux_balance_residual(24.0, 20.0, 0.0, 20e-6, 4e-6, 0.0, 0.0) ==
              doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("no transfer, equal voltages") {
        CHECK(flux_balance_residual(22.0, 22.0, 0.0, 20e-6, 0.0, 0.0, 0.0) == 0.0);
    }
    SUBCASE("equal dwell leaves net flux") {
        const double t = 10e-6;
        CHECK(flux_balance_residual(24.0, 20.0, 0.0, t, t, 0.0, 0.0) ==
              doctest::Approx(-16.0 * t));
    }
}

TEST_CASE("battery current allocation") {
    SUBCASE("two paralleled modules split the load") {
        GateInstant g;
        g.modes = {GroupMode::Parallel};
        const auto i_b = allocate_battery_currents(g, 10.0, {0.0}, 0.5);
        REQUIRE(i_b.size() == 2);
        CHECK(i_b[0] == doctest::Approx(-5.0));
        CHECK(i_b[1] == doctest::Approx(-5.0));
    }
    SUBCASE("circulating current shifts the split") {
        GateInstant g;
        g.modes = {GroupMode::Parallel};
        const auto i_b = allocate_battery_currents(g, 10.0, {2.0}, 0.5);
        CHECK(i_b[0] == doctest::Approx(-7.0));
        CHECK(i_b[1] == doctest::Approx(-3.0));
    }
    SUBCASE("bypassed module carries nothing") {
        GateInstant g;
        g.modes = {GroupMode::Bypass};
        const auto i_b = allocate_battery_currents(g, 10.0, {2.0}, 0.5);
        CHECK(i_b[1] == 0.0);
    }
    SUBCASE("series modules both carry the full string current") {
        GateInstant g;
        g.modes = {GroupMode::Series};
        const auto i_b = allocate_battery_currents(g, 10.0, {2.0}, 0.5);
        CHECK(i_b[0] == doctest::Approx(-10.0));
        CHECK(i_b[1] == doctest::Approx(-10.0));
    }
    SUBCASE("per-group KCL holds for a parallel pair") {
        GateInstant g;
        g.modes = {GroupMode::Parallel};
        std::mt19937 rng(37);
        std::uniform_real_distribution<double> d(-30.0, 30.0);
        for (int i = 0; i < 200; ++i) {
            const double i_out = d(rng), ic = d(rng);
            const auto i_b = allocate_battery_currents(g, i_out, {ic}, 0.5);
            CHECK(i_b[0] + i_b[1] == doctest::Approx(-i_out).epsilon(1e-12));
        }
    }
    SUBCASE("mismatched sizes are rejected") {
        GateInstant g;
        g.modes = {GroupMode::Parallel, GroupMode::Parallel};
        CHECK_THROWS_AS((void)allocate_battery_currents(g, 1.0, {0.0}, 0.5),
                        InconsistentTopology);
    }
}

namespace {
StringConfig two_module_config() {
    StringConfig cfg = default_string_config();
    cfg.modules.resize(2);
    cfg.modules[0].battery.soc_init = 0.76; // 22.7 V
    cfg.modules[1].battery.soc_init = 0.52; // 22.4 V
    cfg.modules[1].role = ModuleRole::Power;
    cfg.inductors.resize(1);
    return cfg;
}
} // namespace

TEST_CASE("step: equilibrium state stays put") {
    StringConfig cfg = two_module_config();
    cfg.modules[0].battery.soc_init = 0.52;
    cfg.modules[1].battery.soc_init = 0.52;
    SimState s = make_initial_state(cfg);
    GateInstant g;
    g.modes = {GroupMode::Parallel};
    g.string_connected = false;
    const auto s2 = step(s, cfg, g, 1e-6);
    CHECK(s2.i_circ[0] == 0.0);
    CHECK(s2.i_filter == 0.0);
    CHECK(s2.v_cout == 0.0);
    CHECK(s2.batteries[0].soc == s.batteries[0].soc);
    CHECK(s2.t == doctest::Approx(1e-6));
}

TEST_CASE("step: one parallel step from rest grows i_circ by about 3 mA") {
    StringConfig cfg = two_module_config(); // socs 0.76 / 0.52 -> 22.7 / 22.4 V
    SimState s = make_initial_state(cfg);
    GateInstant g;
    g.modes = {GroupMode::Parallel};
    g.string_connected = false;
    const auto s2 = step(s, cfg, g, 1e-6);
    CHECK(s2.i_circ[0] == doctest::Approx(3e-3).epsilon(2e-3));
}

TEST_CASE("open-loop parallel run converges to the closed-form steady state") {
    StringConfig cfg = two_module_config();
    SimParams params;
    params.t_end = 0.05;
    Simulator sim(cfg, ControlConfig{}, params);
    const auto result = sim.run_force_parallel(0.05);
    REQUIRE(result.error.empty());
    CircSSParams ss;
    ss.r_eq = cfg.r_eq(0);
    const double predicted = steady_state_icirc(22.7, 22.4, ss, 0.0);
    CHECK(result.final_state.i_circ[0] ==
          doctest::Approx(predicted).epsilon(0.02));
}

TEST_CASE("energy ledger closes on an open-loop parallel transient") {
    StringConfig cfg = two_module_config();
    SimParams params;
    Simulator sim(cfg, ControlConfig{}, params);
    const auto result = sim.run_force_parallel(0.05);
    REQUIRE(result.error.empty());
    CHECK(result.ledger.e_chem_gross > 0.0);
    CHECK(result.energy_residual_rel() < 5e-3);
}

TEST_CASE("trip limit aborts with a timestamped diagnostic") {
    StringConfig cfg = two_module_config();
    SimParams params;
    params.trip_current = 1.0; // the 10 A steady state must trip it
    Simulator sim(cfg, ControlConfig{}, params);
    const auto result = sim.run_force_parallel(0.05);
    CHECK(!result.error.empty());
    CHECK(result.error.find("trip") != std::string::npos);
    CHECK(result.error.find("t=") != std::string::npos);
}

TEST_CASE("stored energy accounts for every reactive element") {
    StringConfig cfg = two_module_config();
    SimState s = make_initial_state(cfg);
    s.i_circ[0] = 2.0;
    s.i_filter = 3.0;
    s.v_cout = 10.0;
    s.i_load = 1.0;
    const double expected = 0.5 * 100e-6 * 4.0 + 0.5 * cfg.filter.l_filter * 9.0 +
                            0.5 * cfg.filter.c_out * 100.0 + 0.5 * cfg.load.l * 1.0;
    CHECK(stored_energy(s, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sim params validate against the carrier frequency") {
    SimParams p;
    p.dt = 1e-3; // far above 1/(20 f)
    CHECK(!p.check(2000.0).empty());
    p.dt = 1e-6;
    CHECK(p.check(2000.0).empty());
}
