#include "mrb/battery.hpp"
#include "mrb/coupled_inductor.hpp"
#include "mrb/errors.hpp"
#include "mrb/string_config.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mrb;

TEST_CASE("effective inductances of the symmetric 25 uH coupled inductor") {
    CoupledInductorParams p; // defaults: 25 uH everywhere, zero offsets
    const auto eff = effective_inductances(p);
    CHECK(eff.common_mode == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(eff.differential_mode == doctest::Approx(100e-6).epsilon(1e-12));
}

TEST_CASE("effective inductances with asymmetric self/mutual values") {
    CoupledInductorParams p;
    p.l1 = 30e-6;
    p.l2 = 30e-6;
    p.m12 = p.m21 = 20e-6;
    const auto eff = effective_inductances(p);
    CHECK(eff.common_mode == doctest::Approx(5e-6));
    CHECK(eff.differential_mode == doctest::Approx(100e-6));
}

TEST_CASE("non-positive differential inductance is rejected") {
    CoupledInductorParams p;
    p.delta_l = -100e-6; // forces the differential mode to zero
    CHECK_THROWS_AS((void)effective_inductances(p), NonPositiveDifferentialInductance);
}

TEST_CASE("effective inductances, symmetric family property") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ld(1e-6, 1e-3);
    for (int i = 0; i < 200; ++i) {
        CoupledInductorParams p;
        p.l1 = p.l2 = p.m12 = p.m21 = ld(rng);
        p.delta_l = p.delta_r = 0.0;
        const auto eff = effective_inductances(p);
        CHECK(eff.common_mode == 0.0);
        CHECK(eff.differential_mode == doctest::Approx(4.0 * p.l1).epsilon(1e-12));
    }
}

TEST_CASE("branch current split") {
    SUBCASE("zero circulating current") {
        const auto b = split_branch_currents(10.0, 0.0, 0.5);
        CHECK(b.i1 == 5.0);
        CHECK(b.i2 == 5.0);
    }
    SUBCASE("with circulating current") {
        const auto b = split_branch_currents(10.0, 2.0, 0.5);
        CHECK(b.i1 == 7.0);
        CHECK(b.i2 == 3.0);
    }
    SUBCASE("pure circulating case") {
        const auto b = split_branch_currents(0.0, 3.0, 0.5);
        CHECK(b.i1 == 3.0);
        CHECK(b.i2 == -3.0);
    }
}

TEST_CASE("branch split identity i1 + i2 = i_out at alpha = 0.5") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> cur(-60.0, 60.0);
    for (int i = 0; i < 1000; ++i) {
        const double i_out = cur(rng);
        const double i_circ = cur(rng);
        const auto b = split_branch_currents(i_out, i_circ, 0.5);
        CHECK(std::abs(b.i1 + b.i2 - i_out) <= 1e-9 * std::max(1.0, std::abs(i_out)));
    }
}

TEST_CASE("string output voltage") {
    const std::vector<double> v{22.7, 22.7, 22.4, 22.4, 22.4};
    CHECK(string_output_voltage({1, 1, 0, 0, 0}, v) == doctest::Approx(45.4));
    CHECK(string_output_voltage({0, 0, 0, 0, 0}, v) == 0.0);
    CHECK(string_output_voltage({1, 1, 1, 1, 1}, v) == doctest::Approx(112.6));
    CHECK_THROWS_AS((void)string_output_voltage({1, 0}, v), LengthMismatch);
}

TEST_CASE("string output voltage is monotone in the series flags") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> vd(20.0, 25.0);
    std::bernoulli_distribution bit(0.5);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> v(5);
        std::vector<int> s(5);
        for (int j = 0; j < 5; ++j) {
            v[static_cast<std::size_t>(j)] = vd(rng);
            s[static_cast<std::size_t>(j)] = bit(rng) ? 1 : 0;
        }
        const double base = string_output_voltage(s, v);
        for (std::size_t j = 0; j < 5; ++j) {
            if (s[j] == 0) {
                auto s2 = s;
                s2[j] = 1;
                CHECK(string_output_voltage(s2, v) >= base);
            }
        }
    }
}

TEST_CASE("battery step") {
    BatteryModel model;
    model.capacity_ah = 5.0;
    SUBCASE("zero current leaves soc unchanged") {
        auto s = make_battery_state(model, 0.5);
        const auto s2 = battery_step(s, model, 0.0, 123.0);
        CHECK(s2.soc == 0.5);
        CHECK_FALSE(s2.saturated);
    }
    SUBCASE("full discharge clamps and flags") {
        auto s = make_battery_state(model, 0.5);
        const auto s2 = battery_step(s, model, -5.0, 3600.0);
        CHECK(s2.soc == 0.0);
        CHECK(s2.saturated);
    }
    SUBCASE("charging 5 A for 360 s adds 10% of a 5 Ah cell") {
        auto s = make_battery_state(model, 0.5);
        const auto s2 = battery_step(s, model, 5.0, 360.0);
        CHECK(s2.soc == doctest::Approx(0.6).epsilon(1e-12));
        CHECK_FALSE(s2.saturated);
    }
}

TEST_CASE("battery step conserves charge when no clamp occurs") {
    BatteryModel model;
    model.capacity_ah = 5.0;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> cur(-20.0, 20.0);
    std::uniform_real_distribution<double> dtd(1e-6, 10.0);
    for (int i = 0; i < 500; ++i) {
        const double i_b = cur(rng);
        const double dt = dtd(rng);
        auto s = make_battery_state(model, 0.5);
        const auto s2 = battery_step(s, model, i_b, dt);
        if (!s2.saturated) {
            CHECK((s2.soc - s.soc) * model.capacity_ah * 3600.0 ==
                  doctest::Approx(i_b * dt).epsilon(1e-9));
        }
    }
}

TEST_CASE("terminal voltage follows the sign convention") {
    BatteryModel model; // r_internal 10 mOhm
    auto s = make_battery_state(model, 0.76);
    CHECK(s.v_terminal == doctest::Approx(22.7).epsilon(1e-9));
    const auto charging = battery_step(s, model, 10.0, 1e-3);
    const auto discharging = battery_step(s, model, -10.0, 1e-3);
    CHECK(charging.v_terminal > discharging.v_terminal);
}

TEST_CASE("ocv curve is piecewise linear with flat extrapolation") {
    const auto curve = OcvCurve::default_curve();
    CHECK(curve(0.0) == 22.0);
    CHECK(curve(0.1) == 22.0);
    CHECK(curve(0.2) == 22.0);
    CHECK(curve(0.52) == doctest::Approx(22.4));
    CHECK(curve(0.76) == doctest::Approx(22.7));
    CHECK(curve(1.0) == 23.0);
    CHECK(curve.non_decreasing());
}

TEST_CASE("string config invariants are collected") {
    StringConfig cfg = default_string_config();
    CHECK(cfg.check().empty());
    cfg.inductors.pop_back();
    cfg.alpha = 1.5;
    const auto v = cfg.check();
    CHECK(v.size() >= 2);
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("r_eq combines switch, battery, and winding resistances") {
    const StringConfig cfg = default_string_config();
    // 4 * 1 mOhm + 10 mOhm + 10 mOhm + 10 mOhm
    CHECK(cfg.r_eq(0) == doctest::Approx(0.034));
    CHECK(cfg.r_circ_path(0) == doctest::Approx(0.014));
}
