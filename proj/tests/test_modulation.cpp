#include "mrb/errors.hpp"
#include "mrb/modulation.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace mrb;

TEST_CASE("triangular carrier values") {
    const auto set = CarrierSet::evenly_spaced(4, 2000.0);
    const double period = 1.0 / 2000.0;
    CHECK(carrier_value(set, 0, 0.0) == 0.0);
    CHECK(carrier_value(set, 0, 0.5 * period) == doctest::Approx(1.0));
    // second of four evenly spaced carriers sits a quarter period ahead
    CHECK(carrier_value(set, 1, 0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)carrier_value(set, 4, 0.0), IndexOutOfRange);
}

TEST_CASE("carrier stays in [0,1] and is periodic") {
    const auto set = CarrierSet::evenly_spaced(5, 2000.0);
    const double period = 1.0 / 2000.0;
    for (int i = 0; i < 500; ++i) {
        const double t = 1e-5 * i * 1.37;
        for (std::size_t k = 0; k < 5; ++k) {
            const double c = carrier_value(set, k, t);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
            CHECK(carrier_value(set, k, t + period) == doctest::Approx(c).epsilon(1e-9));
        }
    }
}

TEST_CASE("bridge state comparisons") {
    SUBCASE("both above the carrier") {
        const auto p = bridge_states(0.6, 0.05, 0.5);
        CHECK(p.lower == BridgeState::State1);
        CHECK(p.upper == BridgeState::State1);
    }
    SUBCASE("carrier between the thresholds") {
        const auto p = bridge_states(0.6, 0.05, 0.6);
        CHECK(p.lower == BridgeState::State0);
        CHECK(p.upper == BridgeState::State1);
    }
    SUBCASE("zero indices below carrier") {
        const auto p = bridge_states(0.0, 0.0, 0.5);
        CHECK(p.lower == BridgeState::State0);
        CHECK(p.upper == BridgeState::State0);
    }
}

TEST_CASE("group mode classification") {
    CHECK(classify_group_mode({BridgeState::State1, BridgeState::State1}, 0.05) ==
          GroupMode::Series);
    CHECK(classify_group_mode({BridgeState::State0, BridgeState::State0}, -0.05) ==
          GroupMode::Parallel);
    CHECK(classify_group_mode({BridgeState::State0, BridgeState::State1}, 0.05) ==
          GroupMode::Buck);
    CHECK(classify_group_mode({BridgeState::State1, BridgeState::State0}, -0.05) ==
          GroupMode::Boost);
    CHECK_THROWS_AS((void)classify_group_mode({BridgeState::State0, BridgeState::State1}, -0.05),
                    InconsistentState);
    CHECK_THROWS_AS((void)classify_group_mode({BridgeState::State1, BridgeState::State0}, 0.05),
                    InconsistentState);
}

TEST_CASE("mode durations") {
    SUBCASE("reference point") {
        const auto d = mode_durations(0.6, 0.05, 500e-6);
        CHECK(d.t_series == doctest::Approx(275e-6));
        CHECK(d.t_parallel == doctest::Approx(175e-6));
        CHECK(d.t_transfer == doctest::Approx(50e-6));
        CHECK(d.t_series + d.t_parallel + d.t_transfer == 500e-6);
    }
    SUBCASE("no transfer interval") {
        const auto d = mode_durations(0.6, 0.0, 500e-6);
        CHECK(d.t_series == doctest::Approx(300e-6));
        CHECK(d.t_parallel == doctest::Approx(200e-6));
        CHECK(d.t_transfer == 0.0);
    }
    SUBCASE("md2 above m0 is infeasible") {
        CHECK_THROWS_AS((void)mode_durations(0.03, 0.05, 500e-6), InvalidIndices);
    }
}

TEST_CASE("duration closure holds exactly for 1e4 random valid indices") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> m0d(0.0, 1.0);
    const double t_sw = 500e-6;
    int checked = 0;
    while (checked < 10000) {
        const double m0 = m0d(rng);
        std::uniform_real_distribution<double> mdd(-std::min(m0, 1.0 - m0),
                                                   std::min(m0, 1.0 - m0));
        const double md2 = mdd(rng);
        const auto d = mode_durations(m0, md2, t_sw);
        CHECK(d.t_series + d.t_parallel + d.t_transfer == t_sw);
        ++checked;
    }
}

TEST_CASE("bypass criterion") {
    CHECK(bypass_check(0.02, 0.05));
    CHECK_FALSE(bypass_check(0.6, 0.05));
    CHECK_FALSE(bypass_check(0.0, 0.0));
}

namespace {
std::map<GroupMode, double> schedule_dwell(const GateSchedule& s, std::size_t group, double t0,
                                           double t1) {
    std::map<GroupMode, double> d;
    for (GroupMode m : {GroupMode::Series, GroupMode::Parallel, GroupMode::Buck, GroupMode::Boost,
                        GroupMode::Bypass}) {
        d[m] = s.dwell(group, m, t0, t1);
    }
    return d;
}
} // namespace

TEST_CASE("gate schedule dwell matches the duration algebra") {
    const double f = 2000.0;
    const double t_sw = 1.0 / f;
    const double dt = 1.0 / (40.0 * f);
    const auto set = CarrierSet::evenly_spaced(4, f);

    SUBCASE("md2 = 0 gives only series and parallel") {
        ModulationCommand cmd{0.6, {0.0, 0.0, 0.0, 0.0}, 0.0};
        const auto sched = build_gate_schedule(cmd, set, t_sw, dt);
        for (std::size_t g = 0; g < 4; ++g) {
            const auto d = schedule_dwell(sched, g, 0.0, t_sw);
            CHECK(d.at(GroupMode::Buck) == 0.0);
            CHECK(d.at(GroupMode::Boost) == 0.0);
            CHECK(d.at(GroupMode::Bypass) == 0.0);
            CHECK(d.at(GroupMode::Series) == doctest::Approx(0.6 * t_sw).epsilon(0.12));
        }
    }
    SUBCASE("realized dwell approximates the triple within sampling error") {
        ModulationCommand cmd{0.6, {0.05, 0.05, 0.05, 0.05}, 0.0};
        const double dt_fine = 1.0 / (200.0 * f);
        const auto sched = build_gate_schedule(cmd, set, t_sw, dt_fine);
        for (std::size_t g = 0; g < 4; ++g) {
            const auto d = schedule_dwell(sched, g, 0.0, t_sw);
            CHECK(std::abs(d.at(GroupMode::Series) - 0.55 * t_sw) <= 2.0 * dt_fine);
            CHECK(std::abs(d.at(GroupMode::Parallel) - 0.35 * t_sw) <= 2.0 * dt_fine);
            CHECK(std::abs(d.at(GroupMode::Buck) - 0.10 * t_sw) <= 2.0 * dt_fine);
        }
    }
    SUBCASE("bypass overrides when the indices cross zero") {
        ModulationCommand cmd{0.02, {0.05, 0.05, 0.05, 0.05}, 0.0};
        const auto sched = build_gate_schedule(cmd, set, t_sw, dt);
        for (std::size_t g = 0; g < 4; ++g) {
            const auto d = schedule_dwell(sched, g, 0.0, t_sw);
            CHECK(d.at(GroupMode::Bypass) == doctest::Approx(t_sw));
        }
    }
}

TEST_CASE("realized dwell converges as dt shrinks") {
    const double f = 2000.0;
    const double t_sw = 1.0 / f;
    const auto set = CarrierSet::evenly_spaced(4, f);
    ModulationCommand cmd{0.7, {0.03, 0.03, 0.03, 0.03}, 0.0};
    for (double div : {40.0, 100.0, 400.0}) {
        const double dt = 1.0 / (div * f);
        const auto sched = build_gate_schedule(cmd, set, t_sw, dt);
        const auto d = schedule_dwell(sched, 0, 0.0, t_sw);
        CHECK(std::abs(d.at(GroupMode::Series) - 0.67 * t_sw) <= 2.0 * dt);
        CHECK(std::abs(d.at(GroupMode::Parallel) - 0.27 * t_sw) <= 2.0 * dt);
        CHECK(std::abs(d.at(GroupMode::Buck) - 0.06 * t_sw) <= 2.0 * dt);
    }
}

TEST_CASE("sign symmetry: negating md2 mirrors the transfer interval") {
    const double f = 2000.0;
    const double t_sw = 1.0 / f;
    const double dt = 1.0 / (200.0 * f);
    const auto set = CarrierSet::evenly_spaced(4, f);
    ModulationCommand pos{0.6, {0.05, 0.05, 0.05, 0.05}, 0.0};
    ModulationCommand neg{0.6, {-0.05, -0.05, -0.05, -0.05}, 0.0};
    const auto sp = build_gate_schedule(pos, set, t_sw, dt);
    const auto sn = build_gate_schedule(neg, set, t_sw, dt);
    const auto dp = schedule_dwell(sp, 0, 0.0, t_sw);
    const auto dn = schedule_dwell(sn, 0, 0.0, t_sw);
    // the transfer interval swaps its classification, dwells stay mirrored
    CHECK(dp.at(GroupMode::Buck) == doctest::Approx(dn.at(GroupMode::Boost)).epsilon(1e-12));
    CHECK(dp.at(GroupMode::Boost) == 0.0);
    CHECK(dn.at(GroupMode::Buck) == 0.0);
    CHECK(dp.at(GroupMode::Series) == doctest::Approx(dn.at(GroupMode::Series)).epsilon(1e-12));
    CHECK(dp.at(GroupMode::Parallel) ==
          doctest::Approx(dn.at(GroupMode::Parallel)).epsilon(1e-12));
}

TEST_CASE("exact period segments tile the period and match the durations") {
    const double t_sw = 500e-6;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> m0d(0.05, 0.95);
    for (int i = 0; i < 300; ++i) {
        const double m0 = m0d(rng);
        std::uniform_real_distribution<double> mdd(-std::min(m0, 1.0 - m0) * 0.99,
                                                   std::min(m0, 1.0 - m0) * 0.99);
        const double md2 = mdd(rng);
        if (bypass_check(m0, md2)) continue;
        const auto segs = group_period_segments(m0, md2, 0.0, t_sw, false);
        REQUIRE(!segs.empty());
        CHECK(segs.front().t_start == 0.0);
        CHECK(segs.back().t_end == doctest::Approx(t_sw).epsilon(1e-12));
        double series = 0.0, parallel = 0.0, transfer = 0.0;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            if (s > 0) CHECK(segs[s].t_start == doctest::Approx(segs[s - 1].t_end).epsilon(1e-12));
            const double w = segs[s].t_end - segs[s].t_start;
            if (segs[s].mode == GroupMode::Series) series += w;
            if (segs[s].mode == GroupMode::Parallel) parallel += w;
            if (segs[s].mode == GroupMode::Buck || segs[s].mode == GroupMode::Boost) transfer += w;
        }
        const double amd = std::abs(md2);
        CHECK(series == doctest::Approx(t_sw * (m0 - amd)).epsilon(1e-9));
        CHECK(parallel == doctest::Approx(t_sw * (1.0 - m0 - amd)).epsilon(1e-9));
        CHECK(transfer == doctest::Approx(t_sw * 2.0 * amd).epsilon(1e-9));
    }
}

TEST_CASE("schedule CSV export lists one row per interval and group") {
    const auto set = CarrierSet::evenly_spaced(2, 2000.0);
    ModulationCommand cmd{0.5, {0.0, 0.0}, 0.0};
    const auto sched = build_gate_schedule(cmd, set, 500e-6, 1e-5);
    const auto csv = sched.to_csv();
    CHECK(csv.rfind("t_start,group,mode", 0) == 0);
    CHECK(csv.find("series") != std::string::npos);
}
