#pragma once

#include "mrb/string_config.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace mrb {

/// Phase-shifted triangular carriers in [0,1].
struct CarrierSet {
    std::size_t n_carriers = 0;
    double f_carrier = 2000.0;          // hertz
    std::vector<double> offsets;        // radians, strictly increasing in [0, 2*pi)

    /// Evenly spaced offsets 2*pi*k/n over one carrier period.
    static CarrierSet evenly_spaced(std::size_t n, double f_carrier);

    [[nodiscard]] std::vector<std::string> check(const std::string& path) const;
};

/// Triangular wave value of carrier k at time t; trough 0 at phase 0, peak 1
/// at half period. Throws IndexOutOfRange for k >= n_carriers.
[[nodiscard]] double carrier_value(const CarrierSet& set, std::size_t k, double t);

enum class BridgeState : std::uint8_t { State0, State1 };

struct BridgeStatePair {
    BridgeState lower = BridgeState::State0; // right full bridge of module j
    BridgeState upper = BridgeState::State0; // left full bridge of module j+1
};

/// lower = State1 iff m0 - md2 > c, upper = State1 iff m0 + md2 > c.
[[nodiscard]] BridgeStatePair bridge_states(double m0, double md2, double c);

/// (1,1) -> Series, (0,0) -> Parallel, mixed states map to Buck (md2 > 0) or
/// Boost (md2 < 0). A mixed pair contradicting the md2 sign throws
/// InconsistentState; bypass is decided separately and overrides.
[[nodiscard]] GroupMode classify_group_mode(const BridgeStatePair& pair, double md2_sign);

struct ModeDurations {
    double t_series = 0.0;   // t_sw * (m0 - md2)
    double t_parallel = 0.0; // t_sw * (1 - m0 - md2)
    double t_transfer = 0.0; // 2 * t_sw * md2, signed; < 0 mirrors the interval
};

/// Duration triple over one switching period. t_parallel is computed as
/// t_sw - t_series - t_transfer so the closure identity holds exactly in
/// floating point. Throws InvalidIndices outside the feasible region.
[[nodiscard]] ModeDurations mode_durations(double m0, double md2, double t_sw);

/// True when |2*md2| exceeds both effective thresholds |m0 -+ md2|; the group
/// is then forced to Bypass for the carrier period (zero-crossing protection).
[[nodiscard]] bool bypass_check(double m0, double md2);

struct ModulationCommand {
    double m0 = 0.0;            // |m0| <= 1; sign selects output polarity
    std::vector<double> md2;    // one per interconnection group
    double omega = 0.0;         // rad/s, switching angular frequency
};

/// One contiguous interval of constant gate state.
struct GateInterval {
    double t_start = 0.0;
    std::vector<BridgeStatePair> pairs; // per group
    std::vector<GroupMode> modes;       // per group, bypass applied
    std::vector<int> series_flags;      // per module, for string_output_voltage
};

struct GateSchedule {
    double horizon = 0.0;
    double dt = 0.0;
    std::vector<GateInterval> intervals; // contiguous, covering [0, horizon)

    /// Debug export, one row per (interval, group): t_start,group,mode.
    [[nodiscard]] std::string to_csv() const;

    /// Realized dwell time of `mode` for `group` over [t0, t1).
    [[nodiscard]] double dwell(std::size_t group, GroupMode mode, double t0, double t1) const;
};

/// Samples bridge states per group every dt, applies the bypass criterion once
/// per carrier period, classifies modes, and emits per-module series flags.
/// Carriers map one per group; with one extra carrier (n_groups + 1) the first
/// carrier gates the base module's insertion, otherwise the base module is
/// flagged whenever any group is in series.
[[nodiscard]] GateSchedule build_gate_schedule(const ModulationCommand& cmd, const CarrierSet& set,
                                               double horizon, double dt);

/// Exact in-order mode segments of one group over one carrier period starting
/// at the carrier trough t0. Boundaries are the analytic triangle crossings of
/// the two thresholds m0 -+ md2; dwell times match the duration algebra exactly.
struct PeriodSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    GroupMode mode = GroupMode::Parallel;
};

[[nodiscard]] std::vector<PeriodSegment> group_period_segments(double m0, double md2, double t0,
                                                               double period, bool bypassed);

} // namespace mrb
