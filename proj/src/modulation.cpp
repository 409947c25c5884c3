#include "mrb/modulation.hpp"

#include "mrb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mrb {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0;
    return f;
}
} // namespace

CarrierSet CarrierSet::evenly_spaced(std::size_t n, double f_carrier) {
    CarrierSet set;
    set.n_carriers = n;
    set.f_carrier = f_carrier;
    set.offsets.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        set.offsets[k] = two_pi * static_cast<double>(k) / static_cast<double>(n);
    }
    return set;
}

std::vector<std::string> CarrierSet::check(const std::string& path) const {
    std::vector<std::string> v;
    if (offsets.size() != n_carriers) v.push_back(path + ".offsets: size must equal n_carriers");
    if (!(f_carrier > 0.0)) v.push_back(path + ".f_carrier: must be > 0");
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        if (offsets[k] < 0.0 || offsets[k] >= two_pi ||
            (k > 0 && offsets[k] <= offsets[k - 1])) {
            v.push_back(path + ".offsets: must be strictly increasing in [0, 2*pi)");
            break;
        }
    }
    return v;
}

double carrier_value(const CarrierSet& set, std::size_t k, double t) {
    if (k >= set.n_carriers) {
        throw IndexOutOfRange("carrier_value: carrier index " + std::to_string(k) + " of " +
                              std::to_string(set.n_carriers));
    }
    const double u = frac(t * set.f_carrier + set.offsets[k] / two_pi);
    return u < 0.5 ? 2.0 * u : 2.0 * (1.0 - u);
}

BridgeStatePair bridge_states(double m0, double md2, double c) {
    BridgeStatePair p;
    p.lower = (m0 - md2 > c) ? BridgeState::State1 : BridgeState::State0;
    p.upper = (m0 + md2 > c) ? BridgeState::State1 : BridgeState::State0;
    return p;
}

GroupMode classify_group_mode(const BridgeStatePair& pair, double md2_sign) {
    const bool lo = pair.lower == BridgeState::State1;
    const bool up = pair.upper == BridgeState::State1;
    if (lo && up) return GroupMode::Series;
    if (!lo && !up) return GroupMode::Parallel;
    if (!lo && up) {
        if (md2_sign <= 0.0) {
            throw InconsistentState("bridge pair (State0, State1) requires md2 > 0");
        }
        return GroupMode::Buck;
    }
    if (md2_sign >= 0.0) {
        throw InconsistentState("bridge pair (State1, State0) requires md2 < 0");
    }
    return GroupMode::Boost;
}

ModeDurations mode_durations(double m0, double md2, double t_sw) {
    if (!(t_sw > 0.0)) throw InvalidIndices("mode_durations: t_sw must be > 0");
    const double amd = std::abs(md2);
    const double eps = 1e-12;
    if (m0 - amd < -eps) {
        throw InvalidIndices("mode_durations: series duration negative (|md2| exceeds m0)");
    }
    if (1.0 - m0 - amd < -eps) {
        throw InvalidIndices("mode_durations: parallel duration negative (m0 + |md2| exceeds 1)");
    }
    ModeDurations d;
    d.t_series = t_sw * (m0 - md2);
    d.t_parallel = (t_sw - d.t_series) - 2.0 * t_sw * md2;
    // The transfer duration absorbs the rounding so the closure identity holds
    // bit-exactly under left-to-right summation: with s1 in [t_sw/2, 2*t_sw]
    // the subtraction below is exact by the Sterbenz lemma, and the rare
    // remainder is settled by an ulp walk at the matching granularity.
    const double s1 = d.t_series + d.t_parallel;
    d.t_transfer = t_sw - s1;
    double err = (d.t_series + d.t_parallel) + d.t_transfer - t_sw;
    for (int i = 0; err != 0.0 && i < 8; ++i) {
        d.t_transfer = std::nextafter(d.t_transfer,
                                      err > 0.0 ? -std::numeric_limits<double>::infinity()
                                                : std::numeric_limits<double>::infinity());
        err = (d.t_series + d.t_parallel) + d.t_transfer - t_sw;
    }
    return d;
}

bool bypass_check(double m0, double md2) {
    const double lhs = std::abs(2.0 * md2);
    return lhs > std::abs(m0 - md2) && lhs > std::abs(m0 + md2);
}

std::string GateSchedule::to_csv() const {
    std::ostringstream os;
    os << "t_start,group,mode\n";
    for (const auto& iv : intervals) {
        for (std::size_t g = 0; g < iv.modes.size(); ++g) {
            os << iv.t_start << ',' << g << ',' << to_string(iv.modes[g]) << '\n';
        }
    }
    return os.str();
}

double GateSchedule::dwell(std::size_t group, GroupMode mode, double t0, double t1) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const double start = std::max(intervals[i].t_start, t0);
        const double end =
            std::min(i + 1 < intervals.size() ? intervals[i + 1].t_start : horizon, t1);
        if (end <= start) continue;
        if (group < intervals[i].modes.size() && intervals[i].modes[group] == mode) {
            acc += end - start;
        }
    }
    return acc;
}

GateSchedule build_gate_schedule(const ModulationCommand& cmd, const CarrierSet& set,
                                 double horizon, double dt) {
    const std::size_t n_groups = cmd.md2.size();
    const bool has_base_carrier = set.n_carriers == n_groups + 1;
    if (!has_base_carrier && set.n_carriers != n_groups) {
        throw LengthMismatch("build_gate_schedule: carriers must match groups (or groups + 1)");
    }
    if (!(dt > 0.0) || dt > 1.0 / (20.0 * set.f_carrier)) {
        throw InvalidIndices("build_gate_schedule: dt must satisfy dt <= 1/(20*f_carrier)");
    }
    const double m0 = std::abs(cmd.m0);
    const double period = 1.0 / set.f_carrier;

    // Feasibility of the commanded indices, group by group; bypassed groups
    // are exempt (bypass is exactly the escape hatch near zero crossings).
    std::vector<bool> bypassed(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        bypassed[g] = bypass_check(m0, cmd.md2[g]);
        if (!bypassed[g]) (void)mode_durations(m0, cmd.md2[g], period);
    }

    GateSchedule sched;
    sched.horizon = horizon;
    sched.dt = dt;

    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    std::vector<GroupMode> last_modes;
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        GateInterval iv;
        iv.t_start = t;
        iv.pairs.resize(n_groups);
        iv.modes.resize(n_groups);
        iv.series_flags.assign(n_groups + 1, 0);
        for (std::size_t g = 0; g < n_groups; ++g) {
            const std::size_t k = has_base_carrier ? g + 1 : g;
            const double c = carrier_value(set, k, t);
            iv.pairs[g] = bridge_states(m0, cmd.md2[g], c);
            iv.modes[g] = bypassed[g] ? GroupMode::Bypass
                                      : classify_group_mode(iv.pairs[g], cmd.md2[g]);
            iv.series_flags[g + 1] = iv.modes[g] == GroupMode::Series ? 1 : 0;
        }
        if (has_base_carrier) {
            iv.series_flags[0] = m0 > carrier_value(set, 0, t) ? 1 : 0;
        } else {
            const bool any_series =
                std::any_of(iv.modes.begin(), iv.modes.end(),
                            [](GroupMode m) { return m == GroupMode::Series; });
            iv.series_flags[0] = any_series ? 1 : 0;
        }
        if (sched.intervals.empty() || iv.modes != last_modes ||
            iv.series_flags != sched.intervals.back().series_flags) {
            last_modes = iv.modes;
            sched.intervals.push_back(std::move(iv));
        }
    }
    return sched;
}

std::vector<PeriodSegment> group_period_segments(double m0, double md2, double t0, double period,
                                                 bool bypassed) {
    std::vector<PeriodSegment> segs;
    if (bypassed) {
        segs.push_back({t0, t0 + period, GroupMode::Bypass});
        return segs;
    }
    const double lo = std::clamp(std::min(m0 - md2, m0 + md2), 0.0, 1.0);
    const double hi = std::clamp(std::max(m0 - md2, m0 + md2), 0.0, 1.0);
    const GroupMode mixed = md2 > 0.0 ? GroupMode::Buck
                          : md2 < 0.0 ? GroupMode::Boost
                                      : GroupMode::Parallel;
    // Triangle phase fractions of the threshold crossings: rising at x/2,
    // falling at 1 - x/2.
    const double u1 = 0.5 * lo;
    const double u2 = 0.5 * hi;
    const double u3 = 1.0 - 0.5 * hi;
    const double u4 = 1.0 - 0.5 * lo;
    const GroupMode order[5] = {GroupMode::Series, mixed, GroupMode::Parallel, mixed,
                                GroupMode::Series};
    const double bounds[6] = {0.0, u1, u2, u3, u4, 1.0};
    for (int s = 0; s < 5; ++s) {
        if (bounds[s + 1] - bounds[s] <= 0.0) continue;
        PeriodSegment seg;
        seg.t_start = t0 + bounds[s] * period;
        seg.t_end = t0 + bounds[s + 1] * period;
        seg.mode = order[s];
        if (!segs.empty() && segs.back().mode == seg.mode) {
            segs.back().t_end = seg.t_end;
        } else {
            segs.push_back(seg);
        }
    }
    return segs;
}

} // namespace mrb
