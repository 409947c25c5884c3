#include "mrb/battery.hpp"

#include "mrb/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mrb {

OcvCurve::OcvCurve(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    if (points_.empty()) {
        throw Error("OcvCurve: needs at least one point");
    }
    std::sort(points_.begin(), points_.end());
}

OcvCurve OcvCurve::default_curve() {
    return OcvCurve({{0.0, 22.0}, {0.2, 22.0}, {1.0, 23.0}});
}

double OcvCurve::operator()(double soc) const {
    if (soc <= points_.front().first) return points_.front().second;
    if (soc >= points_.back().first) return points_.back().second;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (soc <= points_[i].first) {
            const auto& [x0, y0] = points_[i - 1];
            const auto& [x1, y1] = points_[i];
            if (x1 == x0) return y1;
            return y0 + (y1 - y0) * (soc - x0) / (x1 - x0);
        }
    }
    return points_.back().second;
}

bool OcvCurve::non_decreasing() const {
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i].second < points_[i - 1].second) return false;
    }
    return true;
}

std::vector<std::string> BatteryModel::check(const std::string& path) const {
    std::vector<std::string> v;
    if (!(capacity_ah > 0.0)) v.push_back(path + ".capacity_ah: must be > 0");
    if (r_internal < 0.0) v.push_back(path + ".r_internal: must be >= 0");
    if (soc_init < 0.0 || soc_init > 1.0) v.push_back(path + ".soc_init: must be in [0,1]");
    if (ocv.points().empty() || !ocv.non_decreasing()) {
        v.push_back(path + ".ocv: must be non-empty and monotonically non-decreasing");
    }
    return v;
}

BatteryState make_battery_state(const BatteryModel& model, double soc, double i_b) {
    BatteryState s;
    s.soc = std::clamp(soc, 0.0, 1.0);
    s.i_b = i_b;
    s.v_terminal = model.ocv(s.soc) + i_b * model.r_internal;
    return s;
}

BatteryState battery_step(const BatteryState& state, const BatteryModel& model, double i_b,
                          double dt) {
    BatteryState next = state;
    const double dsoc = i_b * dt / (3600.0 * model.capacity_ah);
    double soc = state.soc + dsoc;
    if (soc < 0.0 || soc > 1.0) {
        soc = std::clamp(soc, 0.0, 1.0);
        next.saturated = true;
    }
    next.soc = soc;
    next.i_b = i_b;
    next.v_terminal = model.ocv(soc) + i_b * model.r_internal;
    return next;
}

} // namespace mrb
