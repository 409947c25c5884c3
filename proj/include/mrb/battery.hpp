#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mrb {

/// Piecewise-linear open-circuit voltage over SOC in [0,1].
/// Extrapolates flat outside the given breakpoints.
class OcvCurve {
public:
    OcvCurve() = default;
    explicit OcvCurve(std::vector<std::pair<double, double>> points);

    /// Default pack curve: 22.0 V at SOC 0.2, linear to 23.0 V at SOC 1.0,
    /// flat below 0.2. Brackets the 22-23 V nominal range.
    static OcvCurve default_curve();

    [[nodiscard]] double operator()(double soc) const;
    [[nodiscard]] bool non_decreasing() const;
    [[nodiscard]] const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

struct BatteryModel {
    double capacity_ah = 5.0;   // ampere-hours
    double r_internal = 0.010;  // ohms
    OcvCurve ocv = OcvCurve::default_curve();
    double soc_init = 0.5;

    /// Returns violated-invariant messages, empty when valid. `path` prefixes each message.
    [[nodiscard]] std::vector<std::string> check(const std::string& path) const;
};

/// Sign convention: positive i_b charges the battery.
struct BatteryState {
    double soc = 0.5;
    double i_b = 0.0;        // amperes, positive = charging
    double v_terminal = 0.0; // volts
    bool saturated = false;  // set once SOC integration has clamped
};

[[nodiscard]] BatteryState make_battery_state(const BatteryModel& model, double soc, double i_b = 0.0);

/// Advances SOC by i_b*dt/(3600*capacity), clamped to [0,1] with the
/// saturation flag, and recomputes the terminal voltage.
[[nodiscard]] BatteryState battery_step(const BatteryState& state, const BatteryModel& model,
                                        double i_b, double dt);

} // namespace mrb
