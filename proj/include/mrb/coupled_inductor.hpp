#pragma once

#include <string>
#include <vector>

namespace mrb {

/// Self/mutual inductances of one inter-module coupled inductor plus the
/// additive offsets of the effective-inductance relations. delta_r is carried
/// as an inductance-valued correction defaulting to 0 (the printed relation
/// adds it to an inductance).
struct CoupledInductorParams {
    double l1 = 25e-6;  // henries
    double l2 = 25e-6;
    double m12 = 25e-6; // reciprocity m12 == m21 enforced by check()
    double m21 = 25e-6;
    double delta_l = 0.0;
    double delta_r = 0.0;
    double esr = 0.010; // ohms, winding resistance of the differential path

    [[nodiscard]] std::vector<std::string> check(const std::string& path) const;
};

struct EffectiveInductances {
    double common_mode = 0.0;       // seen by the shared load current
    double differential_mode = 0.0; // seen by the circulating current
};

/// common = 0.5*(l1 - m12) + delta_r, differential = l1 + m12 + l2 + m21 + delta_l.
/// Throws NonPositiveDifferentialInductance when the differential value is <= 0
/// (an unusable magnetic design).
[[nodiscard]] EffectiveInductances effective_inductances(const CoupledInductorParams& p);

} // namespace mrb
