#include "mrb/coupled_inductor.hpp"

#include "mrb/errors.hpp"

#include <cmath>

namespace mrb {

std::vector<std::string> CoupledInductorParams::check(const std::string& path) const {
    std::vector<std::string> v;
    if (!(l1 > 0.0)) v.push_back(path + ".l1: must be > 0");
    if (!(l2 > 0.0)) v.push_back(path + ".l2: must be > 0");
    if (m12 != m21) v.push_back(path + ".m12/m21: reciprocity requires m12 == m21");
    if (l1 > 0.0 && l2 > 0.0 && std::abs(m12) > std::sqrt(l1 * l2) * (1.0 + 1e-12)) {
        v.push_back(path + ".m12: |m12| must not exceed sqrt(l1*l2)");
    }
    if (esr < 0.0) v.push_back(path + ".esr: must be >= 0");
    return v;
}

EffectiveInductances effective_inductances(const CoupledInductorParams& p) {
    EffectiveInductances e;
    e.common_mode = 0.5 * (p.l1 - p.m12) + p.delta_r;
    e.differential_mode = p.l1 + p.m12 + p.l2 + p.m21 + p.delta_l;
    if (!(e.differential_mode > 0.0)) {
        throw NonPositiveDifferentialInductance(
            "effective differential-mode inductance must be > 0");
    }
    return e;
}

} // namespace mrb
