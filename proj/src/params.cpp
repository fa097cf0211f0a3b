#include "dcmg/params.hpp"

#include <fmt/core.h>

#include <stdexcept>

namespace dcmg {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0)) {
        throw std::invalid_argument(fmt::format("{} must be > 0 (got {})", name, value));
    }
}

}  // namespace

void CircuitParams::validate() const {
    require_positive(R_line, "circuit.R_line");
    require_positive(L_line, "circuit.L_line");
    require_positive(L_bat, "circuit.L_bat");
    require_positive(C_bat, "circuit.C_bat");
    require_positive(C_bus, "circuit.C_bus");
    require_positive(U_s, "circuit.U_s");
    require_positive(P_base, "circuit.P_base");
    if (!(I_low < I_up)) {
        throw std::invalid_argument(
            fmt::format("circuit.I_low ({}) must be below circuit.I_up ({})", I_low, I_up));
    }
}

void ControlParams::validate() const {
    require_positive(k_Pv, "control.k_Pv");
    require_positive(k_Iv, "control.k_Iv");
    require_positive(k_Pi, "control.k_Pi");
    require_positive(k_Ii, "control.k_Ii");
}

void ModeDef::validate() const {
    if (sigma < 1 || sigma > 4) {
        throw std::invalid_argument(fmt::format("mode index {} outside 1..4", sigma));
    }
    require_positive(U_ref, "mode.U_ref");
    const bool cv_mode = sigma == 1 || sigma == 4;
    if (cv_mode && R_d != 0.0) {
        throw std::invalid_argument(fmt::format("mode {} is constant-voltage, R_d must be 0", sigma));
    }
    if (!cv_mode && !(R_d > 0.0)) {
        throw std::invalid_argument(fmt::format("mode {} is a droop mode, R_d must be > 0", sigma));
    }
}

ModeTable default_modes() {
    return {{
        {1, 120.0, 0.0},
        {2, 110.0, 1.0},
        {3, 110.0, 0.83},
        {4, 100.0, 0.0},
    }};
}

const ModeDef& mode_at(const ModeTable& modes, int sigma) {
    if (sigma < 1 || sigma > 4) {
        throw std::out_of_range(fmt::format("mode index {} outside 1..4", sigma));
    }
    return modes[static_cast<std::size_t>(sigma - 1)];
}

double pu_to_watts(double pu, const CircuitParams& c) { return pu * c.P_base; }
double watts_to_pu(double watts, const CircuitParams& c) { return watts / c.P_base; }

}  // namespace dcmg
