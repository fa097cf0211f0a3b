#pragma once

#include <array>

namespace dcmg {

/// Passive components and source ratings of the PV-battery-CPL bus.
struct CircuitParams {
    double R_line = 0.01;     // [Ohm]
    double L_line = 50e-6;    // [H]
    double L_bat = 100e-6;    // [H]
    double C_bat = 1e-3;      // [F]
    double C_bus = 5e-3;      // [F]
    double U_s = 50.0;        // battery rated voltage [V]
    double I_low = -10.0;     // [A]
    double I_up = 12.0;       // [A]
    double P_base = 1000.0;   // 1 pu [W]

    void validate() const;
};

/// Cascaded PI gains of the battery converter.
struct ControlParams {
    double k_Pv = 0.2;
    double k_Iv = 4.0;
    double k_Pi = 0.01;
    double k_Ii = 20.0;

    void validate() const;
};

/// Modelling switches that sit outside the averaged equations.
struct ModelOptions {
    // Clamp the outer-loop output I_ref to [I_low, I_up].
    bool clamp_current_ref = false;
    // Keep the boost duty ratio of the full model inside [0, 1].
    bool duty_saturation = true;
};

/// One operating mode: a voltage reference with its droop coefficient.
struct ModeDef {
    int sigma = 1;
    double U_ref = 120.0;  // [V]
    double R_d = 0.0;      // [Ohm], zero for constant-voltage modes

    bool is_cv() const { return R_d == 0.0; }
    void validate() const;
};

using ModeTable = std::array<ModeDef, 4>;

/// Everything needed to evaluate a right-hand side.
struct Plant {
    CircuitParams circuit;
    ControlParams control;
    ModelOptions options;

    void validate() const {
        circuit.validate();
        control.validate();
    }
};

ModeTable default_modes();

const ModeDef& mode_at(const ModeTable& modes, int sigma);

double pu_to_watts(double pu, const CircuitParams& c);
double watts_to_pu(double watts, const CircuitParams& c);

}  // namespace dcmg
