#pragma once

#include <array>
#include <complex>
#include <vector>

#include "dcmg/model.hpp"

namespace dcmg {

using Mat2 = std::array<std::array<double, 2>, 2>;

enum class EquilibriumKind { SEP, UEP };

const char* to_string(EquilibriumKind kind);

struct Classification {
    EquilibriumKind kind = EquilibriumKind::UEP;
    std::array<std::complex<double>, 2> eigenvalues{};
    // Some eigenvalue has |Re| below 1e-9.
    bool marginal = false;
};

struct Equilibrium {
    RomState point;
    EquilibriumKind kind = EquilibriumKind::UEP;
    std::array<std::complex<double>, 2> eigenvalues{};
    bool marginal = false;
    ModeDef mode;
    double p_e = 0.0;
};

/// Eigenvalues from trace and determinant; SEP iff both real parts < 0.
Classification classify(const Mat2& j);

/// Closed-form Jacobian of the reduced model at a constant-voltage equilibrium.
Mat2 jacobian_cv(const ModeDef& m, const Plant& p);

/// Central-difference Jacobian of rom_rhs, per-component relative step.
Mat2 jacobian_numeric(const RomState& s, const ModeDef& m, double p_e, const Plant& p,
                      double rel_step = 1e-6);

/// Unique equilibrium (P_e/U_s, U_ref) of a constant-voltage mode.
Equilibrium cv_equilibrium(double p_e, const ModeDef& m, const Plant& p);

/// Physical (v_bus > 0) equilibria of a droop mode, highest voltage first.
/// A zero discriminant yields one marginal equilibrium.
std::vector<Equilibrium> droop_equilibria(double p_e, const ModeDef& m, const Plant& p);

/// Dispatches on the mode type.
std::vector<Equilibrium> equilibria(double p_e, const ModeDef& m, const Plant& p);

/// Norm of rom_rhs at s, scaled by the magnitude of the terms that cancel.
double relative_residual(const RomState& s, const ModeDef& m, double p_e, const Plant& p);

}  // namespace dcmg
