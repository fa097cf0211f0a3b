#include "dcmg/switched.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcmg {

void VerdictConfig::validate() const {
    if (!(v_collapse >= 0.0 && v_ceiling > v_collapse)) {
        throw std::invalid_argument("verdict: need 0 <= v_collapse < v_ceiling");
    }
    if (!(band_v > 0.0 && band_sv > 0.0 && sv_floor > 0.0 && window > 0.0 && horizon > 0.0)) {
        throw std::invalid_argument("verdict: bands, window and horizon must be > 0");
    }
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Stable: return "Stable";
        case Outcome::Unstable: return "Unstable";
        case Outcome::Undecided: return "Undecided";
    }
    return "?";
}

bool within_band(const RomState& s, const RomState& target, double p_e, const Plant& p, const VerdictConfig& vc) {
    const double sv_scale = std::max(std::abs(p_e) / p.circuit.U_s, vc.sv_floor);
    return std::abs(s.v_bus - target.v_bus) <= vc.band_v * std::abs(target.v_bus) &&
           std::abs(s.S_v - target.S_v) <= vc.band_sv * sv_scale;
}

namespace {

// False when the SEP sits on a band edge and the adjacent mode drives v_bus
// away from it.
bool attracting_at_edge(const Equilibrium& eq, int sigma, const SwitchingStrategy& strat, const Plant& p) {
    const double v = eq.point.v_bus;
    const double dv = 1e-9 * std::max(1.0, std::abs(v));
    for (double side : {+1.0, -1.0}) {
        const int other = strat.mode_of(v + side * dv);
        if (other == sigma) continue;
        const ModeDef& m = strat.mode_def(other);
        const double i_line = rom_line_current(eq.point, m, p);
        const double drift = i_line - eq.p_e / v;  // C_bus dv/dt
        const double scale = std::abs(i_line) + std::abs(eq.p_e / v);
        if (side * drift > 1e-9 * scale) return false;
    }
    return true;
}

}  // namespace

ExpectedSep esep_of(double p_final, const SwitchingStrategy& strat, const Plant& p) {
    std::vector<ExpectedSep> found;
    if (auto frozen = strat.frozen_mode()) {
        for (const auto& eq : equilibria(p_final, strat.mode_def(*frozen), p)) {
            if (eq.kind == EquilibriumKind::SEP) {
                found.push_back({*frozen, eq});
                break;
            }
        }
    } else {
        for (int sigma = 1; sigma <= 4; ++sigma) {
            for (const auto& eq : equilibria(p_final, strat.mode_def(sigma), p)) {
                if (eq.kind != EquilibriumKind::SEP) continue;
                if (strat.mode_of(eq.point.v_bus) != sigma) continue;
                if (!attracting_at_edge(eq, sigma, strat, p)) continue;
                found.push_back({sigma, eq});
            }
        }
    }
    if (found.empty()) {
        throw std::runtime_error(fmt::format("no expected SEP for P_e = {} W under {}", p_final, strat.describe()));
    }
    if (found.size() > 1) {
        throw std::runtime_error(fmt::format("expected SEP for P_e = {} W is ambiguous ({} modes qualify)", p_final,
                                             found.size()));
    }
    return found.front();
}

RomState isep_of(int sigma, double p_e, const ModeTable& modes, const Plant& p) {
    for (const auto& eq : equilibria(p_e, mode_at(modes, sigma), p)) {
        if (eq.kind == EquilibriumKind::SEP) return eq.point;
    }
    throw std::runtime_error(fmt::format("mode {} has no SEP at P_e = {} W", sigma, p_e));
}

FullState isep_full_of(int sigma, double p_e, const ModeTable& modes, const Plant& p) {
    isep_of(sigma, p_e, modes, p);
    return full_steady_state(mode_at(modes, sigma), p_e, p);
}

}  // namespace dcmg
