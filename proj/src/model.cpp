#include "dcmg/model.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcmg {

EcplProfile::EcplProfile(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) {
        throw std::invalid_argument("ECPL profile needs at least one segment");
    }
    if (segments_.front().t_start != 0.0) {
        throw std::invalid_argument("ECPL profile must start at t = 0");
    }
    for (std::size_t i = 1; i < segments_.size(); ++i) {
        if (!(segments_[i].t_start > segments_[i - 1].t_start)) {
            throw std::invalid_argument("ECPL segment start times must be strictly increasing");
        }
    }
}

double EcplProfile::at(double t) const {
    double p = segments_.front().p_e;
    for (const auto& seg : segments_) {
        if (t >= seg.t_start) {
            p = seg.p_e;
        } else {
            break;
        }
    }
    return p;
}

double ecpl_power(double p_cpl, double p_pv) { return p_cpl - p_pv; }

namespace {

struct RomAlgebra {
    double i_line;
    double i_ref;
};

RomAlgebra rom_algebra(const RomState& s, const ModeDef& m, const Plant& p) {
    const auto& c = p.circuit;
    const auto& k = p.control;
    if (!(s.v_bus > 0.0)) {
        throw std::domain_error(fmt::format("v_bus = {} left the model's validity region", s.v_bus));
    }
    const double denom = s.v_bus + c.U_s * k.k_Pv * m.R_d;
    if (!(denom > 0.0)) {
        throw std::domain_error("v_bus + U_s k_Pv R_d must be positive");
    }
    double i_line = c.U_s / denom * (s.S_v + k.k_Pv * (m.U_ref - s.v_bus));
    double i_ref = s.S_v + k.k_Pv * (m.U_ref - m.R_d * i_line - s.v_bus);
    if (p.options.clamp_current_ref && (i_ref < c.I_low || i_ref > c.I_up)) {
        i_ref = std::clamp(i_ref, c.I_low, c.I_up);
        i_line = c.U_s * i_ref / s.v_bus;
    }
    return {i_line, i_ref};
}

}  // namespace

double rom_line_current(const RomState& s, const ModeDef& m, const Plant& p) {
    return rom_algebra(s, m, p).i_line;
}

double current_reference(const RomState& s, const ModeDef& m, const Plant& p) {
    return rom_algebra(s, m, p).i_ref;
}

RomState rom_rhs(const RomState& s, const ModeDef& m, double p_e, const Plant& p) {
    const auto alg = rom_algebra(s, m, p);
    return {
        p.control.k_Iv * (m.U_ref - m.R_d * alg.i_line - s.v_bus),
        (alg.i_line - p_e / s.v_bus) / p.circuit.C_bus,
    };
}

namespace {

double outer_loop_ref(const FullState& s, const Plant& p, double u_oref) {
    double i_ref = s.S_v + p.control.k_Pv * (u_oref - s.v_bat);
    if (p.options.clamp_current_ref) {
        i_ref = std::clamp(i_ref, p.circuit.I_low, p.circuit.I_up);
    }
    return i_ref;
}

}  // namespace

double duty_ratio(const FullState& s, const ModeDef& m, const Plant& p) {
    const double u_oref = m.U_ref - m.R_d * s.i_line;
    const double i_ref = outer_loop_ref(s, p, u_oref);
    double d = s.S_i + p.control.k_Pi * (i_ref - s.i_bat);
    if (p.options.duty_saturation) {
        d = std::clamp(d, 0.0, 1.0);
    }
    return d;
}

FullState full_rhs(const FullState& s, const ModeDef& m, double p_e, const Plant& p) {
    const auto& c = p.circuit;
    const auto& k = p.control;
    if (!(s.v_bus > 0.0)) {
        throw std::domain_error(fmt::format("v_bus = {} left the model's validity region", s.v_bus));
    }
    const double u_oref = m.U_ref - m.R_d * s.i_line;
    const double i_ref = outer_loop_ref(s, p, u_oref);
    const double d = duty_ratio(s, m, p);
    return {
        k.k_Iv * (u_oref - s.v_bat),
        k.k_Ii * (i_ref - s.i_bat),
        (c.U_s - (1.0 - d) * s.v_bat) / c.L_bat,
        ((1.0 - d) * s.i_bat - s.i_line) / c.C_bat,
        (s.v_bat - c.R_line * s.i_line - s.v_bus) / c.L_line,
        (s.i_line - p_e / s.v_bus) / c.C_bus,
    };
}

FullState full_steady_state(const ModeDef& m, double p_e, const Plant& p) {
    const auto& c = p.circuit;
    // v_bus^2 - U_ref v_bus + (R_d + R_line) P_e = 0, high-voltage root.
    const double r = m.R_d + c.R_line;
    const double disc = m.U_ref * m.U_ref - 4.0 * r * p_e;
    if (disc < 0.0) {
        throw std::domain_error("full model has no steady state for this load");
    }
    FullState s;
    s.v_bus = 0.5 * (m.U_ref + std::sqrt(disc));
    s.i_line = p_e / s.v_bus;
    s.v_bat = m.U_ref - m.R_d * s.i_line;
    if (!(s.v_bat > c.U_s)) {
        throw std::domain_error("steady state requires v_bat above the battery voltage");
    }
    const double d = 1.0 - c.U_s / s.v_bat;
    s.i_bat = s.i_line / (1.0 - d);
    s.S_v = s.i_bat;
    s.S_i = d;
    return s;
}

}  // namespace dcmg
