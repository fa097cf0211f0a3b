#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dcmg/params.hpp"

namespace dcmg {

template <std::size_t N>
using Vec = std::array<double, N>;

/// Slow states of the reduced-order model.
struct RomState {
    double S_v = 0.0;    // outer-loop integrator output [A]
    double v_bus = 0.0;  // [V]

    Vec<2> vec() const { return {S_v, v_bus}; }
    static RomState from(const Vec<2>& x) { return {x[0], x[1]}; }
};

/// States of the averaged full-order model.
struct FullState {
    double S_v = 0.0;     // [A]
    double S_i = 0.0;     // inner-loop integrator output (duty)
    double i_bat = 0.0;   // [A]
    double v_bat = 0.0;   // [V]
    double i_line = 0.0;  // [A]
    double v_bus = 0.0;   // [V]

    Vec<6> vec() const { return {S_v, S_i, i_bat, v_bat, i_line, v_bus}; }
    static FullState from(const Vec<6>& x) { return {x[0], x[1], x[2], x[3], x[4], x[5]}; }
    RomState slow() const { return {S_v, v_bus}; }
};

/// Step-wise equivalent constant power load P_e(t).
class EcplProfile {
public:
    struct Segment {
        double t_start;
        double p_e;  // [W]
    };

    explicit EcplProfile(std::vector<Segment> segments);

    static EcplProfile constant(double p_e) { return EcplProfile({{0.0, p_e}}); }
    static EcplProfile step(double p_before, double p_after, double t_step) {
        return EcplProfile({{0.0, p_before}, {t_step, p_after}});
    }

    double at(double t) const;
    double final_power() const { return segments_.back().p_e; }
    double last_step_time() const { return segments_.back().t_start; }
    const std::vector<Segment>& segments() const { return segments_; }

private:
    std::vector<Segment> segments_;
};

/// Net load seen by the bus: CPL consumption minus PV injection.
double ecpl_power(double p_cpl, double p_pv);

/// Algebraic line current of the reduced model. Throws std::domain_error
/// when the denominator v_bus + U_s*k_Pv*R_d is not positive.
double rom_line_current(const RomState& s, const ModeDef& m, const Plant& p);

/// Outer-loop output I_ref = S_v + k_Pv (U_ref - R_d i_line - v_bus).
double current_reference(const RomState& s, const ModeDef& m, const Plant& p);

RomState rom_rhs(const RomState& s, const ModeDef& m, double p_e, const Plant& p);

FullState full_rhs(const FullState& s, const ModeDef& m, double p_e, const Plant& p);

/// Duty ratio commanded by the inner current loop at state s.
double duty_ratio(const FullState& s, const ModeDef& m, const Plant& p);

/// Algebraic steady state of the full model (keeps R_line).
FullState full_steady_state(const ModeDef& m, double p_e, const Plant& p);

/// Adapters used by the generic switched-flow machinery.
struct RomModel {
    static constexpr std::size_t N = 2;
    static constexpr std::size_t v_index = 1;
    static Vec<N> rhs(const Vec<N>& x, const ModeDef& m, double p_e, const Plant& p) {
        return rom_rhs(RomState::from(x), m, p_e, p).vec();
    }
    static double v_bus(const Vec<N>& x) { return x[1]; }
    static RomState slow(const Vec<N>& x) { return RomState::from(x); }
};

struct FullModel {
    static constexpr std::size_t N = 6;
    static constexpr std::size_t v_index = 5;
    static Vec<N> rhs(const Vec<N>& x, const ModeDef& m, double p_e, const Plant& p) {
        return full_rhs(FullState::from(x), m, p_e, p).vec();
    }
    static double v_bus(const Vec<N>& x) { return x[5]; }
    static RomState slow(const Vec<N>& x) { return {x[0], x[5]}; }
};

}  // namespace dcmg
