#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcmg/switched.hpp"

namespace dcmg {

/// Axis-aligned region of the (S_v, v_bus) plane.
struct Box {
    double sv_min = -60.0;
    double sv_max = 60.0;
    double v_min = 0.0;
    double v_max = 200.0;

    bool contains(const RomState& s) const {
        return s.S_v >= sv_min && s.S_v <= sv_max && s.v_bus >= v_min && s.v_bus <= v_max;
    }
    double width() const { return sv_max - sv_min; }
    double height() const { return v_max - v_min; }
    // Coordinates scaled so the box is the unit square.
    std::array<double, 2> normalize(const RomState& s) const {
        return {(s.S_v - sv_min) / width(), (s.v_bus - v_min) / height()};
    }
    RomState denormalize(const std::array<double, 2>& u) const {
        return {sv_min + u[0] * width(), v_min + u[1] * height()};
    }
    Box united(const RomState& s) const;
    void validate() const;
};

/// The ESEP whose region of attraction is examined: a strategy and the
/// constant post-disturbance load.
struct RoaContext {
    SwitchingStrategy strategy;
    double p_e;  // [W]
};

struct RoaConfig {
    IntegratorConfig oracle_integrator = [] {
        IntegratorConfig c;
        c.rel_tol = 1e-7;
        c.abs_tol = 1e-8;
        return c;
    }();
    // Verdict rules for switched contexts: the same collapse definition as a
    // case simulation.
    VerdictConfig oracle_verdict;
    // Single-mode contexts drop the collapse guard to this voltage. Any context
    // with a saddle also drops it below half the saddle voltage, so the region
    // is bounded by the stable manifold rather than by the guard.
    double single_mode_v_collapse = 0.3;  // [V]

    IntegratorConfig trace_integrator = [] {
        IntegratorConfig c;
        c.rel_tol = 1e-9;
        c.abs_tol = 1e-10;
        c.h_max = 1e-3;
        return c;
    }();
    double seed_scale = 1e-3;       // seed offset relative to |x_UEP|
    double max_trace_time = 50.0;   // [s] reversed time
    std::size_t max_trace_steps = 1'000'000;
    double max_arc_length = 20.0;   // in box-normalised units
};

using Polyline = std::vector<RomState>;

struct RoaBoundary {
    std::vector<Polyline> branches;
    std::vector<std::vector<SwitchEvent>> branch_switches;
    std::optional<Equilibrium> uep;
    std::array<RomState, 2> seeds{};
    double seed_offset = 0.0;
    Box box;
    // No saddle of the expected mode inside the context: the region is limited
    // only by the box (or by collapse, resolved through roa_contains).
    bool unbounded = false;
    std::string note;
};

/// The droop saddle of the expected mode, when it is an equilibrium of the
/// context's switched field.
std::optional<Equilibrium> context_saddle(const RoaContext& ctx, const Plant& p);

/// Traces the stable manifold of the context's saddle backward in time
/// through the switched field. Throws std::runtime_error when the UEP is not a
/// saddle and std::invalid_argument when it lies outside the box.
RoaBoundary trace_stability_boundary(const RoaContext& ctx, const Plant& p, const Box& box,
                                     const RoaConfig& cfg = {});

enum class Membership { Inside, Outside, Undecided, Invalid };
const char* to_string(Membership m);

/// Forward-simulation oracle: Inside iff the run converges to the ESEP.
Membership roa_contains(const RomState& point, const RoaContext& ctx, const Plant& p, const RoaConfig& cfg = {});

/// Verdict settings the oracle actually uses for this context.
VerdictConfig oracle_verdict_for(const RoaContext& ctx, const Plant& p, const RoaConfig& cfg);

enum class CellLabel : std::uint8_t { Inside, Outside, BoundaryBand, Invalid, Undecided };
const char* to_string(CellLabel l);

struct MembershipGrid {
    Box box;
    std::size_t n_sv = 0;
    std::size_t n_v = 0;
    std::vector<CellLabel> labels;  // index = j_v * n_sv + i_sv

    RomState cell_center(std::size_t i_sv, std::size_t j_v) const;
    double cell_area() const { return (box.width() / n_sv) * (box.height() / n_v); }
    CellLabel at(std::size_t i_sv, std::size_t j_v) const { return labels[j_v * n_sv + i_sv]; }
    std::size_t count(CellLabel l) const;
};

/// Labels every cell centre with the oracle; OpenMP over cells. The seed only
/// permutes the evaluation order.
MembershipGrid roa_grid(const RoaContext& ctx, const Box& box, std::size_t n_sv, std::size_t n_v, const Plant& p,
                        const RoaConfig& cfg = {}, std::uint64_t seed = 0);

/// Reference implementation: same labels, one cell at a time in index order.
MembershipGrid roa_grid_serial(const RoaContext& ctx, const Box& box, std::size_t n_sv, std::size_t n_v,
                               const Plant& p, const RoaConfig& cfg = {});

/// Inside-cell count times cell area.
double area_estimate(const MembershipGrid& grid);

struct AgreementReport {
    std::size_t inside_samples = 0;
    std::size_t inside_agree = 0;
    std::size_t outside_samples = 0;
    std::size_t outside_agree = 0;
    std::size_t skipped = 0;
    double inside_fraction() const { return inside_samples ? double(inside_agree) / inside_samples : 0.0; }
    double outside_fraction() const { return outside_samples ? double(outside_agree) / outside_samples : 0.0; }
};

/// Offsets samples by +/- rel_offset of the box diagonal (box-normalised)
/// normal to the traced boundary and checks them against roa_contains.
AgreementReport oracle_agreement(const RoaBoundary& boundary, const RoaContext& ctx, const Plant& p,
                                 const RoaConfig& cfg = {}, double rel_offset = 0.02,
                                 std::size_t samples_per_branch = 40);

}  // namespace dcmg
