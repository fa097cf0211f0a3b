#include "dcmg/roa.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dcmg {

Box Box::united(const RomState& s) const {
    Box b = *this;
    b.sv_min = std::min(b.sv_min, s.S_v);
    b.sv_max = std::max(b.sv_max, s.S_v);
    b.v_min = std::min(b.v_min, s.v_bus);
    b.v_max = std::max(b.v_max, s.v_bus);
    return b;
}

void Box::validate() const {
    if (!(sv_max > sv_min && v_max > v_min)) {
        throw std::invalid_argument("box must have positive width and height");
    }
}

const char* to_string(Membership m) {
    switch (m) {
        case Membership::Inside: return "inside";
        case Membership::Outside: return "outside";
        case Membership::Undecided: return "undecided";
        case Membership::Invalid: return "invalid";
    }
    return "?";
}

const char* to_string(CellLabel l) {
    switch (l) {
        case CellLabel::Inside: return "inside";
        case CellLabel::Outside: return "outside";
        case CellLabel::BoundaryBand: return "boundary-band";
        case CellLabel::Invalid: return "invalid";
        case CellLabel::Undecided: return "undecided";
    }
    return "?";
}

std::optional<Equilibrium> context_saddle(const RoaContext& ctx, const Plant& p) {
    const auto esep = esep_of(ctx.p_e, ctx.strategy, p);
    const ModeDef& mode = ctx.strategy.mode_def(esep.sigma);
    if (mode.is_cv()) return std::nullopt;
    for (const auto& eq : droop_equilibria(ctx.p_e, mode, p)) {
        if (eq.kind == EquilibriumKind::UEP && ctx.strategy.mode_of(eq.point.v_bus) == esep.sigma) {
            return eq;
        }
    }
    return std::nullopt;
}

VerdictConfig oracle_verdict_for(const RoaContext& ctx, const Plant& p, const RoaConfig& cfg) {
    VerdictConfig vc = cfg.oracle_verdict;
    if (ctx.strategy.frozen_mode()) vc.v_collapse = std::min(vc.v_collapse, cfg.single_mode_v_collapse);
    // With a saddle the region ends at its stable manifold, which the guard must not cut.
    if (auto s = context_saddle(ctx, p)) vc.v_collapse = std::min(vc.v_collapse, 0.5 * s->point.v_bus);
    return vc;
}

namespace {

// Point where the segment a->b (a inside, b outside) leaves the box.
RomState clip_to_box(const RomState& a, const RomState& b, const Box& box) {
    double t = 1.0;
    auto limit = [&](double from, double to, double lo, double hi) {
        const double d = to - from;
        if (d > 0.0 && to > hi) t = std::min(t, (hi - from) / d);
        if (d < 0.0 && to < lo) t = std::min(t, (lo - from) / d);
    };
    limit(a.S_v, b.S_v, box.sv_min, box.sv_max);
    limit(a.v_bus, b.v_bus, box.v_min, box.v_max);
    t = std::clamp(t, 0.0, 1.0);
    return {a.S_v + t * (b.S_v - a.S_v), a.v_bus + t * (b.v_bus - a.v_bus)};
}

std::array<double, 2> stable_direction(const Mat2& j, double lambda) {
    const std::array<double, 2> r0{j[0][1], lambda - j[0][0]};
    const std::array<double, 2> r1{lambda - j[1][1], j[1][0]};
    auto norm = [](const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); };
    auto v = norm(r0) >= norm(r1) ? r0 : r1;
    const double n = norm(v);
    return {v[0] / n, v[1] / n};
}

}  // namespace

RoaBoundary trace_stability_boundary(const RoaContext& ctx, const Plant& p, const Box& box, const RoaConfig& cfg) {
    box.validate();
    RoaBoundary out;
    out.box = box;
    const auto saddle = context_saddle(ctx, p);
    if (!saddle) {
        out.unbounded = true;
        out.note = "expected mode has no saddle inside its own voltage band";
        return out;
    }
    if (!box.contains(saddle->point)) {
        throw std::invalid_argument("the UEP lies outside the tracing box");
    }
    out.uep = saddle;
    const ModeDef& mode = saddle->mode;
    const Mat2 j = jacobian_numeric(saddle->point, mode, ctx.p_e, p);
    const auto cls = classify(j);
    const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if (!(det < 0.0) || cls.eigenvalues[1].imag() != 0.0) {
        throw std::runtime_error("UEP is not a saddle; no stable eigenvector to seed from");
    }
    const double lambda_s = cls.eigenvalues[1].real();
    const auto dir = stable_direction(j, lambda_s);
    const double eps = cfg.seed_scale * std::hypot(saddle->point.S_v, saddle->point.v_bus);
    out.seed_offset = eps;

    VerdictConfig vc;
    vc.v_collapse = 0.0;
    vc.v_ceiling = 1e12;
    vc.max_switches = cfg.max_trace_steps;
    IntegratorConfig icfg = cfg.trace_integrator;
    icfg.max_steps = cfg.max_trace_steps;

    for (int k = 0; k < 2; ++k) {
        const double sign = k == 0 ? 1.0 : -1.0;
        const RomState seed{saddle->point.S_v + sign * eps * dir[0], saddle->point.v_bus + sign * eps * dir[1]};
        out.seeds[static_cast<std::size_t>(k)] = seed;

        Trajectory<2> traj;
        double arc = 0.0;
        std::size_t steps = 0;
        auto prev = box.normalize(seed);
        Observer<2> stop_rule = [&](double, const Vec<2>& x) {
            const RomState s = RomState::from(x);
            const auto u = box.normalize(s);
            arc += std::hypot(u[0] - prev[0], u[1] - prev[1]);
            prev = u;
            return box.contains(s) && arc < cfg.max_arc_length && ++steps < cfg.max_trace_steps;
        };
        switched_flow<RomModel>(traj, seed.vec(), 0.0, -cfg.max_trace_time, ctx.strategy, ctx.p_e, p, icfg, vc,
                                stop_rule);

        Polyline line;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const RomState s = RomState::from(traj.x[i]);
            if (box.contains(s)) {
                line.push_back(s);
            } else {
                if (!line.empty()) line.push_back(clip_to_box(line.back(), s, box));
                break;
            }
        }
        out.branches.push_back(std::move(line));
        out.branch_switches.push_back(traj.switches);
    }
    return out;
}

Membership roa_contains(const RomState& point, const RoaContext& ctx, const Plant& p, const RoaConfig& cfg) {
    if (!(point.v_bus > 0.0) || !std::isfinite(point.S_v)) return Membership::Invalid;
    const VerdictConfig vc = oracle_verdict_for(ctx, p, cfg);
    const auto run = simulate_switched<RomModel>(point.vec(), ctx.strategy, EcplProfile::constant(ctx.p_e), p,
                                                 cfg.oracle_integrator, vc);
    switch (run.verdict.outcome) {
        case Outcome::Stable: return Membership::Inside;
        case Outcome::Unstable: return Membership::Outside;
        case Outcome::Undecided: return Membership::Undecided;
    }
    return Membership::Undecided;
}

RomState MembershipGrid::cell_center(std::size_t i_sv, std::size_t j_v) const {
    return {box.sv_min + (static_cast<double>(i_sv) + 0.5) * box.width() / static_cast<double>(n_sv),
            box.v_min + (static_cast<double>(j_v) + 0.5) * box.height() / static_cast<double>(n_v)};
}

std::size_t MembershipGrid::count(CellLabel l) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

namespace {

CellLabel label_of(Membership m) {
    switch (m) {
        case Membership::Inside: return CellLabel::Inside;
        case Membership::Outside: return CellLabel::Outside;
        case Membership::Undecided: return CellLabel::Undecided;
        case Membership::Invalid: return CellLabel::Invalid;
    }
    return CellLabel::Undecided;
}

MembershipGrid empty_grid(const Box& box, std::size_t n_sv, std::size_t n_v) {
    box.validate();
    if (n_sv < 2 || n_v < 2) {
        throw std::invalid_argument("grid resolution must be at least 2x2");
    }
    MembershipGrid g;
    g.box = box;
    g.n_sv = n_sv;
    g.n_v = n_v;
    g.labels.assign(n_sv * n_v, CellLabel::Undecided);
    return g;
}

// Cells within one cell diagonal of a traced branch become boundary-band.
void mark_boundary_band(MembershipGrid& g, const RoaContext& ctx, const Plant& p, const RoaConfig& cfg) {
    const auto saddle = context_saddle(ctx, p);
    if (!saddle) return;
    const RoaBoundary b = trace_stability_boundary(ctx, p, g.box.united(saddle->point), cfg);
    const double du = 1.0 / static_cast<double>(g.n_sv);
    const double dv = 1.0 / static_cast<double>(g.n_v);
    const double reach = std::hypot(du, dv);
    for (const auto& line : b.branches) {
        for (std::size_t k = 0; k + 1 < line.size(); ++k) {
            const auto a = g.box.normalize(line[k]);
            const auto c = g.box.normalize(line[k + 1]);
            const double lo_u = std::min(a[0], c[0]) - reach, hi_u = std::max(a[0], c[0]) + reach;
            const double lo_v = std::min(a[1], c[1]) - reach, hi_v = std::max(a[1], c[1]) + reach;
            if (hi_u < 0.0 || lo_u > 1.0 || hi_v < 0.0 || lo_v > 1.0) continue;
            const auto i0 = static_cast<std::size_t>(std::max(0.0, std::floor(lo_u / du)));
            const auto i1 = std::min(g.n_sv - 1, static_cast<std::size_t>(std::max(0.0, std::floor(hi_u / du))));
            const auto j0 = static_cast<std::size_t>(std::max(0.0, std::floor(lo_v / dv)));
            const auto j1 = std::min(g.n_v - 1, static_cast<std::size_t>(std::max(0.0, std::floor(hi_v / dv))));
            const double ex = c[0] - a[0], ey = c[1] - a[1];
            const double len2 = ex * ex + ey * ey;
            for (std::size_t j = j0; j <= j1; ++j) {
                for (std::size_t i = i0; i <= i1; ++i) {
                    auto& lab = g.labels[j * g.n_sv + i];
                    if (lab == CellLabel::Invalid) continue;
                    const double cx = (static_cast<double>(i) + 0.5) * du;
                    const double cy = (static_cast<double>(j) + 0.5) * dv;
                    double t = len2 > 0.0 ? ((cx - a[0]) * ex + (cy - a[1]) * ey) / len2 : 0.0;
                    t = std::clamp(t, 0.0, 1.0);
                    if (std::hypot(cx - a[0] - t * ex, cy - a[1] - t * ey) <= reach) lab = CellLabel::BoundaryBand;
                }
            }
        }
    }
}

}  // namespace

MembershipGrid roa_grid(const RoaContext& ctx, const Box& box, std::size_t n_sv, std::size_t n_v, const Plant& p,
                        const RoaConfig& cfg, std::uint64_t seed) {
    MembershipGrid g = empty_grid(box, n_sv, n_v);
    const std::size_t n = g.labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), std::mt19937_64(seed));

#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
        const std::size_t idx = order[static_cast<std::size_t>(k)];
        const RomState c = g.cell_center(idx % n_sv, idx / n_sv);
        g.labels[idx] = label_of(roa_contains(c, ctx, p, cfg));
    }
    mark_boundary_band(g, ctx, p, cfg);
    return g;
}

MembershipGrid roa_grid_serial(const RoaContext& ctx, const Box& box, std::size_t n_sv, std::size_t n_v,
                               const Plant& p, const RoaConfig& cfg) {
    MembershipGrid g = empty_grid(box, n_sv, n_v);
    for (std::size_t j = 0; j < n_v; ++j) {
        for (std::size_t i = 0; i < n_sv; ++i) {
            g.labels[j * n_sv + i] = label_of(roa_contains(g.cell_center(i, j), ctx, p, cfg));
        }
    }
    mark_boundary_band(g, ctx, p, cfg);
    return g;
}

double area_estimate(const MembershipGrid& grid) {
    return static_cast<double>(grid.count(CellLabel::Inside)) * grid.cell_area();
}

AgreementReport oracle_agreement(const RoaBoundary& boundary, const RoaContext& ctx, const Plant& p,
                                 const RoaConfig& cfg, double rel_offset, std::size_t samples_per_branch) {
    AgreementReport rep;
    if (boundary.branches.empty()) return rep;
    const Box& box = boundary.box;

    // One curve through the UEP: first branch reversed, then the second.
    std::vector<std::array<double, 2>> curve;
    std::vector<std::size_t> picks;
    const auto& b0 = boundary.branches[0];
    for (auto it = b0.rbegin(); it != b0.rend(); ++it) curve.push_back(box.normalize(*it));
    const std::size_t split = curve.size();
    if (boundary.branches.size() > 1) {
        for (const auto& s : boundary.branches[1]) curve.push_back(box.normalize(s));
    }
    if (curve.size() < 3) return rep;
    // Samples evenly spaced in arc length along each branch.
    auto pick_range = [&](std::size_t lo, std::size_t hi) {
        if (hi <= lo + 2 || samples_per_branch == 0) return;
        std::vector<double> cum(hi - lo, 0.0);
        for (std::size_t k = lo + 1; k < hi; ++k) {
            cum[k - lo] = cum[k - lo - 1] + std::hypot(curve[k][0] - curve[k - 1][0], curve[k][1] - curve[k - 1][1]);
        }
        std::size_t idx = lo + 1;
        for (std::size_t k = 0; k < samples_per_branch; ++k) {
            const double target = cum.back() * (static_cast<double>(k) + 0.5) / static_cast<double>(samples_per_branch);
            while (idx < hi - 2 && cum[idx - lo] < target) ++idx;
            picks.push_back(idx);
        }
    };
    pick_range(0, split);
    pick_range(split, curve.size());
    std::sort(picks.begin(), picks.end());
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());

    // Side of the ESEP relative to the nearest curve segment.
    const auto e = box.normalize(esep_of(ctx.p_e, ctx.strategy, p).eq.point);
    double best = 1e300;
    int esep_side = 1;
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        const auto& a = curve[k];
        const auto& c = curve[k + 1];
        const double ex = c[0] - a[0], ey = c[1] - a[1];
        const double len2 = ex * ex + ey * ey;
        if (len2 == 0.0) continue;
        const double t = std::clamp(((e[0] - a[0]) * ex + (e[1] - a[1]) * ey) / len2, 0.0, 1.0);
        const double d = std::hypot(e[0] - a[0] - t * ex, e[1] - a[1] - t * ey);
        if (d < best) {
            best = d;
            esep_side = (ex * (e[1] - a[1]) - ey * (e[0] - a[0])) >= 0.0 ? 1 : -1;
        }
    }

    const double delta = rel_offset * std::sqrt(2.0);
    struct Probe {
        RomState point;
        bool inside_side;
    };
    std::vector<Probe> probes;
    for (std::size_t idx : picks) {
        const auto& prev = curve[idx == 0 ? 0 : idx - 1];
        const auto& next = curve[std::min(idx + 1, curve.size() - 1)];
        double tx = next[0] - prev[0], ty = next[1] - prev[1];
        const double tl = std::hypot(tx, ty);
        if (tl == 0.0) continue;
        tx /= tl;
        ty /= tl;
        const std::array<double, 2> left{curve[idx][0] - delta * ty, curve[idx][1] + delta * tx};
        const std::array<double, 2> right{curve[idx][0] + delta * ty, curve[idx][1] - delta * tx};
        for (int side : {1, -1}) {
            const auto& u = side > 0 ? left : right;
            if (u[0] < 0.0 || u[0] > 1.0 || u[1] < 0.0 || u[1] > 1.0) {
                ++rep.skipped;
                continue;
            }
            probes.push_back({box.denormalize(u), side == esep_side});
        }
    }

    std::vector<Membership> result(probes.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(probes.size()); ++k) {
        result[static_cast<std::size_t>(k)] = roa_contains(probes[static_cast<std::size_t>(k)].point, ctx, p, cfg);
    }
    for (std::size_t k = 0; k < probes.size(); ++k) {
        if (result[k] == Membership::Invalid) {
            ++rep.skipped;
            continue;
        }
        if (probes[k].inside_side) {
            ++rep.inside_samples;
            if (result[k] == Membership::Inside) ++rep.inside_agree;
        } else {
            ++rep.outside_samples;
            if (result[k] == Membership::Outside) ++rep.outside_agree;
        }
    }
    return rep;
}

}  // namespace dcmg
