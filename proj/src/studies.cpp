#include "dcmg/studies.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcmg {

const char* to_string(ModelKind m) { return m == ModelKind::Rom ? "rom" : "full"; }

SwitchingStrategy StudyContext::strategy(StrategyKind kind) const {
    switch (kind) {
        case StrategyKind::Baseline: return SwitchingStrategy::baseline(thresholds, modes);
        case StrategyKind::Scheduled: return SwitchingStrategy::scheduled(thresholds, modes);
        case StrategyKind::Custom: break;
    }
    throw std::invalid_argument("studies run only the baseline or scheduled strategy");
}

void StudyContext::validate() const {
    plant.validate();
    for (const auto& m : modes) m.validate();
    thresholds.validate();
    integrator.validate();
    verdict.validate();
}

std::vector<CaseSpec> table2_cases() {
    struct Row {
        const char* id;
        int a, b;
        double p0, p1;
    };
    // "+" rows step away from the ISEP's mode towards a heavier load.
    const Row plus[] = {
        {"1+", 1, 2, -1.5, -0.1}, {"2+", 1, 3, -1.2, 0.1}, {"3+", 1, 4, -1.5, 1.2},
        {"4+", 2, 3, -0.4, 0.9},  {"5+", 2, 4, -0.1, 1.2}, {"6+", 3, 4, 0.1, 1.3},
    };
    std::vector<CaseSpec> out;
    for (const auto& r : plus) {
        CaseSpec up;
        up.id = r.id;
        up.sigma_from = r.a;
        up.sigma_to = r.b;
        up.pe_before_pu = r.p0;
        up.pe_after_pu = r.p1;
        up.expected = Outcome::Unstable;
        if (up.id == "2+" || up.id == "5+" || up.id == "6+") up.expected_scheduled = Outcome::Stable;

        CaseSpec down;
        down.id = std::string(r.id).replace(1, 1, "-");
        down.sigma_from = r.b;
        down.sigma_to = r.a;
        down.pe_before_pu = r.p1;
        down.pe_after_pu = r.p0;
        down.expected = Outcome::Stable;
        out.push_back(up);
        out.push_back(down);
    }
    return out;
}

const CaseSpec& find_case(const std::vector<CaseSpec>& cases, const std::string& id) {
    for (const auto& c : cases) {
        if (c.id == id) return c;
    }
    throw std::invalid_argument(fmt::format("unknown case id '{}'", id));
}

std::optional<Outcome> expected_outcome(const CaseSpec& spec, StrategyKind kind) {
    if (kind == StrategyKind::Baseline) return spec.expected;
    if (kind == StrategyKind::Scheduled) return spec.expected_scheduled;
    return std::nullopt;
}

CaseRun run_case(const CaseSpec& spec, StrategyKind kind, const StudyContext& ctx, ModelKind model) {
    CaseRun out;
    out.spec = spec;
    out.strategy = kind;
    out.model = model;
    const auto strat = ctx.strategy(kind);
    const auto profile = EcplProfile::step(ctx.watts(spec.pe_before_pu), ctx.watts(spec.pe_after_pu), spec.t_step);
    if (model == ModelKind::Rom) {
        const RomState x0 = isep_of(spec.sigma_from, profile.segments().front().p_e, ctx.modes, ctx.plant);
        auto run = simulate_switched<RomModel>(x0.vec(), strat, profile, ctx.plant, ctx.integrator, ctx.verdict);
        out.verdict = std::move(run.verdict);
        out.rom = std::move(run.trajectory);
    } else {
        const FullState x0 = isep_full_of(spec.sigma_from, profile.segments().front().p_e, ctx.modes, ctx.plant);
        auto run = simulate_switched<FullModel>(x0.vec(), strat, profile, ctx.plant, ctx.integrator, ctx.verdict);
        out.verdict = std::move(run.verdict);
        out.full = std::move(run.trajectory);
    }
    if (auto e = expected_outcome(spec, kind)) out.match = out.verdict.outcome == *e;
    return out;
}

Table2Report run_table2(StrategyKind kind, const StudyContext& ctx, const std::vector<CaseSpec>& cases,
                        bool keep_trajectories) {
    Table2Report rep;
    rep.strategy = kind;
    rep.rows.resize(cases.size());
    std::vector<std::string> errors(cases.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cases.size()); ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            rep.rows[k] = run_case(cases[k], kind, ctx);
            if (!keep_trajectories) {
                rep.rows[k].rom = {};
                rep.rows[k].full = {};
            }
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    for (std::size_t k = 0; k < cases.size(); ++k) {
        if (!errors[k].empty()) throw std::runtime_error(fmt::format("case {}: {}", cases[k].id, errors[k]));
        const auto& row = rep.rows[k];
        if (row.match.value_or(true)) {
            if (row.match) ++rep.matches;
        } else {
            rep.mismatches.push_back(row.spec.id);
        }
    }
    return rep;
}

namespace {

bool stable_after_step(ModelKind model, const SwitchingStrategy& strat, const ModeDef& mode, double p0, double p1,
                       double t_step, const StudyContext& ctx) {
    const auto profile = EcplProfile::step(p0, p1, t_step);
    if (model == ModelKind::Rom) {
        const RomState x0 = isep_of(mode.sigma, p0, ctx.modes, ctx.plant);
        return simulate_switched<RomModel>(x0.vec(), strat, profile, ctx.plant, ctx.integrator, ctx.verdict)
                   .verdict.outcome == Outcome::Stable;
    }
    const FullState x0 = full_steady_state(mode, p0, ctx.plant);
    return simulate_switched<FullModel>(x0.vec(), strat, profile, ctx.plant, ctx.integrator, ctx.verdict)
               .verdict.outcome == Outcome::Stable;
}

}  // namespace

CriticalResult critical_step_search(ModelKind model, int sigma, double pe_start_pu, double lo_pu, double hi_pu,
                                    double tol_pu, const StudyContext& ctx, double t_step) {
    if (!(lo_pu < hi_pu) || !(tol_pu > 0.0)) {
        throw std::invalid_argument("critical search needs lo < hi and tol > 0");
    }
    const auto strat = SwitchingStrategy::frozen(sigma, ctx.modes);
    const ModeDef& mode = strat.mode_def(sigma);
    const double p0 = ctx.watts(pe_start_pu);
    auto stable = [&](double pu) { return stable_after_step(model, strat, mode, p0, ctx.watts(pu), t_step, ctx); };
    const bool lo_stable = stable(lo_pu);
    const bool hi_stable = stable(hi_pu);
    if (lo_stable == hi_stable) {
        throw std::invalid_argument(fmt::format("bracket [{}, {}] pu does not straddle the stability limit", lo_pu,
                                                hi_pu));
    }
    if (!lo_stable) {
        throw std::invalid_argument("the lower bracket end must be the stable one");
    }
    CriticalResult r;
    double lo = lo_pu, hi = hi_pu;
    while (hi - lo > tol_pu) {
        const double mid = 0.5 * (lo + hi);
        (stable(mid) ? lo : hi) = mid;
        ++r.iterations;
    }
    r.stable_pu = lo;
    r.unstable_pu = hi;
    r.critical_pu = 0.5 * (lo + hi);
    return r;
}

FeedbackReport feedback_diagnostic(const Trajectory<2>& traj, const ModeTable& modes, const Plant& p,
                                   double t_from) {
    FeedbackReport rep;
    rep.signature_from = t_from;
    rep.samples.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const RomState s = RomState::from(traj.x[i]);
        const ModeDef& m = mode_at(modes, traj.sigma[i]);
        const double p_e = traj.p_e[i];
        const double i_ref = current_reference(s, m, p);
        const double dv = rom_rhs(s, m, p_e, p).v_bus;
        FeedbackSample fs{traj.t[i], s.v_bus, p_e, p.circuit.U_s * i_ref - p_e, s.v_bus * p.circuit.C_bus * dv};
        const double scale = std::max({std::abs(p.circuit.U_s * i_ref), std::abs(p_e), 1.0});
        rep.max_identity_error = std::max(rep.max_identity_error, std::abs(fs.surplus - fs.capacitor) / scale);
        rep.samples.push_back(fs);
    }
    std::size_t considered = 0;
    const FeedbackSample* prev = nullptr;
    for (const auto& fs : rep.samples) {
        if (fs.t <= t_from) {
            prev = &fs;
            continue;
        }
        ++considered;
        bool ok = fs.surplus < 0.0;
        if (prev) ok = ok && fs.v_bus <= prev->v_bus;
        if (!ok) ++rep.signature_violations;
        prev = &fs;
    }
    rep.positive_feedback = considered > 1 && rep.signature_violations == 0;
    return rep;
}

double settling_time(const std::vector<double>& t, const std::vector<double>& y, double band_frac) {
    if (t.size() != y.size() || t.empty()) {
        throw std::invalid_argument("settling_time needs matching, non-empty series");
    }
    const double final = y.back();
    double band = band_frac * std::abs(final - y.front());
    if (band == 0.0) band = band_frac * std::abs(final);
    auto outside = [&](std::size_t i) { return std::abs(y[i] - final) > band; };
    std::size_t last = y.size();
    for (std::size_t i = y.size(); i-- > 0;) {
        if (outside(i)) {
            last = i;
            break;
        }
    }
    if (last == y.size()) return 0.0;
    // Entering the band only at the final sample is no evidence of settling.
    if (last + 2 >= y.size()) {
        throw std::runtime_error("response has not settled by the end of the series");
    }
    // Interpolate where |y - final| drops back to the band between last and last+1.
    const double e0 = std::abs(y[last] - final);
    const double e1 = std::abs(y[last + 1] - final);
    const double f = e0 == e1 ? 0.0 : (e0 - band) / (e0 - e1);
    return t[last] + f * (t[last + 1] - t[last]) - t.front();
}

double measure_settling_time(const StudyContext& ctx, int sigma, double pe_before_pu, double pe_after_pu) {
    const auto strat = SwitchingStrategy::frozen(sigma, ctx.modes);
    const ModeDef& mode = strat.mode_def(sigma);
    const double t_step = 0.1;
    const auto profile = EcplProfile::step(ctx.watts(pe_before_pu), ctx.watts(pe_after_pu), t_step);
    const RomState x0 = isep_of(sigma, profile.segments().front().p_e, ctx.modes, ctx.plant);
    Trajectory<2> traj;
    IntegratorConfig icfg = ctx.integrator;
    icfg.h_max = std::min(icfg.h_max, 1e-3);
    VerdictConfig vc = ctx.verdict;
    switched_flow<RomModel>(traj, x0.vec(), 0.0, t_step, strat, profile.segments()[0].p_e, ctx.plant, icfg, vc);
    switched_flow<RomModel>(traj, traj.x.back(), t_step, t_step + 5.0, strat, profile.final_power(), ctx.plant,
                            icfg, vc);
    std::vector<double> t, y;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.t[i] < t_step) continue;
        t.push_back(traj.t[i]);
        y.push_back(current_reference(RomState::from(traj.x[i]), mode, ctx.plant));
    }
    // Measure against the settled value P_e/U_s, starting from the pre-step value.
    y.back() = profile.final_power() / ctx.plant.circuit.U_s;
    y.front() = profile.segments().front().p_e / ctx.plant.circuit.U_s;
    return settling_time(t, y);
}

const char* to_string(SweepParameter s) { return s == SweepParameter::CBus ? "C_bus" : "gain_scale"; }

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    for (double v : values) {
        if (!(v > 0.0)) throw std::invalid_argument("sweep values must be positive");
    }
    if (!std::is_sorted(values.begin(), values.end())) throw std::invalid_argument("sweep values must be sorted");
}

std::vector<SweepPoint> sweep(const SweepSpec& spec, const StudyContext& ctx, const std::vector<CaseSpec>& cases) {
    spec.validate();
    const CaseSpec& base = find_case(cases, spec.base_case);
    std::vector<SweepPoint> out(spec.values.size());
    std::vector<std::string> errors(spec.values.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(spec.values.size()); ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            StudyContext local = ctx;
            const double v = spec.values[k];
            if (spec.parameter == SweepParameter::CBus) {
                local.plant.circuit.C_bus = v;
            } else {
                local.plant.control.k_Pv *= v;
                local.plant.control.k_Iv *= v;
            }
            local.validate();
            const auto run = run_case(base, StrategyKind::Baseline, local);
            out[k] = {v, run.verdict.outcome, run.verdict.trigger, measure_settling_time(local)};
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!errors[k].empty()) {
            throw std::runtime_error(fmt::format("sweep value {}: {}", spec.values[k], errors[k]));
        }
    }
    return out;
}

TransitionCount count_transitions(const std::vector<SweepPoint>& points) {
    TransitionCount c;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto a = points[i - 1].outcome, b = points[i].outcome;
        if (a == Outcome::Unstable && b == Outcome::Stable) ++c.up;
        if (a == Outcome::Stable && b == Outcome::Unstable) ++c.down;
    }
    return c;
}

const char* to_string(PremiseStatus s) {
    switch (s) {
        case PremiseStatus::Ok: return "ok";
        case PremiseStatus::Premise1Violated: return "premise1-violated";
        case PremiseStatus::Premise2Violated: return "premise2-violated";
    }
    return "?";
}

PremiseStatus scheduling_premise_check(const CaseSpec& spec, const StudyContext& ctx, int transitional) {
    const double p1 = ctx.watts(spec.pe_after_pu);
    const auto sched = ctx.strategy(StrategyKind::Scheduled);
    const auto esep = esep_of(p1, sched, ctx.plant);
    if (esep.sigma == transitional) return PremiseStatus::Ok;

    const RomState isep = isep_of(spec.sigma_from, ctx.watts(spec.pe_before_pu), ctx.modes, ctx.plant);
    const RoaContext trans_ctx{SwitchingStrategy::frozen(transitional, ctx.modes), p1};
    if (roa_contains(isep, trans_ctx, ctx.plant, ctx.roa) != Membership::Inside) {
        return PremiseStatus::Premise1Violated;
    }
    const RomState trans_sep = isep_of(transitional, p1, ctx.modes, ctx.plant);
    const RoaContext esep_ctx{SwitchingStrategy::frozen(esep.sigma, ctx.modes), p1};
    if (roa_contains(trans_sep, esep_ctx, ctx.plant, ctx.roa) != Membership::Inside) {
        return PremiseStatus::Premise2Violated;
    }
    return PremiseStatus::Ok;
}

}  // namespace dcmg
