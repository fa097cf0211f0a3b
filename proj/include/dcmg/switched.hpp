#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dcmg/equilibria.hpp"
#include "dcmg/integrator.hpp"
#include "dcmg/model.hpp"
#include "dcmg/strategy.hpp"

namespace dcmg {

/// Verdict detection rules.
struct VerdictConfig {
    double v_collapse = 20.0;   // [V]
    double v_ceiling = 400.0;   // [V]
    double band_v = 0.005;      // relative v_bus band around the ESEP
    double band_sv = 0.01;      // relative S_v band
    double sv_floor = 1.0;      // [A], floor of the S_v reference scale
    double window = 0.2;        // [s] trailing window inside the band
    double horizon = 10.0;      // [s]
    std::size_t max_switches = 100000;

    void validate() const;
};

enum class Outcome { Stable, Unstable, Undecided };

const char* to_string(Outcome o);

struct SwitchEvent {
    double t;
    int from;
    int to;
    double v_bus;
    double threshold;
};

template <std::size_t N>
struct Trajectory {
    std::vector<double> t;
    std::vector<Vec<N>> x;
    std::vector<int> sigma;
    std::vector<double> p_e;
    std::vector<SwitchEvent> switches;

    std::size_t size() const { return t.size(); }
};

struct ExpectedSep {
    int sigma = 0;
    Equilibrium eq;
};

struct Verdict {
    Outcome outcome = Outcome::Undecided;
    int final_mode = 0;
    std::vector<double> final_state;
    RomState final_slow;
    // collapse, ceiling, non-finite, validity, step-underflow, chattering, horizon, converged
    std::string trigger;
    double convergence_time = std::numeric_limits<double>::quiet_NaN();
    ExpectedSep esep;
    RomState esep_point;
};

template <std::size_t N>
struct SwitchedRun {
    Trajectory<N> trajectory;
    Verdict verdict;
};

/// Expected mode and SEP for a final load: the mode whose SEP lies in that
/// mode's own voltage band. An SEP sitting exactly on a band edge counts only
/// if the neighbouring mode's field does not push the bus voltage away from it.
/// Throws std::runtime_error when no mode or more than one mode qualifies.
ExpectedSep esep_of(double p_final, const SwitchingStrategy& strat, const Plant& p);

/// Initial SEP of mode sigma at load p_e (highest-voltage SEP).
RomState isep_of(int sigma, double p_e, const ModeTable& modes, const Plant& p);
FullState isep_full_of(int sigma, double p_e, const ModeTable& modes, const Plant& p);

/// Point of the ESEP in (S_v, v_bus) for the given model.
template <class Model>
RomState esep_point(const ExpectedSep& e, const Plant& p) {
    if constexpr (Model::N == 6) {
        return full_steady_state(e.eq.mode, e.eq.p_e, p).slow();
    } else {
        return e.eq.point;
    }
}

/// True when s lies inside the stability band around target.
bool within_band(const RomState& s, const RomState& target, double p_e, const Plant& p, const VerdictConfig& vc);

// -- switched flow ----------------------------------------------------------

enum class FlowStop { Completed, Collapse, Ceiling, Observer, Validity, Underflow, MaxSteps, Chattering };

template <std::size_t N>
struct FlowResult {
    FlowStop stop = FlowStop::Completed;
    std::string message;
};

/// Integrates the switched vector field at constant P_e from (t0, x) towards
/// t1 (backward when t1 < t0), appending to `traj`. Mode changes are
/// localised as guard events at every band edge of the strategy. When both
/// neighbouring fields push v_bus into a threshold, the state slides along it
/// with the convex combination that keeps v_bus fixed, until one of the two
/// fields turns away.
template <class Model>
FlowResult<Model::N> switched_flow(Trajectory<Model::N>& traj, Vec<Model::N> x, double t0, double t1,
                                   const SwitchingStrategy& strat, double p_e, const Plant& plant,
                                   const IntegratorConfig& cfg, const VerdictConfig& vc,
                                   const Observer<Model::N>& observer = {}) {
    constexpr std::size_t N = Model::N;
    constexpr std::size_t vi = Model::v_index;
    FlowResult<N> out;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const auto edges = strat.switching_voltages();
    std::vector<EventSpec<N>> events;
    for (double v : edges) {
        events.push_back({[v](double, const Vec<N>& s) { return Model::v_bus(s) - v; }, Direction::Either,
                          EventAction::Stop});
    }
    const std::size_t collapse_ev = events.size();
    events.push_back({[&vc](double, const Vec<N>& s) { return Model::v_bus(s) - vc.v_collapse; },
                      Direction::Falling, EventAction::Stop});
    const std::size_t ceiling_ev = events.size();
    events.push_back({[&vc](double, const Vec<N>& s) { return Model::v_bus(s) - vc.v_ceiling; },
                      Direction::Rising, EventAction::Stop});

    auto push = [&](double t, const Vec<N>& s, int sigma) {
        traj.t.push_back(t);
        traj.x.push_back(s);
        traj.sigma.push_back(sigma);
        traj.p_e.push_back(p_e);
    };
    // Maps a non-event termination onto the flow result; false for stop events.
    auto finished = [&](const IntegrationResult<N>& res) {
        switch (res.reason) {
            case Termination::Completed: out.stop = FlowStop::Completed; return true;
            case Termination::ObserverStop: out.stop = FlowStop::Observer; return true;
            case Termination::StepUnderflow: out.stop = FlowStop::Underflow; break;
            case Termination::LeftValidityRegion: out.stop = FlowStop::Validity; break;
            case Termination::MaxSteps: out.stop = FlowStop::MaxSteps; return true;
            case Termination::StopEvent: return false;
        }
        out.message = res.message;
        return true;
    };

    double t = t0;
    int sigma = strat.mode_of(Model::v_bus(x));
    if (traj.t.empty() || traj.t.back() != t0) push(t0, x, sigma);
    if (Model::v_bus(x) <= vc.v_collapse) {
        out.stop = FlowStop::Collapse;
        return out;
    }
    if (Model::v_bus(x) >= vc.v_ceiling) {
        out.stop = FlowStop::Ceiling;
        return out;
    }
    std::size_t switches = 0;
    // Registers a mode change at threshold vth; false when the flow must end.
    auto after_switch = [&](double vth) {
        const int next = strat.mode_of(Model::v_bus(x));
        if (next != sigma) {
            traj.switches.push_back({t, sigma, next, Model::v_bus(x), vth});
            sigma = next;
        }
        push(t, x, sigma);
        if (observer && !observer(t, x)) {
            out.stop = FlowStop::Observer;
            return false;
        }
        if (++switches > vc.max_switches) {
            out.stop = FlowStop::Chattering;
            return false;
        }
        if (t == t1) {
            out.stop = FlowStop::Completed;
            return false;
        }
        return true;
    };

    while (true) {
        const ModeDef& mode = strat.mode_def(sigma);
        auto rhs = [&](double, const Vec<N>& s) { return Model::rhs(s, mode, p_e, plant); };
        const int cur = sigma;
        Observer<N> obs = [&](double tt, const Vec<N>& s) {
            push(tt, s, cur);
            return !observer || observer(tt, s);
        };
        auto res = integrate<N>(rhs, x, t, t1, cfg, events, obs);
        if (finished(res)) return out;
        const auto& hit = res.hits.back();
        t = hit.t;
        x = hit.x;
        if (hit.event == collapse_ev || hit.event == ceiling_ev) {
            push(t, x, sigma);
            out.stop = hit.event == collapse_ev ? FlowStop::Collapse : FlowStop::Ceiling;
            return out;
        }
        const double vth = edges[hit.event];
        if (!after_switch(vth)) return out;

        // Sliding check. In reversed time the roles of the two sides swap.
        const double dv = 1e-9 * std::max(1.0, std::abs(vth));
        const ModeDef& above = strat.mode_def(strat.mode_of(vth + dv));
        const ModeDef& below = strat.mode_def(strat.mode_of(vth - dv));
        if (above.sigma == below.sigma) continue;
        auto v_above = [&](const Vec<N>& s) { return dir * Model::rhs(s, above, p_e, plant)[vi]; };
        auto v_below = [&](const Vec<N>& s) { return dir * Model::rhs(s, below, p_e, plant)[vi]; };
        Vec<N> xs = x;
        xs[vi] = vth;
        if (!(v_above(xs) < 0.0 && v_below(xs) > 0.0)) continue;

        x = xs;
        if (!after_switch(vth)) return out;
        auto slide_rhs = [&](double, const Vec<N>& s) {
            const auto fa = Model::rhs(s, above, p_e, plant);
            const auto fb = Model::rhs(s, below, p_e, plant);
            const double den = fb[vi] - fa[vi];
            const double alpha = den != 0.0 ? std::clamp(fb[vi] / den, 0.0, 1.0) : 0.5;
            Vec<N> f;
            for (std::size_t i = 0; i < N; ++i) f[i] = alpha * fa[i] + (1.0 - alpha) * fb[i];
            f[vi] = 0.0;
            return f;
        };
        const std::vector<EventSpec<N>> exits{
            {[&](double, const Vec<N>& s) { return v_above(s); }, Direction::Rising, EventAction::Stop},
            {[&](double, const Vec<N>& s) { return v_below(s); }, Direction::Falling, EventAction::Stop},
        };
        const int on = sigma;
        Observer<N> slide_obs = [&](double tt, const Vec<N>& s) {
            push(tt, s, on);
            return !observer || observer(tt, s);
        };
        auto sres = integrate<N>(slide_rhs, x, t, t1, cfg, exits, slide_obs);
        if (finished(sres)) return out;
        const auto& exit = sres.hits.back();
        t = exit.t;
        x = exit.x;
        x[vi] = exit.event == 0 ? vth + dv : vth - dv;
        if (!after_switch(vth)) return out;
    }
}

/// Simulates the switched system under an ECPL step profile and renders a verdict.
template <class Model>
SwitchedRun<Model::N> simulate_switched(const Vec<Model::N>& x0, const SwitchingStrategy& strat,
                                        const EcplProfile& profile, const Plant& plant, const IntegratorConfig& cfg,
                                        const VerdictConfig& vc) {
    constexpr std::size_t N = Model::N;
    SwitchedRun<N> run;
    auto& verdict = run.verdict;
    verdict.esep = esep_of(profile.final_power(), strat, plant);
    verdict.esep_point = esep_point<Model>(verdict.esep, plant);

    const double t_judge = profile.last_step_time();
    double in_band_since = std::numeric_limits<double>::quiet_NaN();
    bool stable = false;
    Observer<N> judge = [&](double t, const Vec<N>& s) {
        if (t < t_judge) return true;
        if (within_band(Model::slow(s), verdict.esep_point, profile.final_power(), plant, vc)) {
            if (std::isnan(in_band_since)) in_band_since = t;
            if (t - in_band_since >= vc.window) {
                stable = true;
                return false;
            }
        } else {
            in_band_since = std::numeric_limits<double>::quiet_NaN();
        }
        return true;
    };

    Vec<N> x = x0;
    double t = 0.0;
    FlowResult<N> flow;
    const auto& segs = profile.segments();
    for (std::size_t i = 0; i < segs.size() && t < vc.horizon; ++i) {
        const double t_end = (i + 1 < segs.size()) ? std::min(segs[i + 1].t_start, vc.horizon) : vc.horizon;
        if (t_end <= t) continue;
        flow = switched_flow<Model>(run.trajectory, x, t, t_end, strat, segs[i].p_e, plant, cfg, vc, judge);
        x = run.trajectory.x.back();
        t = run.trajectory.t.back();
        if (flow.stop != FlowStop::Completed) break;
    }

    const auto& traj = run.trajectory;
    verdict.final_mode = traj.sigma.back();
    verdict.final_state.assign(traj.x.back().begin(), traj.x.back().end());
    verdict.final_slow = Model::slow(traj.x.back());
    bool finite = true;
    for (double v : traj.x.back()) finite = finite && std::isfinite(v);
    if (stable) {
        verdict.outcome = Outcome::Stable;
        verdict.trigger = "converged";
        verdict.convergence_time = in_band_since;
    } else if (!finite) {
        verdict.outcome = Outcome::Unstable;
        verdict.trigger = "non-finite";
    } else {
        switch (flow.stop) {
            case FlowStop::Collapse: verdict.outcome = Outcome::Unstable; verdict.trigger = "collapse"; break;
            case FlowStop::Ceiling: verdict.outcome = Outcome::Unstable; verdict.trigger = "ceiling"; break;
            case FlowStop::Validity: verdict.outcome = Outcome::Unstable; verdict.trigger = "validity"; break;
            case FlowStop::Underflow: verdict.outcome = Outcome::Undecided; verdict.trigger = "step-underflow"; break;
            case FlowStop::Chattering: verdict.outcome = Outcome::Undecided; verdict.trigger = "chattering"; break;
            case FlowStop::MaxSteps: verdict.outcome = Outcome::Undecided; verdict.trigger = "max-steps"; break;
            default: verdict.outcome = Outcome::Undecided; verdict.trigger = "horizon"; break;
        }
    }
    return run;
}

using RomRun = SwitchedRun<2>;
using FullRun = SwitchedRun<6>;

}  // namespace dcmg
