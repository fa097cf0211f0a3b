#pragma once

// Explicit Runge-Kutta integration with guard-crossing events.
//
// Steps carry the sign of (t_end - t0), so a backward run is the same loop
// applied to the time-reversed flow. Events are located by bisection on the
// last bracketing step: the step is re-taken from its start with a fraction
// of its length until the bracket is narrower than event_time_tol.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcmg {

enum class Method { RK4, DormandPrince45 };

struct IntegratorConfig {
    Method method = Method::DormandPrince45;
    double h_init = 1e-4;  // also the fixed step for RK4
    double h_min = 1e-12;
    double h_max = 1e-2;
    double rel_tol = 1e-8;
    double abs_tol = 1e-9;
    double event_time_tol = 1e-7;
    std::size_t max_steps = 1'000'000;

    void validate() const {
        if (!(h_min > 0.0 && h_min <= h_init && h_init <= h_max)) {
            throw std::invalid_argument("integrator steps must satisfy 0 < h_min <= h_init <= h_max");
        }
        if (!(rel_tol > 0.0 && abs_tol > 0.0 && event_time_tol > 0.0)) {
            throw std::invalid_argument("integrator tolerances must be > 0");
        }
    }
};

enum class Direction { Rising, Falling, Either };
enum class EventAction { Stop, Record };

template <std::size_t N>
struct EventSpec {
    std::function<double(double, const std::array<double, N>&)> guard;
    Direction direction = Direction::Either;
    EventAction action = EventAction::Stop;
};

template <std::size_t N>
struct Sample {
    double t;
    std::array<double, N> x;
};

template <std::size_t N>
struct EventHit {
    std::size_t event;  // index into the event list
    double t;
    std::array<double, N> x;
    double guard_value;
};

enum class Termination { Completed, StopEvent, ObserverStop, StepUnderflow, LeftValidityRegion, MaxSteps };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::StopEvent: return "stop-event";
        case Termination::ObserverStop: return "observer-stop";
        case Termination::StepUnderflow: return "step-underflow";
        case Termination::LeftValidityRegion: return "state left validity region";
        case Termination::MaxSteps: return "max-steps";
    }
    return "?";
}

struct IntegratorStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    // Largest embedded error / tolerance ratio among accepted steps.
    double max_accepted_error = 0.0;
};

template <std::size_t N>
struct IntegrationResult {
    std::vector<Sample<N>> samples;
    std::vector<EventHit<N>> hits;
    Termination reason = Termination::Completed;
    std::string message;
    IntegratorStats stats;

    const Sample<N>& back() const { return samples.back(); }
};

// Observer is called after every accepted step; returning false stops the run.
template <std::size_t N>
using Observer = std::function<bool(double, const std::array<double, N>&)>;

namespace detail {

template <std::size_t N>
using V = std::array<double, N>;

template <std::size_t N>
inline V<N> axpy(const V<N>& x, double a, const V<N>& y) {
    V<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + a * y[i];
    return out;
}

template <std::size_t N>
inline bool all_finite(const V<N>& x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

inline bool crossed(Direction dir, double g_prev, double g_new) {
    const bool rising = g_prev <= 0.0 && g_new > 0.0;
    const bool falling = g_prev >= 0.0 && g_new < 0.0;
    switch (dir) {
        case Direction::Rising: return rising;
        case Direction::Falling: return falling;
        case Direction::Either: return rising || falling;
    }
    return false;
}

// Dormand-Prince 5(4) tableau.
struct DP45 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct StepOut {
    double err_ratio;
};

template <std::size_t N, class F>
V<N> rk4_step(F& f, double t, const V<N>& x, double h, std::size_t& evals) {
    const auto k1 = f(t, x);
    const auto k2 = f(t + 0.5 * h, axpy(x, 0.5 * h, k1));
    const auto k3 = f(t + 0.5 * h, axpy(x, 0.5 * h, k2));
    const auto k4 = f(t + h, axpy(x, h, k3));
    evals += 4;
    V<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

// One DP45 step from (t, x) with k1 = f(t, x) supplied. Returns the 5th-order
// solution in x_new, its derivative in k7, and the scaled error estimate.
template <std::size_t N, class F>
double dp45_step(F& f, double t, const V<N>& x, const V<N>& k1, double h, const IntegratorConfig& cfg,
                 V<N>& x_new, V<N>& k7, std::size_t& evals) {
    using T = DP45;
    V<N> y;
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * T::a21 * k1[i];
    const auto k2 = f(t + T::c2 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * (T::a31 * k1[i] + T::a32 * k2[i]);
    const auto k3 = f(t + T::c3 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
    const auto k4 = f(t + T::c4 * h, y);
    for (std::size_t i = 0; i < N; ++i)
        y[i] = x[i] + h * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    const auto k5 = f(t + T::c5 * h, y);
    for (std::size_t i = 0; i < N; ++i)
        y[i] = x[i] + h * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] + T::a64 * k4[i] + T::a65 * k5[i]);
    const auto k6 = f(t + h, y);
    for (std::size_t i = 0; i < N; ++i)
        x_new[i] = x[i] + h * (T::b1 * k1[i] + T::b3 * k3[i] + T::b4 * k4[i] + T::b5 * k5[i] + T::b6 * k6[i]);
    if (!all_finite(x_new)) {
        throw std::domain_error("non-finite state");
    }
    k7 = f(t + h, x_new);
    evals += 6;
    double ratio = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] + T::e6 * k6[i] +
                              T::e7 * k7[i]);
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x[i]), std::abs(x_new[i]));
        ratio = std::max(ratio, std::abs(e) / sc);
    }
    return ratio;
}

}  // namespace detail

/// Integrates dx/dt = rhs(t, x) from t0 to t_end (backward when t_end < t0).
/// rhs may throw std::domain_error to signal that the state left its
/// validity region.
template <std::size_t N, class F>
IntegrationResult<N> integrate(F&& rhs, const std::array<double, N>& x0, double t0, double t_end,
                               const IntegratorConfig& cfg, const std::vector<EventSpec<N>>& events = {},
                               const Observer<N>& observer = {}) {
    using detail::V;
    if (t_end == t0) {
        throw std::invalid_argument("integration interval is empty");
    }
    IntegrationResult<N> res;
    auto& stats = res.stats;
    const double dir = t_end > t0 ? 1.0 : -1.0;
    const bool adaptive = cfg.method == Method::DormandPrince45;

    double t = t0;
    V<N> x = x0;
    res.samples.push_back({t, x});

    std::vector<double> g_prev(events.size());
    for (std::size_t k = 0; k < events.size(); ++k) g_prev[k] = events[k].guard(t, x);

    // Single step of length h from (t, x); used by bisection.
    auto single_step = [&](const V<N>& k1, double h) {
        if (adaptive) {
            V<N> xn, k7;
            detail::dp45_step<N>(rhs, t, x, k1, h, cfg, xn, k7, stats.rhs_evals);
            return xn;
        }
        return detail::rk4_step<N>(rhs, t, x, h, stats.rhs_evals);
    };

    V<N> k1;
    try {
        k1 = rhs(t, x);
        ++stats.rhs_evals;
    } catch (const std::domain_error& e) {
        res.reason = Termination::LeftValidityRegion;
        res.message = e.what();
        return res;
    }

    double h = dir * std::clamp(cfg.h_init, cfg.h_min, cfg.h_max);
    while (true) {
        if (stats.accepted >= cfg.max_steps) {
            res.reason = Termination::MaxSteps;
            return res;
        }
        const double remaining = t_end - t;
        const bool last = std::abs(h) >= std::abs(remaining);
        const double h_try = last ? remaining : h;

        V<N> x_new{};
        V<N> k_next{};
        double err = 0.0;
        try {
            if (adaptive) {
                err = detail::dp45_step<N>(rhs, t, x, k1, h_try, cfg, x_new, k_next, stats.rhs_evals);
            } else {
                x_new = detail::rk4_step<N>(rhs, t, x, h_try, stats.rhs_evals);
                if (!detail::all_finite(x_new)) throw std::domain_error("non-finite state");
                k_next = rhs(t + h_try, x_new);
                ++stats.rhs_evals;
            }
        } catch (const std::domain_error& e) {
            // A trial stage stepped outside the domain; shorten the step.
            if (adaptive && std::abs(h_try) * 0.5 >= cfg.h_min) {
                h = 0.5 * h_try;
                ++stats.rejected;
                continue;
            }
            res.reason = Termination::LeftValidityRegion;
            res.message = e.what();
            return res;
        }

        if (adaptive && err > 1.0) {
            ++stats.rejected;
            const double factor = std::max(0.2, 0.9 * std::pow(err, -0.2));
            h = h_try * factor;
            if (std::abs(h) < cfg.h_min) {
                res.reason = Termination::StepUnderflow;
                res.message = "step size fell below h_min";
                return res;
            }
            continue;
        }

        ++stats.accepted;
        stats.max_accepted_error = std::max(stats.max_accepted_error, err);
        double t_new = last ? t_end : t + h_try;

        // Event detection on the accepted step.
        double theta_stop = 2.0;
        std::size_t stop_event = events.size();
        struct Pending {
            std::size_t k;
            double theta;
            V<N> x;
        };
        std::vector<Pending> pending;
        for (std::size_t k = 0; k < events.size(); ++k) {
            const double g_new = events[k].guard(t_new, x_new);
            if (!detail::crossed(events[k].direction, g_prev[k], g_new)) continue;
            double lo = 0.0;
            double hi = 1.0;
            V<N> x_hi = x_new;
            try {
                while ((hi - lo) * std::abs(h_try) > cfg.event_time_tol) {
                    const double mid = 0.5 * (lo + hi);
                    const auto xm = single_step(k1, mid * h_try);
                    if (detail::crossed(events[k].direction, g_prev[k], events[k].guard(t + mid * h_try, xm))) {
                        hi = mid;
                        x_hi = xm;
                    } else {
                        lo = mid;
                    }
                }
            } catch (const std::domain_error&) {
                // Keep the bracket found so far.
            }
            pending.push_back({k, hi, x_hi});
            if (events[k].action == EventAction::Stop && hi < theta_stop) {
                theta_stop = hi;
                stop_event = k;
            }
        }
        std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) { return a.theta < b.theta; });
        for (const auto& p : pending) {
            if (p.theta > theta_stop) break;
            if (events[p.k].action == EventAction::Record || p.k == stop_event) {
                const double th = (p.theta == 1.0) ? t_new : t + p.theta * h_try;
                res.hits.push_back({p.k, th, p.x, events[p.k].guard(th, p.x)});
            }
        }
        if (stop_event < events.size()) {
            const auto& hit = res.hits.back();
            res.samples.push_back({hit.t, hit.x});
            res.reason = Termination::StopEvent;
            return res;
        }

        t = t_new;
        x = x_new;
        k1 = k_next;
        res.samples.push_back({t, x});
        for (std::size_t k = 0; k < events.size(); ++k) g_prev[k] = events[k].guard(t, x);

        if (observer && !observer(t, x)) {
            res.reason = Termination::ObserverStop;
            return res;
        }
        if (last) {
            res.reason = Termination::Completed;
            return res;
        }
        if (adaptive) {
            const double factor = err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
            h = dir * std::min(std::abs(h_try) * factor, cfg.h_max);
            h = dir * std::max(std::abs(h), cfg.h_min);
        }
    }
}

/// Global-error ratio of fixed-step RK4 at steps h and h/2 against an exact solution.
template <std::size_t N, class F, class Exact>
double order_check(F&& rhs, Exact&& exact, const std::array<double, N>& x0, double t0, double t1, double h) {
    auto global_error = [&](double step) {
        IntegratorConfig cfg;
        cfg.method = Method::RK4;
        cfg.h_init = step;
        cfg.h_min = step;
        cfg.h_max = step;
        const auto r = integrate<N>(rhs, x0, t0, t1, cfg);
        const auto ref = exact(t1);
        double e = 0.0;
        for (std::size_t i = 0; i < N; ++i) e = std::max(e, std::abs(r.back().x[i] - ref[i]));
        return e;
    };
    return global_error(h) / global_error(0.5 * h);
}

}  // namespace dcmg
