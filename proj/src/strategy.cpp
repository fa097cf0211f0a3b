#include "dcmg/strategy.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcmg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void Thresholds::validate() const {
    if (!(V_4 < V_3 && V_3 < V_N && V_N < V_2 && V_2 < V_1)) {
        throw std::invalid_argument(
            fmt::format("thresholds must satisfy V_4 < V_3 < V_N < V_2 < V_1 (got {}, {}, {}, {}, {})", V_4, V_3,
                        V_N, V_2, V_1));
    }
    if (!(V_min > 0.0 && V_min < V_3)) {
        throw std::invalid_argument(fmt::format("V_min ({}) must lie in (0, V_3)", V_min));
    }
}

bool ModeBand::contains(double v) const {
    const bool above = lower_inclusive ? v >= lower : v > lower;
    const bool below = upper_inclusive ? v <= upper : v < upper;
    return above && below;
}

const char* to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Baseline: return "baseline";
        case StrategyKind::Scheduled: return "scheduled";
        case StrategyKind::Custom: return "custom";
    }
    return "?";
}

SwitchingStrategy::SwitchingStrategy(StrategyKind kind, std::vector<ModeBand> bands, const ModeTable& modes,
                                     const Thresholds& th, std::optional<int> frozen)
    : kind_(kind), bands_(std::move(bands)), modes_(modes), thresholds_(th), frozen_(frozen) {
    for (const auto& m : modes_) m.validate();
    if (bands_.empty()) {
        throw std::invalid_argument("switching strategy needs at least one band");
    }
}

// Mode-1 extends above V_1 and Mode-4 below V_4 so every v_bus > 0 is mapped.
SwitchingStrategy SwitchingStrategy::baseline(const Thresholds& th, const ModeTable& modes) {
    th.validate();
    return SwitchingStrategy(StrategyKind::Baseline,
                             {
                                 {th.V_2, kInf, true, false, 1},
                                 {th.V_N, th.V_2, true, false, 2},
                                 {th.V_3, th.V_N, false, false, 3},
                                 {-kInf, th.V_3, false, true, 4},
                             },
                             modes, th, std::nullopt);
}

SwitchingStrategy SwitchingStrategy::scheduled(const Thresholds& th, const ModeTable& modes) {
    th.validate();
    return SwitchingStrategy(StrategyKind::Scheduled,
                             {
                                 {th.V_2, kInf, true, false, 1},
                                 {-kInf, th.V_min, false, true, 1},
                                 {th.V_N, th.V_2, true, false, 2},
                                 {th.V_3, th.V_N, false, false, 3},
                                 {th.V_min, th.V_3, false, true, 4},
                             },
                             modes, th, std::nullopt);
}

SwitchingStrategy SwitchingStrategy::frozen(int sigma, const ModeTable& modes) {
    mode_at(modes, sigma);
    return SwitchingStrategy(StrategyKind::Custom, {{-kInf, kInf, false, false, sigma}}, modes, Thresholds{}, sigma);
}

SwitchingStrategy SwitchingStrategy::custom(std::vector<ModeBand> bands, const ModeTable& modes) {
    for (const auto& b : bands) {
        mode_at(modes, b.sigma);
        if (!(b.lower <= b.upper)) {
            throw std::invalid_argument("custom band has lower > upper");
        }
    }
    return SwitchingStrategy(StrategyKind::Custom, std::move(bands), modes, Thresholds{}, std::nullopt);
}

int SwitchingStrategy::mode_of(double v_bus) const {
    for (const auto& b : bands_) {
        if (b.contains(v_bus)) return b.sigma;
    }
    throw std::domain_error(fmt::format("v_bus = {} is not covered by the switching strategy", v_bus));
}

std::vector<double> SwitchingStrategy::switching_voltages() const {
    std::vector<double> out;
    for (const auto& b : bands_) {
        for (double v : {b.lower, b.upper}) {
            if (std::isfinite(v)) out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string SwitchingStrategy::describe() const {
    if (frozen_) return fmt::format("mode{}", *frozen_);
    return to_string(kind_);
}

}  // namespace dcmg
