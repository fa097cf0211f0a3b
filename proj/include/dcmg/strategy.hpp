#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcmg/params.hpp"

namespace dcmg {

/// Bus-voltage thresholds of the DC-bus-signalling map.
struct Thresholds {
    double V_1 = 130.0;
    double V_2 = 120.0;
    double V_N = 110.0;
    double V_3 = 100.0;
    double V_4 = 90.0;
    // Mode-scheduling trigger; 0.9 V_N by default.
    double V_min = 99.0;

    void validate() const;
};

/// One voltage band mapped to a mode. Bands are tested in order; the first
/// band containing v_bus wins.
struct ModeBand {
    double lower;  // -inf allowed
    double upper;  // +inf allowed
    bool lower_inclusive;
    bool upper_inclusive;
    int sigma;

    bool contains(double v) const;
};

enum class StrategyKind { Baseline, Scheduled, Custom };

const char* to_string(StrategyKind kind);

class SwitchingStrategy {
public:
    static SwitchingStrategy baseline(const Thresholds& th, const ModeTable& modes);
    static SwitchingStrategy scheduled(const Thresholds& th, const ModeTable& modes);
    /// A single mode over the whole voltage axis.
    static SwitchingStrategy frozen(int sigma, const ModeTable& modes);
    static SwitchingStrategy custom(std::vector<ModeBand> bands, const ModeTable& modes);

    int mode_of(double v_bus) const;
    const ModeDef& mode_def(int sigma) const { return mode_at(modes_, sigma); }
    const ModeDef& active(double v_bus) const { return mode_def(mode_of(v_bus)); }

    /// Distinct finite band edges, ascending. These are the switching guards.
    std::vector<double> switching_voltages() const;

    bool in_mode_region(double v_bus, int sigma) const { return mode_of(v_bus) == sigma; }

    StrategyKind kind() const { return kind_; }
    std::optional<int> frozen_mode() const { return frozen_; }
    const Thresholds& thresholds() const { return thresholds_; }
    const ModeTable& modes() const { return modes_; }
    const std::vector<ModeBand>& bands() const { return bands_; }
    std::string describe() const;

private:
    SwitchingStrategy(StrategyKind kind, std::vector<ModeBand> bands, const ModeTable& modes,
                      const Thresholds& th, std::optional<int> frozen);

    StrategyKind kind_;
    std::vector<ModeBand> bands_;
    ModeTable modes_;
    Thresholds thresholds_;
    std::optional<int> frozen_;
};

}  // namespace dcmg
