#include <doctest.h>

#include <limits>
#include <stdexcept>

#include "dcmg/strategy.hpp"

using namespace dcmg;

namespace {
const ModeTable kModes = default_modes();
const Thresholds kTh;
}  // namespace

TEST_CASE("baseline voltage map") {
    const auto s = SwitchingStrategy::baseline(kTh, kModes);
    CHECK(s.mode_of(135.0) == 1);
    CHECK(s.mode_of(120.0) == 1);
    CHECK(s.mode_of(119.999) == 2);
    CHECK(s.mode_of(115.0) == 2);
    CHECK(s.mode_of(110.0) == 2);
    CHECK(s.mode_of(109.999) == 3);
    CHECK(s.mode_of(100.001) == 3);
    CHECK(s.mode_of(100.0) == 4);
    CHECK(s.mode_of(95.0) == 4);
    CHECK(s.mode_of(1.0) == 4);
    CHECK(s.active(105.0).R_d == 0.83);
    CHECK(s.kind() == StrategyKind::Baseline);
    CHECK_FALSE(s.frozen_mode().has_value());
    CHECK(s.switching_voltages() == std::vector<double>{100.0, 110.0, 120.0});
}

TEST_CASE("scheduled voltage map") {
    const auto s = SwitchingStrategy::scheduled(kTh, kModes);
    CHECK(s.mode_of(95.0) == 1);
    CHECK(s.mode_of(99.0) == 1);
    CHECK(s.mode_of(99.5) == 4);
    CHECK(s.mode_of(100.0) == 4);
    CHECK(s.mode_of(105.0) == 3);
    CHECK(s.mode_of(115.0) == 2);
    CHECK(s.mode_of(125.0) == 1);
    CHECK(s.switching_voltages() == std::vector<double>{99.0, 100.0, 110.0, 120.0});
    CHECK(s.describe() == "scheduled");
}

TEST_CASE("every positive voltage maps to exactly one band") {
    for (const auto& s : {SwitchingStrategy::baseline(kTh, kModes), SwitchingStrategy::scheduled(kTh, kModes)}) {
        for (double v = 0.05; v < 300.0; v += 0.05) {
            int hits = 0;
            for (const auto& b : s.bands()) hits += b.contains(v) ? 1 : 0;
            CHECK(hits == 1);
        }
        for (double v : s.switching_voltages()) {
            int hits = 0;
            for (const auto& b : s.bands()) hits += b.contains(v) ? 1 : 0;
            CHECK(hits == 1);
        }
    }
}

TEST_CASE("frozen and custom strategies") {
    const auto f = SwitchingStrategy::frozen(3, kModes);
    CHECK(f.mode_of(1.0) == 3);
    CHECK(f.mode_of(500.0) == 3);
    CHECK(f.frozen_mode() == 3);
    CHECK(f.switching_voltages().empty());
    CHECK(f.describe() == "mode3");
    CHECK_THROWS(SwitchingStrategy::frozen(0, kModes));

    const double inf = std::numeric_limits<double>::infinity();
    const auto c = SwitchingStrategy::custom({{110.0, inf, true, false, 2}, {-inf, 110.0, false, false, 3}}, kModes);
    CHECK(c.mode_of(110.0) == 2);
    CHECK(c.mode_of(109.0) == 3);
    CHECK(c.switching_voltages() == std::vector<double>{110.0});
    CHECK_THROWS_AS(SwitchingStrategy::custom({{120.0, 110.0, true, true, 1}}, kModes), std::invalid_argument);
    CHECK_THROWS_AS(SwitchingStrategy::custom({}, kModes), std::invalid_argument);

    const auto gap = SwitchingStrategy::custom({{110.0, inf, true, false, 2}}, kModes);
    CHECK_THROWS_AS(gap.mode_of(50.0), std::domain_error);
}

TEST_CASE("threshold validation") {
    Thresholds t;
    CHECK_NOTHROW(t.validate());
    t.V_N = 125.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = {};
    t.V_min = 105.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    CHECK_THROWS_AS(SwitchingStrategy::baseline(t, kModes), std::invalid_argument);

    t = {};
    t.V_min = 95.0;
    const auto s = SwitchingStrategy::scheduled(t, kModes);
    CHECK(s.mode_of(97.0) == 4);
    CHECK(s.mode_of(94.0) == 1);
}
