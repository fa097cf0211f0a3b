#include <doctest.h>

#include <cmath>
#include <random>

#include "dcmg/equilibria.hpp"
#include "dcmg/model.hpp"

using namespace dcmg;
using doctest::Approx;

namespace {

const ModeTable kModes = default_modes();
const ModeDef& m1 = kModes[0];
const ModeDef& m2 = kModes[1];
const ModeDef& m3 = kModes[2];

Plant no_line_resistance() {
    Plant p;
    p.circuit.R_line = 0.0;
    return p;
}

}  // namespace

TEST_CASE("ecpl power is consumption minus generation") {
    CHECK(ecpl_power(1300, 100) == 1200);
    CHECK(ecpl_power(0, 1200) == -1200);
    CHECK(ecpl_power(500, 500) == 0);
}

TEST_CASE("parameter defaults and validation") {
    Plant p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.circuit.C_bus == 5e-3);
    CHECK(p.control.k_Iv == 4.0);
    CHECK(pu_to_watts(1.2, p.circuit) == Approx(1200.0));
    CHECK(watts_to_pu(-400.0, p.circuit) == Approx(-0.4));

    Plant bad = p;
    bad.circuit.C_bus = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.circuit.I_low = 20.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.control.k_Pi = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ModeDef cv_with_droop{1, 120.0, 0.5};
    CHECK_THROWS_AS(cv_with_droop.validate(), std::invalid_argument);
    ModeDef droop_without{3, 110.0, 0.0};
    CHECK_THROWS_AS(droop_without.validate(), std::invalid_argument);
    CHECK_THROWS_AS(mode_at(kModes, 5), std::out_of_range);
}

TEST_CASE("ROM line current") {
    Plant p;
    CHECK(rom_line_current({-24.0, 120.0}, m1, p) == Approx(-10.0).epsilon(1e-12));
    for (const auto& m : kModes) CHECK(rom_line_current({0.0, m.U_ref}, m, p) == Approx(0.0));
    CHECK(rom_line_current({2.0, 109.2402}, m3, p) == Approx(0.9154).epsilon(1e-4));
    CHECK(rom_line_current({2.0, 109.2402}, m3, p) == Approx(100.0 / 109.2402).epsilon(1e-6));
    CHECK_THROWS_AS(rom_line_current({0.0, 0.0}, m1, p), std::domain_error);
    CHECK_THROWS_AS(rom_line_current({0.0, -5.0}, m3, p), std::domain_error);
}

TEST_CASE("ROM right-hand side at equilibria") {
    Plant p;
    auto f = rom_rhs({-24.0, 120.0}, m1, -1200.0, p);
    CHECK(f.S_v == Approx(0.0));
    CHECK(f.v_bus == Approx(0.0));
    f = rom_rhs({0.0, 110.0}, m2, 0.0, p);
    CHECK(f.S_v == 0.0);
    CHECK(f.v_bus == 0.0);
    const double v_hi = 0.5 * (110.0 + std::sqrt(110.0 * 110.0 - 4.0 * 0.83 * 100.0));
    f = rom_rhs({2.0, v_hi}, m3, 100.0, p);
    CHECK(std::abs(f.S_v) < 1e-6);
    CHECK(std::abs(f.v_bus) < 1e-6);
    CHECK_THROWS_AS(rom_rhs({0.0, 0.0}, m1, 100.0, p), std::domain_error);
}

TEST_CASE("current reference") {
    Plant p;
    CHECK(current_reference({-24.0, 120.0}, m1, p) == Approx(-24.0));
    CHECK(current_reference({0.0, 100.0}, kModes[3], p) == Approx(0.0));
    for (double pe : {-1500.0, -400.0, 100.0, 900.0}) {
        for (const auto& m : kModes) {
            for (const auto& eq : equilibria(pe, m, p)) {
                CHECK(current_reference(eq.point, m, p) == Approx(pe / p.circuit.U_s).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("current reference clamp is optional") {
    Plant p;
    p.options.clamp_current_ref = true;
    const RomState s{-40.0, 120.0};
    CHECK(current_reference(s, m1, p) == Approx(p.circuit.I_low));
    CHECK(rom_line_current(s, m1, p) * s.v_bus == Approx(p.circuit.U_s * p.circuit.I_low));
    p.options.clamp_current_ref = false;
    CHECK(current_reference(s, m1, p) == Approx(-40.0));
}

TEST_CASE("power balance identity over random states") {
    Plant p;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> sv(-60.0, 60.0), v(1.0, 200.0);
    for (int i = 0; i < 2000; ++i) {
        const RomState s{sv(rng), v(rng)};
        for (const auto& m : kModes) {
            const double lhs = rom_line_current(s, m, p) * s.v_bus;
            const double rhs = p.circuit.U_s * current_reference(s, m, p);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("CV mode is the droop formula with zero droop") {
    Plant p;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> sv(-60.0, 60.0), v(1.0, 200.0);
    const ModeDef tiny{2, 120.0, 1e-12};
    for (int i = 0; i < 500; ++i) {
        const RomState s{sv(rng), v(rng)};
        const auto a = rom_rhs(s, m1, 300.0, p);
        const auto b = rom_rhs(s, tiny, 300.0, p);
        CHECK(a.S_v == Approx(b.S_v).epsilon(1e-9));
        CHECK(a.v_bus == Approx(b.v_bus).epsilon(1e-9));
    }
}

TEST_CASE("full model steady state") {
    const Plant p = no_line_resistance();
    FullState s{-24.0, 1.0 - 50.0 / 120.0, -24.0, 120.0, -10.0, 120.0};
    auto f = full_rhs(s, m1, -1200.0, p);
    for (double d : f.vec()) CHECK(std::abs(d) < 1e-6);
    CHECK(duty_ratio(s, m1, p) == Approx(0.5833).epsilon(1e-4));

    s.v_bus += 1.0;
    CHECK(full_rhs(s, m1, -1200.0, p).v_bus < 0.0);

    for (const auto& m : kModes) {
        const FullState z{0.0, 1.0 - 50.0 / m.U_ref, 0.0, m.U_ref, 0.0, m.U_ref};
        for (double d : full_rhs(z, m, 0.0, p).vec()) CHECK(d == Approx(0.0));
    }
    CHECK_THROWS_AS(full_rhs({0, 0, 0, 100, 0, 0}, m1, 0.0, p), std::domain_error);
}

TEST_CASE("full steady state agrees with the ROM equilibrium") {
    const Plant p = no_line_resistance();
    for (double pe : {-1500.0, -100.0, 100.0, 900.0, 1300.0}) {
        for (const auto& m : kModes) {
            const auto eqs = equilibria(pe, m, p);
            if (eqs.empty() || eqs.front().kind != EquilibriumKind::SEP) continue;
            const FullState fs = full_steady_state(m, pe, p);
            CHECK(fs.slow().S_v == Approx(eqs.front().point.S_v).epsilon(1e-6));
            CHECK(fs.slow().v_bus == Approx(eqs.front().point.v_bus).epsilon(1e-6));
            for (double d : full_rhs(fs, m, pe, p).vec()) CHECK(std::abs(d) < 1e-6);
        }
    }
    // With the line resistance the full model still has a steady state.
    Plant with_r;
    const FullState fs = full_steady_state(m1, 1000.0, with_r);
    for (double d : full_rhs(fs, m1, 1000.0, with_r).vec()) CHECK(std::abs(d) < 1e-6);
}

TEST_CASE("duty saturation keeps the duty inside [0, 1]") {
    Plant p;
    FullState s{50.0, 0.9, 0.0, 100.0, 0.0, 100.0};
    CHECK(duty_ratio(s, m1, p) == 1.0);
    s.S_i = -0.5;
    s.S_v = -50.0;
    CHECK(duty_ratio(s, m1, p) == 0.0);
    p.options.duty_saturation = false;
    CHECK(duty_ratio(s, m1, p) < 0.0);
}

TEST_CASE("ECPL profile") {
    const auto prof = EcplProfile::step(-1200.0, 100.0, 2.0);
    CHECK(prof.at(0.0) == -1200.0);
    CHECK(prof.at(1.999) == -1200.0);
    CHECK(prof.at(2.0) == 100.0);
    CHECK(prof.final_power() == 100.0);
    CHECK(prof.last_step_time() == 2.0);
    CHECK_THROWS_AS(EcplProfile({}), std::invalid_argument);
    CHECK_THROWS_AS(EcplProfile({{0.5, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(EcplProfile({{0.0, 1.0}, {0.0, 2.0}}), std::invalid_argument);
}
