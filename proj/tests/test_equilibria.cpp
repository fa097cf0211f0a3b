#include <doctest.h>

#include <cmath>
#include <random>

#include "dcmg/equilibria.hpp"

using namespace dcmg;
using doctest::Approx;

namespace {
const ModeTable kModes = default_modes();
}

TEST_CASE("constant-voltage equilibria") {
    Plant p;
    auto e = cv_equilibrium(-1200.0, kModes[0], p);
    CHECK(e.point.S_v == Approx(-24.0));
    CHECK(e.point.v_bus == 120.0);
    CHECK(e.kind == EquilibriumKind::SEP);

    for (int s : {1, 4}) {
        e = cv_equilibrium(0.0, kModes[s - 1], p);
        CHECK(e.point.S_v == 0.0);
        CHECK(e.point.v_bus == kModes[s - 1].U_ref);
        CHECK(e.kind == EquilibriumKind::SEP);
    }
    e = cv_equilibrium(1300.0, kModes[3], p);
    CHECK(e.point.S_v == Approx(26.0));
    CHECK(e.point.v_bus == 100.0);
    CHECK(e.kind == EquilibriumKind::SEP);

    CHECK_THROWS_AS(cv_equilibrium(100.0, kModes[2], p), std::invalid_argument);
}

TEST_CASE("droop equilibria") {
    Plant p;
    auto eqs = droop_equilibria(100.0, kModes[2], p);
    REQUIRE(eqs.size() == 2);
    CHECK(eqs[0].point.S_v == Approx(2.0));
    CHECK(eqs[0].point.v_bus == Approx(109.2402).epsilon(1e-6));
    CHECK(eqs[0].kind == EquilibriumKind::SEP);
    CHECK(eqs[1].point.v_bus == Approx(0.7598).epsilon(1e-4));
    CHECK(eqs[1].kind == EquilibriumKind::UEP);

    eqs = droop_equilibria(-400.0, kModes[1], p);
    REQUIRE(eqs.size() == 1);
    CHECK(eqs[0].point.S_v == Approx(-8.0));
    CHECK(eqs[0].point.v_bus == Approx(113.5235).epsilon(1e-6));
    CHECK(eqs[0].kind == EquilibriumKind::SEP);

    CHECK(droop_equilibria(3500.0, kModes[1], p).empty());
    CHECK_THROWS_AS(droop_equilibria(100.0, kModes[0], p), std::invalid_argument);
}

TEST_CASE("zero discriminant gives one marginal equilibrium") {
    Plant p;
    const ModeDef& m = kModes[1];
    const double pe = m.U_ref * m.U_ref / (4.0 * m.R_d);
    const auto eqs = droop_equilibria(pe, m, p);
    REQUIRE(eqs.size() == 1);
    CHECK(eqs[0].marginal);
    CHECK(eqs[0].kind == EquilibriumKind::UEP);
    CHECK(eqs[0].point.v_bus == Approx(55.0));
}

TEST_CASE("closed-form Jacobian of CV modes") {
    Plant p;
    auto j = jacobian_cv(kModes[0], p);
    const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    const double tr = j[0][0] + j[1][1];
    CHECK(det == Approx(333.333).epsilon(1e-5));
    CHECK(tr == Approx(-16.6667).epsilon(1e-5));
    const auto cls = classify(j);
    CHECK(cls.kind == EquilibriumKind::SEP);
    CHECK(cls.eigenvalues[0].real() == Approx(-8.3333).epsilon(1e-4));
    CHECK(std::abs(cls.eigenvalues[0].imag()) == Approx(16.245).epsilon(1e-4));

    j = jacobian_cv(kModes[3], p);
    CHECK(j[0][0] * j[1][1] - j[0][1] * j[1][0] == Approx(400.0));
    CHECK(j[0][0] + j[1][1] == Approx(-20.0));
    CHECK_THROWS_AS(jacobian_cv(kModes[1], p), std::invalid_argument);
}

TEST_CASE("CV modes are stable for any positive parameters") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 300; ++i) {
        Plant p;
        p.circuit.C_bus = 1e-3 * u(rng);
        p.circuit.U_s = 10.0 * u(rng);
        p.control.k_Pv = 0.1 * u(rng);
        p.control.k_Iv = u(rng);
        const ModeDef m{1, 20.0 * u(rng), 0.0};
        const auto j = jacobian_cv(m, p);
        CHECK(j[0][0] * j[1][1] - j[0][1] * j[1][0] > 0.0);
        CHECK(j[0][0] + j[1][1] < 0.0);
        CHECK(classify(j).kind == EquilibriumKind::SEP);
    }
}

TEST_CASE("numeric Jacobian") {
    Plant p;
    for (int s : {1, 4}) {
        const auto& m = kModes[s - 1];
        for (double pe : {-1500.0, 0.0, 1200.0}) {
            const auto eq = cv_equilibrium(pe, m, p);
            const auto jn = jacobian_numeric(eq.point, m, pe, p);
            const auto jc = jacobian_cv(m, p);
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 2; ++c) {
                    CHECK(std::abs(jn[r][c] - jc[r][c]) <= 1e-5 * std::max(1.0, std::abs(jc[r][c])));
                }
            }
        }
    }
    const auto uep = droop_equilibria(100.0, kModes[2], p)[1];
    const auto j = jacobian_numeric(uep.point, kModes[2], 100.0, p);
    CHECK(j[0][0] * j[1][1] - j[0][1] * j[1][0] < 0.0);

    const RomState s{5.0, 105.0};
    const auto a = jacobian_numeric(s, kModes[2], 300.0, p, 1e-6);
    const auto b = jacobian_numeric(s, kModes[2], 300.0, p, 2e-6);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            CHECK(std::abs(a[r][c] - b[r][c]) <= 1e-4 * std::max(1e-12, std::abs(a[r][c])));
        }
    }
}

TEST_CASE("classify") {
    CHECK(classify({{{1.0, 0.0}, {0.0, -1.0}}}).kind == EquilibriumKind::UEP);
    auto c = classify({{{-1.0, 0.0}, {0.0, -2.0}}});
    CHECK(c.kind == EquilibriumKind::SEP);
    CHECK(c.eigenvalues[0].real() == Approx(-1.0));
    CHECK(c.eigenvalues[1].real() == Approx(-2.0));
    c = classify({{{0.0, 1.0}, {-1.0, 0.0}}});
    CHECK(c.marginal);
    CHECK(c.kind == EquilibriumKind::UEP);
}

TEST_CASE("droop equilibrium properties") {
    Plant p;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> pe_dist(-1500.0, 3600.0);
    int pairs = 0;
    for (int i = 0; i < 1000; ++i) {
        const double pe = pe_dist(rng);
        for (int s : {2, 3}) {
            const auto& m = kModes[s - 1];
            const auto eqs = droop_equilibria(pe, m, p);
            for (const auto& e : eqs) {
                CHECK(e.point.S_v == Approx(pe / p.circuit.U_s).epsilon(1e-12));
                CHECK(relative_residual(e.point, m, pe, p) < 1e-9);
                CHECK(e.point.v_bus > 0.0);
            }
            if (eqs.size() == 2) {
                ++pairs;
                const double v1 = eqs[0].point.v_bus, v2 = eqs[1].point.v_bus;
                CHECK(v1 + v2 == Approx(m.U_ref).epsilon(1e-9));
                CHECK(v1 * v2 == Approx(pe * m.R_d).epsilon(1e-9));
                CHECK(eqs[0].kind == EquilibriumKind::SEP);
                CHECK(eqs[1].kind == EquilibriumKind::UEP);
            }
        }
    }
    CHECK(pairs > 100);
}

TEST_CASE("every closed-form equilibrium is a zero of the ROM") {
    Plant p;
    for (double pe : {-1500.0, -1200.0, -400.0, -100.0, 0.0, 100.0, 900.0, 1200.0, 1300.0}) {
        for (const auto& m : kModes) {
            for (const auto& e : equilibria(pe, m, p)) CHECK(relative_residual(e.point, m, pe, p) < 1e-9);
        }
    }
}
