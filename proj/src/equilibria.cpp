#include "dcmg/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcmg {

const char* to_string(EquilibriumKind kind) {
    return kind == EquilibriumKind::SEP ? "SEP" : "UEP";
}

Classification classify(const Mat2& j) {
    const double tr = j[0][0] + j[1][1];
    const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    const double disc = 0.25 * tr * tr - det;
    Classification out;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        // Avoid cancellation in the smaller-magnitude root.
        const double big = 0.5 * tr + (tr >= 0.0 ? r : -r);
        const double small = big != 0.0 ? det / big : 0.0;
        out.eigenvalues = {std::complex<double>(std::max(big, small), 0.0),
                           std::complex<double>(std::min(big, small), 0.0)};
    } else {
        const double im = std::sqrt(-disc);
        out.eigenvalues = {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
    }
    const double re0 = out.eigenvalues[0].real();
    const double re1 = out.eigenvalues[1].real();
    out.marginal = std::abs(re0) < 1e-9 || std::abs(re1) < 1e-9;
    out.kind = (!out.marginal && re0 < 0.0 && re1 < 0.0) ? EquilibriumKind::SEP : EquilibriumKind::UEP;
    return out;
}

Mat2 jacobian_cv(const ModeDef& m, const Plant& p) {
    if (!m.is_cv()) {
        throw std::invalid_argument("closed-form Jacobian only applies to constant-voltage modes");
    }
    const auto& c = p.circuit;
    const double g = c.U_s / (c.C_bus * m.U_ref);
    return {{{0.0, -p.control.k_Iv}, {g, -p.control.k_Pv * g}}};
}

Mat2 jacobian_numeric(const RomState& s, const ModeDef& m, double p_e, const Plant& p,
                      double rel_step) {
    Mat2 j{};
    const auto x = s.vec();
    for (std::size_t col = 0; col < 2; ++col) {
        const double h = rel_step * std::max(std::abs(x[col]), 1e-3);
        auto xp = x;
        auto xm = x;
        xp[col] += h;
        xm[col] -= h;
        const auto fp = rom_rhs(RomState::from(xp), m, p_e, p).vec();
        const auto fm = rom_rhs(RomState::from(xm), m, p_e, p).vec();
        for (std::size_t row = 0; row < 2; ++row) {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    return j;
}

namespace {

Equilibrium make_equilibrium(const RomState& point, const Classification& cls, const ModeDef& m,
                             double p_e) {
    Equilibrium eq;
    eq.point = point;
    eq.kind = cls.kind;
    eq.eigenvalues = cls.eigenvalues;
    eq.marginal = cls.marginal;
    eq.mode = m;
    eq.p_e = p_e;
    return eq;
}

}  // namespace

Equilibrium cv_equilibrium(double p_e, const ModeDef& m, const Plant& p) {
    if (!m.is_cv()) {
        throw std::invalid_argument("cv_equilibrium requires R_d = 0");
    }
    const RomState point{p_e / p.circuit.U_s, m.U_ref};
    return make_equilibrium(point, classify(jacobian_cv(m, p)), m, p_e);
}

std::vector<Equilibrium> droop_equilibria(double p_e, const ModeDef& m, const Plant& p) {
    if (!(m.R_d > 0.0)) {
        throw std::invalid_argument("droop_equilibria requires R_d > 0");
    }
    const double s_ve = p_e / p.circuit.U_s;
    const double disc = m.U_ref * m.U_ref - 4.0 * p_e * m.R_d;
    std::vector<Equilibrium> out;
    if (disc < 0.0) {
        return out;
    }
    if (disc == 0.0) {
        const RomState point{s_ve, 0.5 * m.U_ref};
        auto cls = classify(jacobian_numeric(point, m, p_e, p));
        cls.marginal = true;
        cls.kind = EquilibriumKind::UEP;
        out.push_back(make_equilibrium(point, cls, m, p_e));
        return out;
    }
    const double r = std::sqrt(disc);
    const double high = 0.5 * (m.U_ref + r);
    // Product of roots is P_e R_d; use it for the small root to avoid cancellation.
    const double low = (p_e * m.R_d) / high;
    for (double v : {high, low}) {
        if (v > 0.0) {
            const RomState point{s_ve, v};
            out.push_back(make_equilibrium(point, classify(jacobian_numeric(point, m, p_e, p)), m, p_e));
        }
    }
    return out;
}

std::vector<Equilibrium> equilibria(double p_e, const ModeDef& m, const Plant& p) {
    if (m.is_cv()) {
        return {cv_equilibrium(p_e, m, p)};
    }
    return droop_equilibria(p_e, m, p);
}

double relative_residual(const RomState& s, const ModeDef& m, double p_e, const Plant& p) {
    const auto f = rom_rhs(s, m, p_e, p);
    const double i_line = rom_line_current(s, m, p);
    const double scale_sv = p.control.k_Iv * (std::abs(m.U_ref) + std::abs(m.R_d * i_line) + std::abs(s.v_bus));
    const double scale_v = (std::abs(i_line) + std::abs(p_e / s.v_bus)) / p.circuit.C_bus;
    const double a = scale_sv > 0.0 ? f.S_v / scale_sv : f.S_v;
    const double b = scale_v > 0.0 ? f.v_bus / scale_v : f.v_bus;
    return std::hypot(a, b);
}

}  // namespace dcmg
