#include <doctest.h>

#include <cmath>
#include <set>

#include "dcmg/studies.hpp"

using namespace dcmg;
using doctest::Approx;

TEST_CASE("case catalogue") {
    const auto cases = table2_cases();
    REQUIRE(cases.size() == 12);
    std::set<std::string> ids;
    for (const auto& c : cases) {
        ids.insert(c.id);
        CHECK(c.t_step == 2.0);
        CHECK(c.expected == (c.id.back() == '+' ? Outcome::Unstable : Outcome::Stable));
    }
    CHECK(ids.size() == 12);
    const auto& c5 = find_case(cases, "5+");
    CHECK(c5.sigma_from == 2);
    CHECK(c5.sigma_to == 4);
    CHECK(c5.pe_before_pu == -0.1);
    CHECK(c5.pe_after_pu == 1.2);
    CHECK_THROWS_AS(find_case(cases, "7+"), std::invalid_argument);

    CHECK(expected_outcome(find_case(cases, "2+"), StrategyKind::Baseline) == Outcome::Unstable);
    CHECK(expected_outcome(find_case(cases, "2+"), StrategyKind::Scheduled) == Outcome::Stable);
    CHECK_FALSE(expected_outcome(find_case(cases, "3+"), StrategyKind::Scheduled).has_value());
}

TEST_CASE("single cases") {
    StudyContext ctx;
    const auto cases = table2_cases();
    auto r = run_case(find_case(cases, "1-"), StrategyKind::Baseline, ctx);
    CHECK(r.verdict.outcome == Outcome::Stable);
    CHECK(r.match == true);
    CHECK(r.rom.size() > 10);
    CHECK(r.full.size() == 0);

    r = run_case(find_case(cases, "6+"), StrategyKind::Baseline, ctx);
    CHECK(r.verdict.outcome == Outcome::Unstable);
    CHECK(r.match == true);

    r = run_case(find_case(cases, "5+"), StrategyKind::Scheduled, ctx);
    CHECK(r.verdict.outcome == Outcome::Stable);
    CHECK(r.match == true);
}

TEST_CASE("table of cases") {
    StudyContext ctx;
    const auto base = run_table2(StrategyKind::Baseline, ctx, table2_cases());
    CHECK(base.matches == 12);
    CHECK(base.mismatches.empty());
    REQUIRE(base.rows.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(base.rows[i].spec.id == table2_cases()[i].id);
        CHECK(base.rows[i].rom.size() == 0);
    }

    const auto sched = run_table2(StrategyKind::Scheduled, ctx, table2_cases());
    for (const auto& row : sched.rows) {
        if (row.spec.id == "2+" || row.spec.id == "5+" || row.spec.id == "6+") {
            CHECK(row.verdict.outcome == Outcome::Stable);
        }
    }
    CHECK(sched.mismatches.empty());

    const auto none = run_table2(StrategyKind::Baseline, ctx, {});
    CHECK(none.rows.empty());
    CHECK(none.matches == 0);
    CHECK(none.mismatches.empty());

    const auto kept = run_table2(StrategyKind::Baseline, ctx, {find_case(table2_cases(), "2-")}, true);
    CHECK(kept.rows.at(0).rom.size() > 10);
}

TEST_CASE("critical step search") {
    StudyContext ctx;
    CHECK_THROWS_AS(critical_step_search(ModelKind::Rom, 1, 0.5, 0.6, 0.7, 0.01, ctx), std::invalid_argument);
    CHECK_THROWS_AS(critical_step_search(ModelKind::Rom, 1, 0.5, 0.7, 0.6, 0.01, ctx), std::invalid_argument);
    const auto r = critical_step_search(ModelKind::Rom, 1, 0.5, 0.6, 3.0, 0.05, ctx);
    CHECK(r.unstable_pu - r.stable_pu <= 0.05);
    CHECK(r.stable_pu < r.unstable_pu);
    CHECK(r.critical_pu == Approx(0.5 * (r.stable_pu + r.unstable_pu)));
    CHECK(r.iterations > 0);
}

TEST_CASE("feedback diagnostic") {
    StudyContext ctx;
    const auto cases = table2_cases();
    for (const auto& c : cases) {
        const auto run = run_case(c, StrategyKind::Baseline, ctx);
        const auto rep = feedback_diagnostic(run.rom, ctx.modes, ctx.plant, c.t_step);
        CAPTURE(c.id);
        CHECK(rep.max_identity_error < 1e-6);
        CHECK(rep.samples.size() == run.rom.size());
    }

    const auto r5 = run_case(find_case(cases, "5+"), StrategyKind::Baseline, ctx);
    const auto rep = feedback_diagnostic(r5.rom, ctx.modes, ctx.plant, 2.0);
    CHECK(rep.positive_feedback);
    CHECK(rep.signature_violations == 0);

    // Before the step the system rests at an equilibrium: both sides vanish.
    for (const auto& s : rep.samples) {
        if (s.t >= 1.0) break;
        CHECK(std::abs(s.surplus) < 1e-6 * std::abs(s.p_e) + 1e-9);
        CHECK(std::abs(s.capacitor) < 1e-6 * std::abs(s.p_e) + 1e-9);
    }

    // A stable case does not show the signature.
    const auto r2 = run_case(find_case(cases, "2-"), StrategyKind::Baseline, ctx);
    CHECK_FALSE(feedback_diagnostic(r2.rom, ctx.modes, ctx.plant, 2.0).positive_feedback);
}

TEST_CASE("settling time") {
    const double tau = 0.1;
    std::vector<double> t, y;
    for (int i = 0; i <= 20000; ++i) {
        t.push_back(i * 1e-4);
        y.push_back(1.0 - std::exp(-t.back() / tau));
    }
    y.back() = 1.0;
    CHECK(settling_time(t, y) == Approx(-std::log(0.05) * tau).epsilon(1e-3));

    std::vector<double> flat(t.size(), 2.0);
    CHECK(settling_time(t, flat) == 0.0);

    std::vector<double> ramp(t.begin(), t.end());
    CHECK_THROWS_AS(settling_time(t, std::vector<double>(t.size() - 1, 0.0)), std::invalid_argument);
    ramp.back() = 100.0;
    CHECK_THROWS_AS(settling_time(t, ramp), std::runtime_error);
}

TEST_CASE("mode-1 settling time follows the eigenvalue envelope") {
    StudyContext ctx;
    const double ts = measure_settling_time(ctx);
    const double envelope = -std::log(0.05) / (25.0 / 3.0);
    CHECK(ts == Approx(envelope).epsilon(0.3));
}

TEST_CASE("capacitance sweep") {
    StudyContext ctx;
    SweepSpec spec{SweepParameter::CBus, {2e-3, 5e-3, 10e-3, 20e-3, 50e-3}, "5+"};
    const auto pts = sweep(spec, ctx, table2_cases());
    REQUIRE(pts.size() == 5);
    const auto tc = count_transitions(pts);
    CHECK(tc.up == 1);
    CHECK(tc.down == 0);
    CHECK(pts.front().outcome == Outcome::Unstable);
    CHECK(pts.back().outcome == Outcome::Stable);
    for (const auto& pt : pts) CHECK(pt.settling_time > 0.0);

    const auto one = sweep({SweepParameter::CBus, {5e-3}, "5+"}, ctx, table2_cases());
    REQUIRE(one.size() == 1);
    CHECK(one[0].outcome == Outcome::Unstable);
}

TEST_CASE("gain sweep: faster outer loop sits on the stable side") {
    StudyContext ctx;
    const auto pts = sweep({SweepParameter::GainScale, {0.5, 1.0, 2.0, 4.0}, "5+"}, ctx, table2_cases());
    REQUIRE(pts.size() == 4);
    double worst_stable = 0.0;
    double best_unstable = 1e9;
    std::size_t n_stable = 0;
    for (const auto& pt : pts) {
        if (pt.outcome == Outcome::Stable) {
            worst_stable = std::max(worst_stable, pt.settling_time);
            ++n_stable;
        } else {
            best_unstable = std::min(best_unstable, pt.settling_time);
        }
    }
    CHECK(n_stable > 0);
    CHECK(n_stable < pts.size());
    CHECK(worst_stable < best_unstable);
}

TEST_CASE("sweep validation and transitions") {
    CHECK_THROWS_AS((SweepSpec{SweepParameter::CBus, {}, "5+"}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SweepSpec{SweepParameter::CBus, {2e-3, 1e-3}, "5+"}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SweepSpec{SweepParameter::CBus, {-1e-3}, "5+"}.validate()), std::invalid_argument);
    StudyContext ctx;
    CHECK_THROWS_AS(sweep({SweepParameter::CBus, {1e-3}, "9+"}, ctx, table2_cases()), std::invalid_argument);

    std::vector<SweepPoint> pts(4);
    pts[0].outcome = Outcome::Unstable;
    pts[1].outcome = Outcome::Stable;
    pts[2].outcome = Outcome::Unstable;
    pts[3].outcome = Outcome::Stable;
    const auto tc = count_transitions(pts);
    CHECK(tc.up == 2);
    CHECK(tc.down == 1);
}

TEST_CASE("scheduling premises") {
    StudyContext ctx;
    const auto cases = table2_cases();
    CHECK(scheduling_premise_check(find_case(cases, "2+"), ctx) == PremiseStatus::Ok);
    CHECK(scheduling_premise_check(find_case(cases, "5+"), ctx) == PremiseStatus::Ok);
    // The expected mode is the transitional one.
    CHECK(scheduling_premise_check(find_case(cases, "1-"), ctx) == PremiseStatus::Ok);

    CaseSpec huge = find_case(cases, "2+");
    huge.pe_after_pu = 3.0;
    CHECK(scheduling_premise_check(huge, ctx) == PremiseStatus::Premise1Violated);
}
