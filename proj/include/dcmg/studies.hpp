#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcmg/roa.hpp"

namespace dcmg {

enum class ModelKind { Rom, Full };
const char* to_string(ModelKind m);

/// Shared settings for every study run.
struct StudyContext {
    Plant plant;
    ModeTable modes = default_modes();
    Thresholds thresholds;
    IntegratorConfig integrator;
    VerdictConfig verdict;
    RoaConfig roa;

    SwitchingStrategy strategy(StrategyKind kind) const;
    double watts(double pu) const { return pu_to_watts(pu, plant.circuit); }
    void validate() const;
};

/// One load-step scenario between two modes.
struct CaseSpec {
    std::string id;
    int sigma_from = 1;
    int sigma_to = 1;
    double pe_before_pu = 0.0;
    double pe_after_pu = 0.0;
    double t_step = 2.0;  // [s]
    Outcome expected = Outcome::Stable;                 // baseline strategy
    std::optional<Outcome> expected_scheduled;          // only where known
};

std::vector<CaseSpec> table2_cases();
/// Throws std::invalid_argument for an unknown id.
const CaseSpec& find_case(const std::vector<CaseSpec>& cases, const std::string& id);
std::optional<Outcome> expected_outcome(const CaseSpec& spec, StrategyKind kind);

struct CaseRun {
    CaseSpec spec;
    StrategyKind strategy = StrategyKind::Baseline;
    ModelKind model = ModelKind::Rom;
    Verdict verdict;
    std::optional<bool> match;
    Trajectory<2> rom;   // filled for ModelKind::Rom
    Trajectory<6> full;  // filled for ModelKind::Full
};

CaseRun run_case(const CaseSpec& spec, StrategyKind kind, const StudyContext& ctx, ModelKind model = ModelKind::Rom);

struct Table2Report {
    StrategyKind strategy = StrategyKind::Baseline;
    std::vector<CaseRun> rows;  // same order as the input cases
    std::vector<std::string> mismatches;
    std::size_t matches = 0;
};

/// Runs every case (in parallel); rows keep the input order. Trajectories are
/// dropped unless keep_trajectories is set.
Table2Report run_table2(StrategyKind kind, const StudyContext& ctx, const std::vector<CaseSpec>& cases,
                        bool keep_trajectories = false);

struct CriticalResult {
    double critical_pu = 0.0;  // midpoint of the final bracket
    double stable_pu = 0.0;    // largest load seen stable
    double unstable_pu = 0.0;  // smallest load seen unstable
    std::size_t iterations = 0;
};

/// Bisection on the post-step load with a single frozen mode. Anything but a
/// Stable verdict counts as unstable. Throws std::invalid_argument when both
/// ends of the bracket give the same answer.
CriticalResult critical_step_search(ModelKind model, int sigma, double pe_start_pu, double lo_pu, double hi_pu,
                                    double tol_pu, const StudyContext& ctx, double t_step = 0.5);

struct FeedbackSample {
    double t;
    double v_bus;
    double p_e;
    double surplus;      // U_s I_ref - P_e  [W]
    double capacitor;    // v_bus C_bus dv_bus/dt  [W]
};

struct FeedbackReport {
    std::vector<FeedbackSample> samples;
    double max_identity_error = 0.0;  // relative
    // U_s I_ref < P_e with v_bus non-increasing on every sample after t_from to
    // the end of the trajectory.
    bool positive_feedback = false;
    double signature_from = 0.0;
    std::size_t signature_violations = 0;
};

/// Evaluates both sides of the power identity along a ROM trajectory and looks
/// for the positive-feedback signature after t_from.
FeedbackReport feedback_diagnostic(const Trajectory<2>& traj, const ModeTable& modes, const Plant& p,
                                   double t_from = 0.0);

/// Last time the response is outside +/- band of its final value, where the
/// band is band_frac times |final - initial| (falls back to |final|). Linear
/// interpolation at the exit crossing. Throws std::runtime_error unless at
/// least the last two samples are inside the band.
double settling_time(const std::vector<double>& t, const std::vector<double>& y, double band_frac = 0.05);

/// Settling time of I_ref after a small single-mode step.
double measure_settling_time(const StudyContext& ctx, int sigma = 1, double pe_before_pu = 0.5,
                             double pe_after_pu = 0.6);

enum class SweepParameter { CBus, GainScale };
const char* to_string(SweepParameter s);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::CBus;
    std::vector<double> values;  // C_bus in F, or dimensionless scale
    std::string base_case = "5+";
    void validate() const;
};

struct SweepPoint {
    double value = 0.0;
    Outcome outcome = Outcome::Undecided;
    std::string trigger;
    double settling_time = 0.0;  // [s]
};

std::vector<SweepPoint> sweep(const SweepSpec& spec, const StudyContext& ctx, const std::vector<CaseSpec>& cases);

/// Number of Unstable -> Stable changes along the sequence and whether the
/// opposite change ever happens.
struct TransitionCount {
    std::size_t up = 0;
    std::size_t down = 0;
};
TransitionCount count_transitions(const std::vector<SweepPoint>& points);

enum class PremiseStatus { Ok, Premise1Violated, Premise2Violated };
const char* to_string(PremiseStatus s);

/// Checks the two conditions under which forcing the transitional mode can
/// rescue a case: the ISEP lies in the transitional mode's ROA, and the
/// transitional mode's SEP lies in the ROA of the ESEP (expected mode frozen).
PremiseStatus scheduling_premise_check(const CaseSpec& spec, const StudyContext& ctx, int transitional = 1);

}  // namespace dcmg
