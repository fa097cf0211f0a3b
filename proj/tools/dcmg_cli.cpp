// dcmg: command-line front end for the DC microgrid switched-system library.
//
// Exit codes: 0 Stable (or success), 2 Unstable (or a failed check),
// 3 Undecided, 1 usage or configuration error.

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcmg/export.hpp"

using namespace dcmg;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitUndecided = 3;

int exit_code(Outcome o) {
    switch (o) {
        case Outcome::Stable: return kExitOk;
        case Outcome::Unstable: return kExitUnstable;
        case Outcome::Undecided: return kExitUndecided;
    }
    return kExitUndecided;
}

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// "0.1pu" -> per unit, plain numbers are watts.
double parse_power(const std::string& text, const CircuitParams& c) {
    std::string s = text;
    bool pu = false;
    if (s.size() > 2 && s.compare(s.size() - 2, 2, "pu") == 0) {
        pu = true;
        s.resize(s.size() - 2);
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError(fmt::format("cannot read power '{}'", text));
    }
    if (used != s.size()) throw UsageError(fmt::format("cannot read power '{}'", text));
    return pu ? pu_to_watts(v, c) : v;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument("");
        const auto a = std::stoul(text.substr(0, x));
        const auto b = std::stoul(text.substr(x + 1));
        return {a, b};
    } catch (const std::exception&) {
        throw UsageError(fmt::format("grid must look like 200x200, got '{}'", text));
    }
}

SwitchingStrategy parse_context(const std::string& s, const StudyContext& st) {
    if (s.size() == 5 && s.rfind("mode", 0) == 0 && s[4] >= '1' && s[4] <= '4') {
        return SwitchingStrategy::frozen(s[4] - '0', st.modes);
    }
    try {
        return st.strategy(parse_strategy(s));
    } catch (const std::invalid_argument&) {
        throw UsageError(fmt::format("unknown context '{}' (baseline, scheduled, mode1..mode4)", s));
    }
}

class Outputs {
public:
    Outputs(const RunConfig& cfg, std::string command)
        : cfg_(cfg), dir_(resolve_output_dir(cfg)), command_(std::move(command)) {}

    void write(const std::string& name, const std::string& content) {
        write_atomic(dir_ / name, content);
        files_.push_back(name);
    }
    void finish() { write_atomic(dir_ / (command_ + "_manifest.yaml"), run_manifest(cfg_, command_, files_)); }
    const fs::path& dir() const { return dir_; }

private:
    const RunConfig& cfg_;
    fs::path dir_;
    std::string command_;
    std::vector<std::string> files_;
};

void print_equilibria(const std::vector<Equilibrium>& eqs) {
    for (const auto& e : eqs) {
        fmt::print("mode {}  {}  S_v = {:.6g} A  v_bus = {:.7g} V  lambda = {:.6g}{:+.6g}j, {:.6g}{:+.6g}j{}\n",
                   e.mode.sigma, to_string(e.kind), e.point.S_v, e.point.v_bus, e.eigenvalues[0].real(),
                   e.eigenvalues[0].imag(), e.eigenvalues[1].real(), e.eigenvalues[1].imag(),
                   e.marginal ? "  (marginal)" : "");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DC microgrid switched-system analysis"};
    app.require_subcommand(1);
    std::string config_path;
    std::string output_dir;
    app.add_option("-c,--config", config_path, "YAML configuration file");
    app.add_option("-o,--output-dir", output_dir, "Output directory (DCMG_OUTPUT_DIR still wins)");

    // equilibria
    auto* eq_cmd = app.add_subcommand("equilibria", "Equilibria and their classification");
    int eq_mode = 0;
    std::string eq_pe;
    eq_cmd->add_option("--mode", eq_mode, "Mode 1..4 (all modes when omitted)")->check(CLI::Range(1, 4));
    eq_cmd->add_option("--pe", eq_pe, "Equivalent load, watts or with a pu suffix")->required();

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a load step and print the verdict");
    std::string sim_case, sim_strategy = "baseline", sim_model = "rom", sim_pe0, sim_pe1;
    int sim_from = 0;
    double sim_t_step = 2.0;
    sim_cmd->add_option("--case", sim_case, "Case id, e.g. 2+");
    sim_cmd->add_option("--from", sim_from, "Initial mode for an ad-hoc step")->check(CLI::Range(1, 4));
    sim_cmd->add_option("--pe0", sim_pe0, "Load before the step");
    sim_cmd->add_option("--pe1", sim_pe1, "Load after the step");
    sim_cmd->add_option("--t-step", sim_t_step, "Step time [s]");
    sim_cmd->add_option("--strategy", sim_strategy)->check(CLI::IsMember({"baseline", "scheduled"}));
    sim_cmd->add_option("--model", sim_model)->check(CLI::IsMember({"rom", "full"}));

    // roa
    auto* roa_cmd = app.add_subcommand("roa", "Stability boundary and membership grid");
    std::string roa_context = "baseline", roa_pe, roa_grid_text = "100x100";
    std::vector<double> roa_box{-40.0, 40.0, 20.0, 160.0};
    std::vector<double> trace_box{-60.0, 60.0, 0.0, 200.0};
    bool roa_no_grid = false;
    roa_cmd->add_option("--context", roa_context, "baseline, scheduled or mode1..mode4");
    roa_cmd->add_option("--pe", roa_pe, "Post-disturbance load")->required();
    roa_cmd->add_option("--grid", roa_grid_text, "Grid resolution NxM (S_v x v_bus)");
    roa_cmd->add_option("--box", roa_box, "Grid box: sv_min sv_max v_min v_max")->expected(4);
    roa_cmd->add_option("--trace-box", trace_box, "Tracing box: sv_min sv_max v_min v_max")->expected(4);
    roa_cmd->add_flag("--no-grid", roa_no_grid, "Only trace the boundary");

    // table2
    auto* t2_cmd = app.add_subcommand("table2", "Run the case matrix");
    std::string t2_strategy = "baseline";
    t2_cmd->add_option("--strategy", t2_strategy)->check(CLI::IsMember({"baseline", "scheduled"}));

    // critical
    auto* crit_cmd = app.add_subcommand("critical", "Critical load step of a single mode");
    std::string crit_model = "rom", crit_start = "0.5pu", crit_lo = "1.0pu", crit_hi = "3.0pu";
    int crit_mode = 1;
    double crit_tol = 0.01;
    crit_cmd->add_option("--model", crit_model)->check(CLI::IsMember({"rom", "full"}));
    crit_cmd->add_option("--mode", crit_mode)->check(CLI::Range(1, 4));
    crit_cmd->add_option("--start", crit_start, "Initial load");
    crit_cmd->add_option("--lo", crit_lo, "Stable end of the bracket");
    crit_cmd->add_option("--hi", crit_hi, "Unstable end of the bracket");
    crit_cmd->add_option("--tol", crit_tol, "Bracket width [pu]");

    // sweep
    auto* sw_cmd = app.add_subcommand("sweep", "C_bus or controller-speed sweep");
    std::string sw_param = "cbus", sw_case = "5+";
    std::vector<double> sw_values;
    sw_cmd->add_option("--param", sw_param)->check(CLI::IsMember({"cbus", "gain"}));
    sw_cmd->add_option("--values", sw_values, "C_bus in F, or gain scale factors");
    sw_cmd->add_option("--case", sw_case);

    // diagnose
    auto* dg_cmd = app.add_subcommand("diagnose", "Power-balance series and positive-feedback check");
    std::string dg_case = "5+", dg_strategy = "baseline";
    dg_cmd->add_option("--case", dg_case);
    dg_cmd->add_option("--strategy", dg_strategy)->check(CLI::IsMember({"baseline", "scheduled"}));

    // config
    auto* cfg_cmd = app.add_subcommand("config", "Print the effective configuration");
    cfg_cmd->add_subcommand("dump", "Print the effective configuration as YAML");
    cfg_cmd->add_subcommand("hash", "Print the configuration hash");
    cfg_cmd->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        cfg.validate();
        const StudyContext& st = cfg.study;
        const Plant& plant = st.plant;

        if (*cfg_cmd) {
            if (cfg_cmd->got_subcommand("dump")) {
                fmt::print("{}", dump_config(cfg));
            } else {
                fmt::print("{}\n", hash_hex(config_hash(cfg)));
            }
            return kExitOk;
        }

        if (*eq_cmd) {
            const double pe = parse_power(eq_pe, plant.circuit);
            Outputs out(cfg, "equilibria");
            std::vector<Equilibrium> all;
            for (int s = 1; s <= 4; ++s) {
                if (eq_mode != 0 && s != eq_mode) continue;
                const ModeDef& m = mode_at(st.modes, s);
                auto eqs = equilibria(pe, m, plant);
                if (eqs.empty()) {
                    fmt::print("mode {}  no equilibria (discriminant < 0)\n", s);
                }
                print_equilibria(eqs);
                all.insert(all.end(), eqs.begin(), eqs.end());
            }
            out.write("equilibria.csv", equilibria_csv(all));
            out.finish();
            return kExitOk;
        }

        if (*sim_cmd) {
            CaseSpec spec;
            if (!sim_case.empty()) {
                spec = find_case(cfg.cases, sim_case);
            } else {
                if (sim_from == 0 || sim_pe0.empty() || sim_pe1.empty()) {
                    throw UsageError("simulate needs --case, or --from with --pe0 and --pe1");
                }
                spec.id = "adhoc";
                spec.sigma_from = sim_from;
                spec.pe_before_pu = watts_to_pu(parse_power(sim_pe0, plant.circuit), plant.circuit);
                spec.pe_after_pu = watts_to_pu(parse_power(sim_pe1, plant.circuit), plant.circuit);
                spec.t_step = sim_t_step;
            }
            const auto kind = parse_strategy(sim_strategy);
            const auto model = sim_model == "rom" ? ModelKind::Rom : ModelKind::Full;
            const auto run = run_case(spec, kind, st, model);
            Outputs out(cfg, "simulate");
            const std::string name = fmt::format("trajectory_{}_{}_{}.csv", spec.id, sim_strategy, sim_model);
            out.write(name, model == ModelKind::Rom ? trajectory_csv(run.rom, st.modes, plant)
                                                    : trajectory_csv(run.full, st.modes, plant));
            out.finish();
            const auto& v = run.verdict;
            fmt::print("case {} strategy {} model {}: {} ({}), final mode {}, v_bus = {:.6g} V, EM {} at {:.6g} V\n",
                       spec.id, sim_strategy, sim_model, to_string(v.outcome), v.trigger, v.final_mode,
                       v.final_slow.v_bus, v.esep.sigma, v.esep_point.v_bus);
            return exit_code(v.outcome);
        }

        if (*roa_cmd) {
            const double pe = parse_power(roa_pe, plant.circuit);
            const RoaContext ctx{parse_context(roa_context, st), pe};
            Box tbox{trace_box[0], trace_box[1], trace_box[2], trace_box[3]};
            tbox.validate();
            if (const auto saddle = context_saddle(ctx, plant)) tbox = tbox.united(saddle->point);
            Outputs out(cfg, "roa");
            const std::string stem = fmt::format("roa_{}_{}", roa_context, fmt_num(pe));
            const auto boundary = trace_stability_boundary(ctx, plant, tbox, st.roa);
            if (boundary.unbounded) {
                fmt::print("context {} at {} W: no saddle of the expected mode, region limited by the box\n",
                           roa_context, pe);
            } else {
                fmt::print("context {} at {} W: UEP ({:.6g}, {:.6g}), {} branches\n", roa_context, pe,
                           boundary.uep->point.S_v, boundary.uep->point.v_bus, boundary.branches.size());
                for (std::size_t b = 0; b < boundary.branches.size(); ++b) {
                    out.write(fmt::format("{}_branch{}.csv", stem, b), polyline_csv(boundary.branches[b]));
                }
            }
            if (!roa_no_grid) {
                const auto [n_sv, n_v] = parse_grid(roa_grid_text);
                const Box gbox{roa_box[0], roa_box[1], roa_box[2], roa_box[3]};
                const auto grid = roa_grid(ctx, gbox, n_sv, n_v, plant, st.roa, cfg.seed);
                out.write(stem + "_grid.csv", grid_csv(grid));
                out.write(stem + "_grid.yaml", grid_extent(grid, ctx));
                fmt::print("grid {}x{}: {} inside, {} outside, {} boundary-band, {} undecided; area {:.6g}\n", n_sv,
                           n_v, grid.count(CellLabel::Inside), grid.count(CellLabel::Outside),
                           grid.count(CellLabel::BoundaryBand), grid.count(CellLabel::Undecided),
                           area_estimate(grid));
            }
            out.finish();
            return kExitOk;
        }

        if (*t2_cmd) {
            const auto kind = parse_strategy(t2_strategy);
            const auto rep = run_table2(kind, st, cfg.cases);
            Outputs out(cfg, "table2");
            out.write(fmt::format("table2_{}.csv", t2_strategy), table2_csv(rep));
            out.finish();
            for (const auto& r : rep.rows) {
                const auto exp = expected_outcome(r.spec, kind);
                fmt::print("{:>3}  mode {} -> {}  {:>5} -> {:>5} pu  {:<9} ({}){}\n", r.spec.id, r.spec.sigma_from,
                           r.spec.sigma_to, r.spec.pe_before_pu, r.spec.pe_after_pu, to_string(r.verdict.outcome),
                           r.verdict.trigger,
                           exp ? (r.match.value() ? "  match" : fmt::format("  MISMATCH (expected {})",
                                                                             to_string(*exp)))
                               : "");
            }
            fmt::print("{} matches, {} mismatches\n", rep.matches, rep.mismatches.size());
            return rep.mismatches.empty() ? kExitOk : kExitUnstable;
        }

        if (*crit_cmd) {
            const auto model = crit_model == "rom" ? ModelKind::Rom : ModelKind::Full;
            const auto& c = plant.circuit;
            const auto r = critical_step_search(model, crit_mode, watts_to_pu(parse_power(crit_start, c), c),
                                                watts_to_pu(parse_power(crit_lo, c), c),
                                                watts_to_pu(parse_power(crit_hi, c), c), crit_tol, st);
            Outputs out(cfg, "critical");
            out.write(fmt::format("critical_{}.csv", crit_model),
                      fmt::format("model,mode,critical_pu,stable_pu,unstable_pu,iterations\n{},{},{},{},{},{}\n",
                                  crit_model, crit_mode, fmt_num(r.critical_pu), fmt_num(r.stable_pu),
                                  fmt_num(r.unstable_pu), r.iterations));
            out.finish();
            fmt::print("{:.2f} pu ± {}\n", r.critical_pu, crit_tol);
            return kExitOk;
        }

        if (*sw_cmd) {
            SweepSpec spec;
            spec.parameter = sw_param == "cbus" ? SweepParameter::CBus : SweepParameter::GainScale;
            spec.base_case = sw_case;
            spec.values = sw_values;
            if (spec.values.empty()) {
                spec.values = spec.parameter == SweepParameter::CBus
                                  ? std::vector<double>{2e-3, 5e-3, 10e-3, 20e-3, 50e-3}
                                  : std::vector<double>{0.5, 1.0, 2.0, 4.0};
            }
            const auto pts = sweep(spec, st, cfg.cases);
            Outputs out(cfg, "sweep");
            out.write(fmt::format("sweep_{}_{}.csv", sw_param, sw_case), sweep_csv(pts, spec.parameter));
            out.finish();
            for (const auto& p : pts) {
                fmt::print("{} = {:<8g} {:<9} t_s = {:.4f} s\n", to_string(spec.parameter), p.value,
                           to_string(p.outcome), p.settling_time);
            }
            const auto tr = count_transitions(pts);
            fmt::print("Unstable->Stable transitions: {}, Stable->Unstable: {}\n", tr.up, tr.down);
            return kExitOk;
        }

        if (*dg_cmd) {
            const auto& spec = find_case(cfg.cases, dg_case);
            const auto run = run_case(spec, parse_strategy(dg_strategy), st);
            const auto rep = feedback_diagnostic(run.rom, st.modes, plant, spec.t_step);
            Outputs out(cfg, "diagnose");
            out.write(fmt::format("diagnose_{}_{}.csv", dg_case, dg_strategy), feedback_csv(rep));
            out.finish();
            fmt::print("case {}: {} ({}); identity error {:.3g}; positive feedback after the step: {} ({} violations)\n",
                       dg_case, to_string(run.verdict.outcome), run.verdict.trigger, rep.max_identity_error,
                       rep.positive_feedback ? "yes" : "no", rep.signature_violations);
            return kExitOk;
        }
    } catch (const UsageError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    }
    return kExitOk;
}
