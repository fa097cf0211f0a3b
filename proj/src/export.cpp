#include "dcmg/export.hpp"

#include <fmt/chrono.h>
#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace dcmg {

std::string fmt_num(double v) { return fmt::format("{:.9g}", v); }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        out << content;
        out.flush();
        if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("DCMG_OUTPUT_DIR"); env && *env) return env;
    return cfg.output_dir;
}

std::string trajectory_csv(const Trajectory<2>& traj, const ModeTable& modes, const Plant& p) {
    std::string out = "t,sigma,S_v,v_bus,i_line,I_ref\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const RomState s = RomState::from(traj.x[i]);
        const ModeDef& m = mode_at(modes, traj.sigma[i]);
        out += fmt::format("{},{},{},{},{},{}\n", fmt_num(traj.t[i]), traj.sigma[i], fmt_num(s.S_v),
                           fmt_num(s.v_bus), fmt_num(rom_line_current(s, m, p)),
                           fmt_num(current_reference(s, m, p)));
    }
    return out;
}

std::string trajectory_csv(const Trajectory<6>& traj, const ModeTable& modes, const Plant& p) {
    std::string out = "t,sigma,S_v,v_bus,i_line,I_ref,S_i,i_bat,v_bat\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const FullState s = FullState::from(traj.x[i]);
        const ModeDef& m = mode_at(modes, traj.sigma[i]);
        double i_ref = s.S_v + p.control.k_Pv * (m.U_ref - m.R_d * s.i_line - s.v_bat);
        if (p.options.clamp_current_ref) i_ref = std::clamp(i_ref, p.circuit.I_low, p.circuit.I_up);
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", fmt_num(traj.t[i]), traj.sigma[i], fmt_num(s.S_v),
                           fmt_num(s.v_bus), fmt_num(s.i_line), fmt_num(i_ref), fmt_num(s.S_i), fmt_num(s.i_bat),
                           fmt_num(s.v_bat));
    }
    return out;
}

std::string polyline_csv(const Polyline& line) {
    std::string out = "S_v,v_bus\n";
    for (const auto& s : line) out += fmt::format("{},{}\n", fmt_num(s.S_v), fmt_num(s.v_bus));
    return out;
}

namespace {
int label_code(CellLabel l) {
    switch (l) {
        case CellLabel::Inside: return 1;
        case CellLabel::Outside: return 0;
        case CellLabel::BoundaryBand: return 2;
        case CellLabel::Invalid: return -1;
        case CellLabel::Undecided: return 3;
    }
    return 3;
}
}  // namespace

std::string grid_csv(const MembershipGrid& grid) {
    std::string out;
    for (std::size_t j = 0; j < grid.n_v; ++j) {
        for (std::size_t i = 0; i < grid.n_sv; ++i) {
            if (i) out += ',';
            out += std::to_string(label_code(grid.at(i, j)));
        }
        out += '\n';
    }
    return out;
}

std::string grid_extent(const MembershipGrid& grid, const RoaContext& ctx) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "context" << YAML::Value << ctx.strategy.describe();
    e << YAML::Key << "p_e_watts" << YAML::Value << fmt_num(ctx.p_e);
    e << YAML::Key << "sv_min" << YAML::Value << fmt_num(grid.box.sv_min);
    e << YAML::Key << "sv_max" << YAML::Value << fmt_num(grid.box.sv_max);
    e << YAML::Key << "v_min" << YAML::Value << fmt_num(grid.box.v_min);
    e << YAML::Key << "v_max" << YAML::Value << fmt_num(grid.box.v_max);
    e << YAML::Key << "n_sv" << YAML::Value << grid.n_sv;
    e << YAML::Key << "n_v" << YAML::Value << grid.n_v;
    e << YAML::Key << "rows" << YAML::Value << "v_bus ascending";
    e << YAML::Key << "codes" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "inside" << YAML::Value << 1 << YAML::Key << "outside" << YAML::Value << 0;
    e << YAML::Key << "boundary_band" << YAML::Value << 2 << YAML::Key << "undecided" << YAML::Value << 3;
    e << YAML::Key << "invalid" << YAML::Value << -1 << YAML::EndMap;
    e << YAML::Key << "inside_cells" << YAML::Value << grid.count(CellLabel::Inside);
    e << YAML::Key << "inside_area" << YAML::Value << fmt_num(area_estimate(grid));
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::string table2_csv(const Table2Report& rep) {
    std::string out = "id,from,to,pe_before_pu,pe_after_pu,strategy,verdict,trigger,final_mode,expected,match\n";
    for (const auto& r : rep.rows) {
        const auto exp = expected_outcome(r.spec, rep.strategy);
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.spec.id, r.spec.sigma_from, r.spec.sigma_to,
                           fmt_num(r.spec.pe_before_pu), fmt_num(r.spec.pe_after_pu), to_string(rep.strategy),
                           to_string(r.verdict.outcome), r.verdict.trigger, r.verdict.final_mode,
                           exp ? to_string(*exp) : "", r.match ? (*r.match ? "yes" : "no") : "");
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points, SweepParameter param) {
    std::string out = fmt::format("{},verdict,trigger,settling_time\n", to_string(param));
    for (const auto& p : points) {
        out += fmt::format("{},{},{},{}\n", fmt_num(p.value), to_string(p.outcome), p.trigger,
                           fmt_num(p.settling_time));
    }
    return out;
}

std::string feedback_csv(const FeedbackReport& rep) {
    std::string out = "t,v_bus,p_e,surplus,capacitor\n";
    for (const auto& s : rep.samples) {
        out += fmt::format("{},{},{},{},{}\n", fmt_num(s.t), fmt_num(s.v_bus), fmt_num(s.p_e), fmt_num(s.surplus),
                           fmt_num(s.capacitor));
    }
    return out;
}

std::string equilibria_csv(const std::vector<Equilibrium>& eqs) {
    std::string out = "sigma,S_v,v_bus,kind,marginal,lambda1_re,lambda1_im,lambda2_re,lambda2_im\n";
    for (const auto& e : eqs) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", e.mode.sigma, fmt_num(e.point.S_v),
                           fmt_num(e.point.v_bus), to_string(e.kind), e.marginal ? 1 : 0,
                           fmt_num(e.eigenvalues[0].real()), fmt_num(e.eigenvalues[0].imag()),
                           fmt_num(e.eigenvalues[1].real()), fmt_num(e.eigenvalues[1].imag()));
    }
    return out;
}

std::string run_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& files) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "command" << YAML::Value << command;
    e << YAML::Key << "config_hash" << YAML::Value << hash_hex(config_hash(cfg));
    e << YAML::Key << "files" << YAML::Value << YAML::BeginSeq;
    for (const auto& f : files) e << f;
    e << YAML::EndSeq;
    e << YAML::Key << "versions" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dcmg" << YAML::Value << "0.1.0";
    e << YAML::Key << "fmt" << YAML::Value << FMT_VERSION;
    e << YAML::Key << "compiler" << YAML::Value << __VERSION__;
    e << YAML::EndMap;
    e << YAML::Key << "timestamp" << YAML::Value
      << fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                  std::chrono::system_clock::now())));
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

}  // namespace dcmg
