#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dcmg/config.hpp"

namespace dcmg {

/// 9 significant digits, shortest form.
std::string fmt_num(double v);

/// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// DCMG_OUTPUT_DIR when set, else the configured directory.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

std::string trajectory_csv(const Trajectory<2>& traj, const ModeTable& modes, const Plant& p);
std::string trajectory_csv(const Trajectory<6>& traj, const ModeTable& modes, const Plant& p);
std::string polyline_csv(const Polyline& line);
/// Label codes, one row per v_bus cell (lowest first), one column per S_v cell.
std::string grid_csv(const MembershipGrid& grid);
std::string grid_extent(const MembershipGrid& grid, const RoaContext& ctx);
std::string table2_csv(const Table2Report& rep);
std::string sweep_csv(const std::vector<SweepPoint>& points, SweepParameter param);
std::string feedback_csv(const FeedbackReport& rep);
std::string equilibria_csv(const std::vector<Equilibrium>& eqs);

/// YAML run record: command, config hash, output files, library versions and
/// a UTC timestamp (the only field that changes between identical runs).
std::string run_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& files);

}  // namespace dcmg
