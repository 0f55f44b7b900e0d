#pragma once

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "entangle/cli/config.hpp"
#include "entangle/dynamics.hpp"
#include "entangle/pmp_solver.hpp"

namespace entangle::cli {

struct RunArtifacts {
    std::filesystem::path trajectory;
    std::filesystem::path summary;
    std::filesystem::path schedule;
    std::vector<std::filesystem::path> plots;
};

/// Header `t,u1..um,concurrence,phi1..phim`, one row per grid point. Row i
/// carries the controls (and midpoint switching values) of [t_i, t_{i+1});
/// the final row repeats the last interval's values.
std::string trajectory_csv(const Trajectory& traj, const SwitchRecord& sw);

/// Header `t,u1..um`, one row per control interval (row i starts at t_i).
std::string schedule_csv(const ControlSchedule& sched);

/// Parses a schedule CSV and checks it against the grid of `cfg`. Throws
/// InvalidSchedule on grid mismatch or out-of-bound controls.
ControlSchedule parse_schedule_csv(const std::string& text, const ScenarioConfig& cfg, int n_controls,
                                   const std::string& source = "<schedule>");
ControlSchedule load_schedule_csv(const std::filesystem::path& path, const ScenarioConfig& cfg, int n_controls);

nlohmann::ordered_json solve_summary(const ScenarioConfig& cfg, const SolveReport& report);
nlohmann::ordered_json simulate_summary(const ScenarioConfig& cfg, const Trajectory& traj,
                                        const CostateTrajectory& costate, const SwitchRecord& sw);

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace entangle::cli
