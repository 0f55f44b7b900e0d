#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "entangle/cli/artifacts.hpp"
#include "entangle/cli/config.hpp"

namespace entangle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitNotConverged = 2;

/// Command-line flags that take precedence over config-file values.
struct Overrides {
    std::optional<std::filesystem::path> output_dir;
    bool plots = false;
    std::optional<AdjointMode> mode;
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
};

void apply_overrides(ScenarioConfig& cfg, const Overrides& overrides);

/// Solves one config file, or every `*.cfg` in a directory (in parallel, each
/// into `<output_dir>/<name>/`). Exit 0 when every run converged, 2 when at
/// least one did not, 1 on any error.
int cmd_solve(const std::filesystem::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err);

/// Replays a schedule CSV without optimization.
int cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& schedule, const Overrides& overrides,
                 std::ostream& out, std::ostream& err);

struct SolveOutcome {
    ScenarioConfig config;
    SolveReport report;
    RunArtifacts artifacts;
};

/// Runs the solver for an already-parsed config and writes its artifacts.
SolveOutcome run_solve(const ScenarioConfig& cfg);

}  // namespace entangle::cli
