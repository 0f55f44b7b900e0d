#include "entangle/cli/commands.hpp"

#include <algorithm>
#include <future>
#include <ostream>
#include <sstream>
#include <vector>

#include "entangle/cli/plot.hpp"

namespace entangle::cli {

namespace fs = std::filesystem;

void apply_overrides(ScenarioConfig& cfg, const Overrides& overrides) {
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.plots) cfg.plots = true;
    if (overrides.mode) cfg.mode = *overrides.mode;
    if (overrides.steps) {
        if (*overrides.steps < 1) throw InvalidParameter("--steps must be >= 1");
        cfg.n_steps = *overrides.steps;
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
}

SolveOutcome run_solve(const ScenarioConfig& cfg) {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    SolveReport report = forward_backward_solve(cfg.initial_state(), h, cfg.solve_params());

    RunArtifacts files;
    files.trajectory = cfg.output_dir / "trajectory.csv";
    files.schedule = cfg.output_dir / "schedule.csv";
    files.summary = cfg.output_dir / "summary.json";
    write_text(files.trajectory, trajectory_csv(report.trajectory, report.switching));
    write_text(files.schedule, schedule_csv(report.schedule));
    write_text(files.summary, solve_summary(cfg, report).dump(2) + "\n");
    if (cfg.plots) {
        files.plots.push_back(cfg.output_dir / "figure.svg");
        write_text(files.plots.back(), render_trajectory_svg(report.trajectory, cfg.name));
    }
    return SolveOutcome{cfg, std::move(report), std::move(files)};
}

namespace {

std::string describe(const SolveOutcome& o) {
    std::ostringstream s;
    s << o.config.name << ": terminal concurrence " << o.report.terminal_concurrence << " after "
      << o.report.iterations << " iterations (" << to_string(o.report.mode) << ", "
      << to_string(o.report.stop_reason) << (o.report.converged ? ", converged" : ", NOT converged") << ")\n";
    if (o.report.diagnostics.degenerate_terminal_gradient) {
        s << o.config.name << ": warning: terminal gradient is degenerate (reduced state is pure)\n";
    }
    s << "  wrote " << o.artifacts.trajectory.generic_string() << ", " << o.artifacts.summary.generic_string();
    for (const auto& p : o.artifacts.plots) s << ", " << p.generic_string();
    s << '\n';
    return s.str();
}

// Result of one scenario in a directory sweep.
struct ScenarioRun {
    int code = kExitFailure;
    std::string out;
    std::string err;
};

ScenarioRun solve_one(const fs::path& path, const Overrides& overrides, bool nest_by_name) {
    ScenarioRun run;
    try {
        ScenarioConfig cfg = load_config(path);
        apply_overrides(cfg, overrides);
        if (nest_by_name) cfg.output_dir /= cfg.name;
        const SolveOutcome outcome = run_solve(cfg);
        run.out = describe(outcome);
        run.code = outcome.report.converged ? kExitOk : kExitNotConverged;
    } catch (const std::exception& e) {
        run.err = std::string("error: ") + e.what() + "\n";
        run.code = kExitFailure;
    }
    return run;
}

int combine(int a, int b) {
    if (a == kExitFailure || b == kExitFailure) return kExitFailure;
    if (a == kExitNotConverged || b == kExitNotConverged) return kExitNotConverged;
    return kExitOk;
}

}  // namespace

int cmd_solve(const fs::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(config)) {
        const ScenarioRun run = solve_one(config, overrides, false);
        out << run.out;
        err << run.err;
        return run.code;
    }

    std::vector<fs::path> configs;
    for (const auto& entry : fs::directory_iterator(config)) {
        if (entry.is_regular_file() && entry.path().extension() == ".cfg") configs.push_back(entry.path());
    }
    std::sort(configs.begin(), configs.end());
    if (configs.empty()) {
        err << "error: no *.cfg files in " << config.generic_string() << "\n";
        return kExitFailure;
    }

    std::vector<std::future<ScenarioRun>> jobs;
    jobs.reserve(configs.size());
    for (const auto& path : configs) {
        jobs.push_back(std::async(std::launch::async, solve_one, path, overrides, true));
    }
    int code = kExitOk;
    for (auto& job : jobs) {
        const ScenarioRun run = job.get();
        out << run.out;
        err << run.err;
        code = combine(code, run.code);
    }
    return code;
}

int cmd_simulate(const fs::path& config, const fs::path& schedule, const Overrides& overrides, std::ostream& out,
                 std::ostream& err) {
    try {
        ScenarioConfig cfg = load_config(config);
        apply_overrides(cfg, overrides);
        const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
        const ControlSchedule sched = load_schedule_csv(schedule, cfg, static_cast<int>(h.size()));

        const Trajectory traj = propagate(cfg.initial_state(), h, sched, PropagateOptions{cfg.substeps});
        const CostateTrajectory costate = backward_adjoint(traj, h, cfg.mode, cfg.reg, cfg.substeps);
        const SwitchRecord sw = switching_record(traj, costate, h, cfg.flip_threshold);

        RunArtifacts files;
        files.trajectory = cfg.output_dir / "trajectory.csv";
        files.summary = cfg.output_dir / "summary.json";
        write_text(files.trajectory, trajectory_csv(traj, sw));
        write_text(files.summary, simulate_summary(cfg, traj, costate, sw).dump(2) + "\n");
        if (cfg.plots) {
            files.plots.push_back(cfg.output_dir / "figure.svg");
            write_text(files.plots.back(), render_trajectory_svg(traj, cfg.name));
        }
        out << cfg.name << ": terminal concurrence " << traj.terminal_concurrence() << " (replayed "
            << sched.n_steps() << " intervals)\n";
        out << "  wrote " << files.trajectory.generic_string() << ", " << files.summary.generic_string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace entangle::cli
