#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>

#include "entangle/cli/commands.hpp"
#include "entangle/cli/verify.hpp"

int main(int argc, char** argv) {
    using namespace entangle;
    using namespace entangle::cli;

    CLI::App app{"Bang-bang control for two-qubit entanglement generation"};
    app.require_subcommand(1);

    Overrides overrides;
    std::string output_dir;
    std::string mode;
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--output-dir", output_dir, "Directory for trajectory/summary/plot files");
        cmd->add_flag("--plots", overrides.plots, "Also write an SVG figure");
        cmd->add_option("--mode", mode, "Costate formulation")->check(CLI::IsMember({"lifted", "reduced"}));
        cmd->add_option("--steps", steps, "Number of control intervals")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Seed for a random +-u_max initial guess");
    };

    std::string config_path;
    std::string schedule_path;

    CLI::App* solve = app.add_subcommand("solve", "Optimize a bang-bang schedule for a scenario config (or a directory of *.cfg)");
    solve->add_option("config", config_path, "Scenario config file or directory")->required();
    add_common(solve);

    CLI::App* simulate = app.add_subcommand("simulate", "Replay a schedule CSV without optimization");
    simulate->add_option("config", config_path, "Scenario config file")->required();
    simulate->add_option("schedule", schedule_path, "Schedule CSV (t,u1,u2,u3)")->required();
    add_common(simulate);

    CLI::App* verify = app.add_subcommand("verify", "Run the oracle cross-checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitFailure;
    }

    if (!output_dir.empty()) overrides.output_dir = output_dir;
    if (!mode.empty()) overrides.mode = parse_adjoint_mode(mode);
    overrides.steps = steps;
    overrides.seed = seed;

    if (*solve) return cmd_solve(config_path, overrides, std::cout, std::cerr);
    if (*simulate) return cmd_simulate(config_path, schedule_path, overrides, std::cout, std::cerr);
    if (*verify) return cmd_verify(std::cout);
    return kExitFailure;
}
