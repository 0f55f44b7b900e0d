#pragma once

// Scenario configuration: a flat `key = value` text file, one entry per line,
// `#` starts a comment. Example:
//
//   name     = case1
//   preset   = case1
//   n_steps  = 200
//   mode     = lifted

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "entangle/errors.hpp"
#include "entangle/pmp_solver.hpp"

namespace entangle::cli {

class ConfigError : public Error {
public:
    ConfigError(const std::string& source, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

struct ScenarioConfig {
    std::string name = "scenario";
    // Either a named preset or an explicit (sep_basis, bell, epsilon) triple.
    std::optional<std::string> preset;
    std::string sep_basis = "10";
    BellKind bell = BellKind::PsiPlus;
    double epsilon = kDefaultEpsilon;

    double t_start = 0.0;
    double t_end = 1.0;
    int n_steps = 200;
    double u_max = 1.0;
    AdjointMode mode = AdjointMode::Lifted;
    int max_iters = 100;
    double cost_tol = 1e-8;
    double reg = kDefaultGradientReg;
    std::optional<std::uint64_t> seed;  // set: random +-u_max initial guess
    int substeps = 10;
    bool relaxation = true;
    double flip_threshold = 1e-10;
    int max_flips_per_iter = 0;

    std::filesystem::path output_dir = "out";
    bool plots = false;

    DensityMatrix initial_state() const;
    SolveParams solve_params() const;
    nlohmann::ordered_json to_json() const;
};

/// Parses config text; `source` names the input in error messages.
ScenarioConfig parse_config(std::string_view text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace entangle::cli
