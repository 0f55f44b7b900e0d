#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entangle::cli {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Cross-checks of the pipeline against the independent oracles: terminal
/// gradient vs finite differences, switching functions vs control
/// sensitivities, RK4 vs exact propagation and its convergence order, and the
/// solver vs exhaustive search on a 4-interval grid.
std::vector<CheckResult> run_verify_suite();

/// Prints a pass/fail table; returns 0 iff every check passed.
int cmd_verify(std::ostream& out);

}  // namespace entangle::cli
