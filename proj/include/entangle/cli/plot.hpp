#pragma once

#include <string>

#include "entangle/dynamics.hpp"

namespace entangle::cli {

/// Stacked SVG line chart: one step plot per control, concurrence at the bottom.
std::string render_trajectory_svg(const Trajectory& traj, const std::string& title);

}  // namespace entangle::cli
