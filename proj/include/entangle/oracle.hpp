#pragma once

// Independent reference computations used to check the main pipeline. Nothing
// here calls the RK4 integrator, the costate pass or the sweep.

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "entangle/dynamics.hpp"
#include "entangle/quantum_core.hpp"

namespace entangle::oracle {

/// exp(-i H t) from the eigendecomposition of the Hermitian generator.
Mat4 unitary(const Mat4& h_total, double t);

/// U rho0 U^dag with U = exp(-i h_total dt).
DensityMatrix exact_propagate_constant(const DensityMatrix& rho0, const Mat4& h_total, double dt);

/// Exact terminal state for a piecewise-constant schedule.
DensityMatrix exact_propagate(const DensityMatrix& rho0, const HamiltonianSet& h, const ControlSchedule& sched);

struct PatternResult {
    Eigen::MatrixXi pattern;  // n_steps x m, entries in {-1, +1}
    double terminal_concurrence = 0.0;
    long evaluated = 0;
};

inline constexpr int kMaxSearchBits = 15;

/// Best +-u_max pattern on a uniform grid by full enumeration. Ties go to the
/// lexicographically smallest pattern (row-major, -1 < +1). Throws
/// SearchTooLarge when n_steps * m > kMaxSearchBits.
PatternResult exhaustive_bang_bang(const DensityMatrix& rho0, const HamiltonianSet& h, double t_end, int n_steps,
                                   double u_max, double t_start = 0.0);

/// J = -sqrt(2 (1 - Tr X^2)) evaluated on the Hermitian part of X, no clamping.
double terminal_cost(const Mat2& x);

/// Central difference (J(x + h d) - J(x - h d)) / 2h.
double directional_derivative(const Mat2& x, const Mat2& direction, double h);

/// Hilbert-Schmidt gradient of J by central differences along the Hermitian
/// basis {E11, E22, E12 + E21, i(E12 - E21)}. Throws DegenerateState when
/// 1 - Tr rho_A^2 <= 10 h.
ReducedState finite_diff_cost_gradient(const ReducedState& rho_a, double h = 1e-6);

}  // namespace entangle::oracle
