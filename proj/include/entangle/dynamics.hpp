#pragma once

// Controlled two-qubit Hamiltonians and Liouville-von Neumann propagation for
// piecewise-constant controls on a uniform grid (hbar = 1).

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

#include "entangle/quantum_core.hpp"

namespace entangle {

/// H(u) = drift + sum_k u_k controls[k]. Every member must be Hermitian.
class HamiltonianSet {
public:
    HamiltonianSet(const Mat4& drift, std::vector<Mat4> controls);

    /// H_d = sx(x)sz + sz(x)sx with the three antisymmetric exchange controls
    ///   H1 = sx(x)sy - sy(x)sx,  H2 = sy(x)sz - sz(x)sy,  H3 = sz(x)sx - sx(x)sz.
    static HamiltonianSet two_qubit_exchange();

    const Mat4& drift() const { return drift_; }
    const std::vector<Mat4>& controls() const { return controls_; }
    const Mat4& control(std::size_t k) const { return controls_.at(k); }
    std::size_t size() const { return controls_.size(); }

    /// Every operator multiplied by -1; generates the time-reversed flow.
    HamiltonianSet negated() const;

private:
    Mat4 drift_;
    std::vector<Mat4> controls_;
};

Mat4 assemble(const HamiltonianSet& h, std::span<const double> u);

/// Piecewise-constant control signal: row i holds u(t) on [t_i, t_{i+1}).
class ControlSchedule {
public:
    /// values is n_steps x m. Throws InvalidSchedule if any |value| > u_max,
    /// t_end <= t_start, or the grid is empty.
    ControlSchedule(double t_start, double t_end, Eigen::MatrixXd values, double u_max);

    static ControlSchedule constant(double t_start, double t_end, int n_steps, std::span<const double> u,
                                    double u_max);

    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    double u_max() const { return u_max_; }
    int n_steps() const { return static_cast<int>(values_.rows()); }
    int n_controls() const { return static_cast<int>(values_.cols()); }
    double dt() const { return (t_end_ - t_start_) / n_steps(); }
    /// Grid point i in [0, n_steps].
    double time(int i) const;

    const Eigen::MatrixXd& values() const { return values_; }
    double value(int i, int k) const { return values_(i, k); }
    /// Controls on interval i.
    std::vector<double> row(int i) const;

    ControlSchedule with_values(Eigen::MatrixXd values) const;

    bool operator==(const ControlSchedule& other) const = default;

private:
    double t_start_;
    double t_end_;
    Eigen::MatrixXd values_;
    double u_max_;
};

struct PropagateOptions {
    int substeps = 10;
    // Largest trace / Hermiticity / purity drift tolerated per snapshot.
    double drift_tol = 1e-6;
};

struct Trajectory {
    std::vector<double> times;            // n_steps + 1
    std::vector<DensityMatrix> states;    // n_steps + 1, states[0] is the input
    std::vector<DensityMatrix> midpoints; // n_steps, state at (t_i + t_{i+1}) / 2
    std::vector<double> concurrences;     // n_steps + 1
    ControlSchedule schedule;

    const DensityMatrix& final_state() const { return states.back(); }
    double terminal_concurrence() const { return concurrences.back(); }
};

/// One classical RK4 step of x' = -i[H, x]. A negative dt integrates backward.
void rk4_step(Mat4& x, const Mat4& h_total, double dt);

/// `substeps` RK4 steps covering `duration`.
Mat4 integrate_constant(Mat4 x, const Mat4& h_total, double duration, int substeps);

/// Integrates rho' = -i[H(t), rho] across the schedule with RK4. After each
/// control interval rho is re-Hermitized and trace-normalized; a snapshot that
/// drifts beyond `drift_tol` before that cleanup raises StepTooLarge.
Trajectory propagate(const DensityMatrix& rho0, const HamiltonianSet& h, const ControlSchedule& sched,
                     const PropagateOptions& opts = {});

/// Index of a computational basis label "00", "01", "10", "11".
int basis_index(std::string_view label);

/// (1 - epsilon) |b><b| + epsilon |Bell><Bell|.
DensityMatrix make_initial_state(std::string_view sep_basis, BellKind bell, double epsilon);

inline constexpr double kDefaultEpsilon = 1e-3;

/// "case1": near |10> with a psi+ admixture; "case2": near |01>.
DensityMatrix initial_state_preset(std::string_view preset, double epsilon = kDefaultEpsilon);

}  // namespace entangle
