#pragma once

// Pontryagin Minimum Principle machinery for maximizing terminal concurrence:
// the Pontryagin Hamiltonian, switching functions, the bang-bang law, the
// backward costate pass and a forward-backward sweep over bang-bang schedules.
//
// Sign convention: the cost is J = -E_c(rho_A(T)) and the Pontryagin
// Hamiltonian is minimized. The control enters H linearly as -sum_k u_k phi_k,
// so u_k = u_max * sgn(phi_k) with sgn(0) = -1.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "entangle/dynamics.hpp"
#include "entangle/quantum_core.hpp"

namespace entangle {

enum class AdjointMode {
    // Exact costate on the full state: Lambda' = -i[H, Lambda], Lambda(T) = lambda_T (x) I.
    Lifted,
    // Costate on rho_A alone with the correlations dropped (rho ~ rho_A (x) rho_B).
    ReducedSeparable,
};

AdjointMode parse_adjoint_mode(std::string_view name);
std::string_view to_string(AdjointMode mode);

/// 4x4 Hermitian costate of the lifted formulation.
struct LiftedCostate {
    Mat4 mat;
};

using Costate = std::variant<ReducedState, LiftedCostate>;

inline constexpr double kRealTol = 1e-9;

// ---- Pontryagin Hamiltonian and switching functions -----------------------

/// -i Tr(lambda^dag Tr_B([H(u), rho])) before discarding the imaginary part.
Complex pontryagin_hamiltonian_raw(const ReducedState& lambda, const DensityMatrix& rho, const HamiltonianSet& h,
                                   std::span<const double> u);
/// -i Tr(Lambda^dag [H(u), rho]).
Complex pontryagin_hamiltonian_raw(const LiftedCostate& lambda, const DensityMatrix& rho, const HamiltonianSet& h,
                                   std::span<const double> u);
Complex pontryagin_hamiltonian_raw(const Costate& costate, const DensityMatrix& rho, const HamiltonianSet& h,
                                   std::span<const double> u);

/// Real value of the Pontryagin Hamiltonian. Throws NonRealValue if the
/// imaginary residue exceeds kRealTol.
double pontryagin_hamiltonian(const Costate& costate, const DensityMatrix& rho, const HamiltonianSet& h,
                              std::span<const double> u);

/// i Tr(lambda^dag Tr_B([H_k, rho])) (reduced) or i Tr(Lambda^dag [H_k, rho])
/// (lifted), before discarding the imaginary part.
Complex switching_function_raw(const Costate& costate, const DensityMatrix& rho, const Mat4& h_k);

/// Real switching function. Throws NonRealValue if |Im| >= kRealTol.
double switching_function(const Costate& costate, const DensityMatrix& rho, const Mat4& h_k);

/// controls(i, k) = +u_max if phi(i, k) > 0, else -u_max.
Eigen::MatrixXd bang_bang_update(const Eigen::MatrixXd& phi, double u_max);

// ---- costate pass ----------------------------------------------------------

struct CostateTrajectory {
    AdjointMode mode = AdjointMode::Lifted;
    std::vector<Costate> nodes;      // n_steps + 1, nodes.back() is the terminal costate
    std::vector<Costate> midpoints;  // n_steps
    bool degenerate = false;         // terminal gradient hit the regularization
};

/// Integrates the costate backward over the trajectory's grid with the same
/// RK4 substepping as the forward pass.
CostateTrajectory backward_adjoint(const Trajectory& traj, const HamiltonianSet& h, AdjointMode mode,
                                   double reg = kDefaultGradientReg, int substeps = 10);

struct SwitchRecord {
    std::vector<double> times;  // interval midpoints
    Eigen::MatrixXd phi;        // n_steps x m
    Eigen::MatrixXd controls;   // bang_bang_update(phi, u_max)
    double max_imag = 0.0;      // largest |Im| seen before taking real parts
    int singular = 0;           // entries with |phi| <= the flip threshold
};

/// Switching functions at each interval midpoint.
SwitchRecord switching_record(const Trajectory& traj, const CostateTrajectory& costate, const HamiltonianSet& h,
                              double flip_threshold = 1e-10);

// ---- forward-backward sweep -----------------------------------------------

enum class InitialGuess { AllMax, Random };

struct SolveParams {
    double t_start = 0.0;
    double t_end = 1.0;
    int n_steps = 200;
    double u_max = 1.0;
    AdjointMode mode = AdjointMode::Lifted;
    double reg = kDefaultGradientReg;
    int max_iters = 100;
    double cost_tol = 1e-8;
    // Ordered flips verified against the cost; off applies every proposed flip.
    bool relaxation = true;
    double flip_threshold = 1e-10;
    int max_flips_per_iter = 0;  // 0 = unlimited
    InitialGuess init = InitialGuess::AllMax;
    std::uint64_t seed = 0;
    int substeps = 10;

    /// Throws InvalidParameter describing the first bad field.
    void validate() const;
};

enum class StopReason {
    PmpFixedPoint,   // the bang-bang law reproduces the schedule
    CostStationary,  // last accepted update changed the cost by < cost_tol
    Stalled,         // flips proposed, none lowers the cost
    MaxIterations,
};

std::string_view to_string(StopReason reason);

struct IterationRecord {
    int iteration = 0;
    double cost = 0.0;  // -terminal concurrence of the schedule evaluated in this iteration
    int flips = 0;      // flips accepted at the end of this iteration
};

struct SolveDiagnostics {
    bool degenerate_terminal_gradient = false;
    double max_imag_hamiltonian = 0.0;
    double max_imag_switching = 0.0;
    int singular_entries = 0;  // final switching values with |phi| <= flip_threshold
    int pmp_violations = 0;    // final schedule entries disagreeing with the bang-bang law
};

struct SolveReport {
    ControlSchedule schedule;
    Trajectory trajectory;
    CostateTrajectory costate;
    SwitchRecord switching;
    double terminal_concurrence = 0.0;
    int iterations = 0;
    bool converged = false;
    StopReason stop_reason = StopReason::MaxIterations;
    std::vector<IterationRecord> history;
    AdjointMode mode = AdjointMode::Lifted;
    SolveDiagnostics diagnostics;
};

Eigen::MatrixXd initial_controls(const SolveParams& params, int n_controls);

SolveReport forward_backward_solve(const DensityMatrix& rho0, const HamiltonianSet& h, const SolveParams& params);

}  // namespace entangle
