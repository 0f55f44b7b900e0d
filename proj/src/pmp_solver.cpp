#include "entangle/pmp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace entangle {

namespace {

constexpr Complex kI{0.0, 1.0};

using Mat4r = Eigen::Matrix4cd;  // superoperator on vectorized 2x2 operators

// Column-major vectorization of a 2x2 operator.
Eigen::Vector4cd vec(const Mat2& m) { return Eigen::Map<const Eigen::Vector4cd>(m.data()); }

Mat2 unvec(const Eigen::Vector4cd& v) { return Eigen::Map<const Mat2>(v.data()); }

// Matrix of X -> -i Tr_B([H, X (x) rho_B]) acting on vec(X).
Mat4r separable_generator(const Mat4& h_total, const Mat2& rho_b) {
    Mat4r l;
    for (int b = 0; b < 2; ++b) {
        for (int a = 0; a < 2; ++a) {
            Mat2 e = Mat2::Zero();
            e(a, b) = 1.0;
            const Mat4 lifted = kron(e, rho_b);
            const Mat2 image = -kI * partial_trace_B(Mat4(commutator(h_total, lifted)));
            l.col(a + 2 * b) = vec(image);
        }
    }
    return l;
}

struct AugmentedState {
    Mat4 rho;
    Mat2 lambda;
};

// rho' = -i[H, rho],  lambda' = -L_rho^dag(lambda)
AugmentedState separable_rhs(const Mat4& h_total, const AugmentedState& s) {
    const Mat4r l = separable_generator(h_total, partial_trace_A(s.rho));
    AugmentedState d;
    d.rho = -kI * commutator(h_total, s.rho);
    d.lambda = unvec(-(l.adjoint() * vec(s.lambda)));
    return d;
}

void rk4_separable_step(AugmentedState& s, const Mat4& h_total, double dt) {
    auto axpy = [](const AugmentedState& x, double a, const AugmentedState& y) {
        return AugmentedState{x.rho + a * y.rho, x.lambda + a * y.lambda};
    };
    const AugmentedState k1 = separable_rhs(h_total, s);
    const AugmentedState k2 = separable_rhs(h_total, axpy(s, 0.5 * dt, k1));
    const AugmentedState k3 = separable_rhs(h_total, axpy(s, 0.5 * dt, k2));
    const AugmentedState k4 = separable_rhs(h_total, axpy(s, dt, k3));
    s.rho += (dt / 6.0) * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
    s.lambda += (dt / 6.0) * (k1.lambda + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda);
}

template <typename M>
M hermitize(const M& m) {
    return 0.5 * (m + m.adjoint());
}

}  // namespace

AdjointMode parse_adjoint_mode(std::string_view name) {
    if (name == "lifted") return AdjointMode::Lifted;
    if (name == "reduced" || name == "reduced_separable") return AdjointMode::ReducedSeparable;
    throw InvalidParameter("unknown adjoint mode '" + std::string(name) + "' (expected lifted, reduced)");
}

std::string_view to_string(AdjointMode mode) {
    return mode == AdjointMode::Lifted ? "lifted" : "reduced";
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
        case StopReason::PmpFixedPoint: return "pmp_fixed_point";
        case StopReason::CostStationary: return "cost_stationary";
        case StopReason::Stalled: return "stalled";
        case StopReason::MaxIterations: return "max_iterations";
    }
    return "?";
}

// ---- Pontryagin Hamiltonian ------------------------------------------------

Complex pontryagin_hamiltonian_raw(const ReducedState& lambda, const DensityMatrix& rho, const HamiltonianSet& h,
                                   std::span<const double> u) {
    const Mat4 h_total = assemble(h, u);
    const Mat2 partial = partial_trace_B(Mat4(commutator(h_total, rho.mat())));
    return -kI * (lambda.mat().adjoint() * partial).trace();
}

Complex pontryagin_hamiltonian_raw(const LiftedCostate& lambda, const DensityMatrix& rho, const HamiltonianSet& h,
                                   std::span<const double> u) {
    const Mat4 h_total = assemble(h, u);
    return -kI * (lambda.mat.adjoint() * commutator(h_total, rho.mat())).trace();
}

Complex pontryagin_hamiltonian_raw(const Costate& costate, const DensityMatrix& rho, const HamiltonianSet& h,
                                   std::span<const double> u) {
    return std::visit([&](const auto& c) { return pontryagin_hamiltonian_raw(c, rho, h, u); }, costate);
}

double pontryagin_hamiltonian(const Costate& costate, const DensityMatrix& rho, const HamiltonianSet& h,
                              std::span<const double> u) {
    const Complex value = pontryagin_hamiltonian_raw(costate, rho, h, u);
    if (std::abs(value.imag()) >= kRealTol) {
        std::ostringstream msg;
        msg << "Pontryagin Hamiltonian has imaginary residue " << value.imag();
        throw NonRealValue(msg.str());
    }
    return value.real();
}

// ---- switching functions ---------------------------------------------------

Complex switching_function_raw(const Costate& costate, const DensityMatrix& rho, const Mat4& h_k) {
    const Mat4 comm = commutator(h_k, rho.mat());
    Complex value;
    if (const auto* reduced = std::get_if<ReducedState>(&costate)) {
        value = kI * (reduced->mat().adjoint() * partial_trace_B(comm)).trace();
    } else {
        value = kI * (std::get<LiftedCostate>(costate).mat.adjoint() * comm).trace();
    }
#ifdef ENTANGLE_MUTATION_FLIP_SWITCH_SIGN
    value = -value;
#endif
    return value;
}

double switching_function(const Costate& costate, const DensityMatrix& rho, const Mat4& h_k) {
    const Complex value = switching_function_raw(costate, rho, h_k);
    if (std::abs(value.imag()) >= kRealTol) {
        std::ostringstream msg;
        msg << "switching function has imaginary residue " << value.imag();
        throw NonRealValue(msg.str());
    }
    return value.real();
}

Eigen::MatrixXd bang_bang_update(const Eigen::MatrixXd& phi, double u_max) {
    return phi.unaryExpr([u_max](double p) { return p > 0.0 ? u_max : -u_max; });
}

// ---- costate pass ----------------------------------------------------------

CostateTrajectory backward_adjoint(const Trajectory& traj, const HamiltonianSet& h, AdjointMode mode, double reg,
                                   int substeps) {
    if (substeps < 1) throw InvalidParameter("substeps must be >= 1");
    const ControlSchedule& sched = traj.schedule;
    const int n = sched.n_steps();
    const double dt = sched.dt();
    const double h_sub = -dt / substeps;
    const bool even = substeps % 2 == 0;

    const TerminalCostate terminal = terminal_costate(partial_trace_B(traj.final_state()), reg);

    CostateTrajectory out;
    out.mode = mode;
    out.degenerate = terminal.degenerate;
    out.nodes.resize(static_cast<std::size_t>(n) + 1, terminal.value);
    out.midpoints.resize(static_cast<std::size_t>(n), terminal.value);

    if (mode == AdjointMode::Lifted) {
        Mat4 big = kron(terminal.value.mat(), Mat2(Mat2::Identity()));
        out.nodes[static_cast<std::size_t>(n)] = LiftedCostate{big};
        for (int i = n - 1; i >= 0; --i) {
            const Mat4 h_total = assemble(h, sched.row(i));
            const Mat4 end = big;
            Mat4 mid;
            for (int s = 0; s < substeps; ++s) {
                rk4_step(big, h_total, h_sub);
                if (even && s + 1 == substeps / 2) mid = big;
            }
            if (!even) mid = integrate_constant(end, h_total, -0.5 * dt, substeps);
            big = hermitize(big);
            out.midpoints[static_cast<std::size_t>(i)] = LiftedCostate{hermitize(mid)};
            out.nodes[static_cast<std::size_t>(i)] = LiftedCostate{big};
        }
        return out;
    }

    Mat2 lambda = terminal.value.mat();
    for (int i = n - 1; i >= 0; --i) {
        const Mat4 h_total = assemble(h, sched.row(i));
        AugmentedState s{traj.states[static_cast<std::size_t>(i) + 1].mat(), lambda};
        const AugmentedState end = s;
        Mat2 mid;
        for (int step = 0; step < substeps; ++step) {
            rk4_separable_step(s, h_total, h_sub);
            if (even && step + 1 == substeps / 2) mid = s.lambda;
        }
        if (!even) {
            AugmentedState half = end;
            for (int step = 0; step < substeps; ++step) rk4_separable_step(half, h_total, 0.5 * h_sub);
            mid = half.lambda;
        }
        lambda = hermitize(s.lambda);
        out.midpoints[static_cast<std::size_t>(i)] = ReducedState(hermitize(mid));
        out.nodes[static_cast<std::size_t>(i)] = ReducedState(lambda);
    }
    return out;
}

SwitchRecord switching_record(const Trajectory& traj, const CostateTrajectory& costate, const HamiltonianSet& h,
                              double flip_threshold) {
    const ControlSchedule& sched = traj.schedule;
    const int n = sched.n_steps();
    const int m = static_cast<int>(h.size());
    SwitchRecord rec;
    rec.phi.resize(n, m);
    rec.times.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rec.times.push_back(0.5 * (sched.time(i) + sched.time(i + 1)));
        for (int k = 0; k < m; ++k) {
            const Complex raw = switching_function_raw(costate.midpoints[static_cast<std::size_t>(i)],
                                                       traj.midpoints[static_cast<std::size_t>(i)],
                                                       h.control(static_cast<std::size_t>(k)));
            rec.max_imag = std::max(rec.max_imag, std::abs(raw.imag()));
            rec.phi(i, k) = raw.real();
            if (std::abs(raw.real()) <= flip_threshold) ++rec.singular;
        }
    }
    if (rec.max_imag >= kRealTol) {
        std::ostringstream msg;
        msg << "switching function has imaginary residue " << rec.max_imag;
        throw NonRealValue(msg.str());
    }
    rec.controls = bang_bang_update(rec.phi, sched.u_max());
    return rec;
}

// ---- forward-backward sweep -----------------------------------------------

void SolveParams::validate() const {
    auto fail = [](const std::string& what) { throw InvalidParameter(what); };
    if (!(t_end > t_start)) fail("T must exceed the start time");
    if (n_steps < 1) fail("n_steps must be >= 1");
    if (!(u_max > 0.0) || !std::isfinite(u_max)) fail("u_max must be positive and finite");
    if (!(reg > 0.0)) fail("reg must be positive");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (!(cost_tol >= 0.0)) fail("cost_tol must be non-negative");
    if (!(flip_threshold >= 0.0)) fail("flip_threshold must be non-negative");
    if (max_flips_per_iter < 0) fail("max_flips_per_iter must be >= 0");
    if (substeps < 1) fail("substeps must be >= 1");
}

Eigen::MatrixXd initial_controls(const SolveParams& params, int n_controls) {
    Eigen::MatrixXd values = Eigen::MatrixXd::Constant(params.n_steps, n_controls, params.u_max);
    if (params.init == InitialGuess::Random) {
        std::mt19937_64 gen(params.seed);
        for (int i = 0; i < params.n_steps; ++i) {
            for (int k = 0; k < n_controls; ++k) values(i, k) = (gen() >> 63) ? params.u_max : -params.u_max;
        }
    }
    return values;
}

namespace {

struct FlipCandidate {
    int interval;
    int control;
    double magnitude;
};

std::vector<FlipCandidate> flip_candidates(const SwitchRecord& sw, const Eigen::MatrixXd& values, const SolveParams& p) {
    std::vector<FlipCandidate> out;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index k = 0; k < values.cols(); ++k) {
            const double mag = std::abs(sw.phi(i, k));
            if (sw.controls(i, k) != values(i, k) && mag > p.flip_threshold) {
                out.push_back({static_cast<int>(i), static_cast<int>(k), mag});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FlipCandidate& a, const FlipCandidate& b) { return a.magnitude > b.magnitude; });
    if (p.max_flips_per_iter > 0 && out.size() > static_cast<std::size_t>(p.max_flips_per_iter)) {
        out.resize(static_cast<std::size_t>(p.max_flips_per_iter));
    }
    return out;
}

Eigen::MatrixXd apply_flips(Eigen::MatrixXd values, const SwitchRecord& sw, std::span<const FlipCandidate> flips) {
    for (const auto& f : flips) values(f.interval, f.control) = sw.controls(f.interval, f.control);
    return values;
}

}  // namespace

SolveReport forward_backward_solve(const DensityMatrix& rho0, const HamiltonianSet& h, const SolveParams& params) {
    params.validate();
    const int m = static_cast<int>(h.size());
    if (m < 1) throw InvalidParameter("Hamiltonian set has no control operators");
    const PropagateOptions popts{params.substeps};

    auto make_schedule = [&](const Eigen::MatrixXd& v) {
        return ControlSchedule(params.t_start, params.t_end, v, params.u_max);
    };
    auto cost_of = [&](const Eigen::MatrixXd& v) {
        return -propagate(rho0, h, make_schedule(v), popts).terminal_concurrence();
    };

    Eigen::MatrixXd values = initial_controls(params, m);
    std::vector<IterationRecord> history;
    SolveDiagnostics diag;
    double prev_cost = 0.0;
    bool updated = false;

    for (int it = 1;; ++it) {
        const ControlSchedule sched = make_schedule(values);
        Trajectory traj = propagate(rho0, h, sched, popts);
        CostateTrajectory costate = backward_adjoint(traj, h, params.mode, params.reg, params.substeps);
        SwitchRecord sw = switching_record(traj, costate, h, params.flip_threshold);
        const double cost = -traj.terminal_concurrence();

        diag.degenerate_terminal_gradient = costate.degenerate;
        diag.max_imag_switching = std::max(diag.max_imag_switching, sw.max_imag);
        for (int i = 0; i <= sched.n_steps(); ++i) {
            const auto row = sched.row(std::min(i, sched.n_steps() - 1));
            const Complex node = pontryagin_hamiltonian_raw(costate.nodes[static_cast<std::size_t>(i)],
                                                            traj.states[static_cast<std::size_t>(i)], h, row);
            diag.max_imag_hamiltonian = std::max(diag.max_imag_hamiltonian, std::abs(node.imag()));
            if (i < sched.n_steps()) {
                const Complex mid = pontryagin_hamiltonian_raw(costate.midpoints[static_cast<std::size_t>(i)],
                                                               traj.midpoints[static_cast<std::size_t>(i)], h, row);
                diag.max_imag_hamiltonian = std::max(diag.max_imag_hamiltonian, std::abs(mid.imag()));
            }
        }
        if (diag.max_imag_hamiltonian >= kRealTol) {
            std::ostringstream msg;
            msg << "Pontryagin Hamiltonian has imaginary residue " << diag.max_imag_hamiltonian;
            throw NonRealValue(msg.str());
        }
        history.push_back({it, cost, 0});

        auto finish = [&](StopReason r) {
            diag.singular_entries = sw.singular;
            diag.pmp_violations = static_cast<int>((sw.controls.array() != values.array()).count());
            SolveReport report{sched,
                               std::move(traj),
                               std::move(costate),
                               std::move(sw),
                               0.0,
                               it,
                               r == StopReason::PmpFixedPoint || r == StopReason::CostStationary,
                               r,
                               std::move(history),
                               params.mode,
                               diag};
            report.terminal_concurrence = report.trajectory.terminal_concurrence();
            return report;
        };

        if (updated && std::abs(cost - prev_cost) < params.cost_tol) return finish(StopReason::CostStationary);

        const std::vector<FlipCandidate> candidates = flip_candidates(sw, values, params);
        if (candidates.empty()) return finish(StopReason::PmpFixedPoint);
        if (it >= params.max_iters) return finish(StopReason::MaxIterations);

        int accepted = 0;
        if (!params.relaxation) {
            values = apply_flips(values, sw, candidates);
            accepted = static_cast<int>(candidates.size());
        } else {
            // Largest |phi| first: halve the batch until the cost drops, then
            // fall back to the remaining candidates one at a time.
            const std::span<const FlipCandidate> all(candidates);
            for (std::size_t count = all.size(); count >= 1 && accepted == 0; count /= 2) {
                Eigen::MatrixXd trial = apply_flips(values, sw, all.first(count));
                if (cost_of(trial) < cost) {
                    values = std::move(trial);
                    accepted = static_cast<int>(count);
                }
            }
            for (std::size_t j = 1; j < all.size() && accepted == 0; ++j) {
                Eigen::MatrixXd trial = apply_flips(values, sw, all.subspan(j, 1));
                if (cost_of(trial) < cost) {
                    values = std::move(trial);
                    accepted = 1;
                }
            }
            if (accepted == 0) return finish(StopReason::Stalled);
        }
        history.back().flips = accepted;
        prev_cost = cost;
        updated = true;
    }
}

}  // namespace entangle
