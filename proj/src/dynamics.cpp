#include "entangle/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace entangle {

namespace {

constexpr Complex kMinusI{0.0, -1.0};
constexpr double kHamiltonianTol = 1e-12;

// -i [H, x]
Mat4 lvn_rhs(const Mat4& h, const Mat4& x) {
    Mat4 c = h * x;
    c.noalias() -= x * h;
    return kMinusI * c;
}

void check_snapshot(const Mat4& rho, double purity0, double tol, double t) {
    const double trace_err = std::abs(rho.trace() - 1.0);
    const double herm_err = (rho - rho.adjoint()).norm();
    const double purity_err = std::abs((rho * rho).trace().real() - purity0);
    if (!rho.allFinite() || trace_err > tol || herm_err > tol || purity_err > tol) {
        std::ostringstream msg;
        msg << "propagation drifted at t=" << t << " (trace err " << trace_err << ", hermiticity err "
            << herm_err << ", purity err " << purity_err << "); refine the grid or raise substeps";
        throw StepTooLarge(msg.str());
    }
}

Mat4 cleanup(const Mat4& rho) {
    Mat4 out = 0.5 * (rho + rho.adjoint());
    out /= out.trace().real();
    return out;
}

}  // namespace

// ---- HamiltonianSet --------------------------------------------------------

HamiltonianSet::HamiltonianSet(const Mat4& drift, std::vector<Mat4> controls)
    : drift_(drift), controls_(std::move(controls)) {
    if (!drift_.allFinite() || !is_hermitian(drift_, kHamiltonianTol)) {
        throw InvalidParameter("drift Hamiltonian must be finite and Hermitian");
    }
    for (std::size_t k = 0; k < controls_.size(); ++k) {
        if (!controls_[k].allFinite() || !is_hermitian(controls_[k], kHamiltonianTol)) {
            throw InvalidParameter("control Hamiltonian " + std::to_string(k + 1) + " must be finite and Hermitian");
        }
    }
}

HamiltonianSet HamiltonianSet::two_qubit_exchange() {
    const Mat2 sx = pauli_x();
    const Mat2 sy = pauli_y();
    const Mat2 sz = pauli_z();
    const Mat4 drift = kron(sx, sz) + kron(sz, sx);
    std::vector<Mat4> controls{
        kron(sx, sy) - kron(sy, sx),
        kron(sy, sz) - kron(sz, sy),
        kron(sz, sx) - kron(sx, sz),
    };
    return HamiltonianSet(drift, std::move(controls));
}

HamiltonianSet HamiltonianSet::negated() const {
    std::vector<Mat4> neg;
    neg.reserve(controls_.size());
    for (const auto& c : controls_) neg.push_back(-c);
    return HamiltonianSet(-drift_, std::move(neg));
}

Mat4 assemble(const HamiltonianSet& h, std::span<const double> u) {
    if (u.size() != h.size()) {
        throw DimensionMismatch("assemble: expected " + std::to_string(h.size()) + " control values, got " +
                                std::to_string(u.size()));
    }
    Mat4 total = h.drift();
    for (std::size_t k = 0; k < u.size(); ++k) total += u[k] * h.control(k);
    return total;
}

// ---- ControlSchedule -------------------------------------------------------

ControlSchedule::ControlSchedule(double t_start, double t_end, Eigen::MatrixXd values, double u_max)
    : t_start_(t_start), t_end_(t_end), values_(std::move(values)), u_max_(u_max) {
    if (!(t_end_ > t_start_)) throw InvalidSchedule("schedule needs t_end > t_start");
    if (values_.rows() < 1) throw InvalidSchedule("schedule needs at least one interval");
    if (!(u_max_ > 0.0) || !std::isfinite(u_max_)) throw InvalidSchedule("u_max must be positive and finite");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index k = 0; k < values_.cols(); ++k) {
            const double v = values_(i, k);
            if (!std::isfinite(v) || std::abs(v) > u_max_) {
                std::ostringstream msg;
                msg << "control u" << (k + 1) << " on interval " << i << " is " << v << ", outside [-" << u_max_
                    << ", " << u_max_ << "]";
                throw InvalidSchedule(msg.str());
            }
        }
    }
}

ControlSchedule ControlSchedule::constant(double t_start, double t_end, int n_steps, std::span<const double> u,
                                          double u_max) {
    if (n_steps < 1) throw InvalidSchedule("schedule needs at least one interval");
    Eigen::MatrixXd values(n_steps, static_cast<Eigen::Index>(u.size()));
    for (int i = 0; i < n_steps; ++i) {
        for (std::size_t k = 0; k < u.size(); ++k) values(i, static_cast<Eigen::Index>(k)) = u[k];
    }
    return ControlSchedule(t_start, t_end, std::move(values), u_max);
}

double ControlSchedule::time(int i) const {
    if (i == n_steps()) return t_end_;
    return t_start_ + i * dt();
}

std::vector<double> ControlSchedule::row(int i) const {
    std::vector<double> out(static_cast<std::size_t>(n_controls()));
    for (int k = 0; k < n_controls(); ++k) out[static_cast<std::size_t>(k)] = values_(i, k);
    return out;
}

ControlSchedule ControlSchedule::with_values(Eigen::MatrixXd values) const {
    return ControlSchedule(t_start_, t_end_, std::move(values), u_max_);
}

// ---- integration -----------------------------------------------------------

void rk4_step(Mat4& x, const Mat4& h_total, double dt) {
    const Mat4 k1 = lvn_rhs(h_total, x);
    const Mat4 k2 = lvn_rhs(h_total, x + (0.5 * dt) * k1);
    const Mat4 k3 = lvn_rhs(h_total, x + (0.5 * dt) * k2);
    const Mat4 k4 = lvn_rhs(h_total, x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Mat4 integrate_constant(Mat4 x, const Mat4& h_total, double duration, int substeps) {
    const double h = duration / substeps;
    for (int s = 0; s < substeps; ++s) rk4_step(x, h_total, h);
    return x;
}

Trajectory propagate(const DensityMatrix& rho0, const HamiltonianSet& h, const ControlSchedule& sched,
                     const PropagateOptions& opts) {
    if (opts.substeps < 1) throw InvalidParameter("substeps must be >= 1");
    if (static_cast<std::size_t>(sched.n_controls()) != h.size()) {
        throw DimensionMismatch("schedule has " + std::to_string(sched.n_controls()) + " controls, Hamiltonian set has " +
                                std::to_string(h.size()));
    }
    const int n = sched.n_steps();
    const double dt = sched.dt();
    const double h_sub = dt / opts.substeps;
    const double purity0 = rho0.purity();
    const bool even = opts.substeps % 2 == 0;

    Trajectory traj{{}, {}, {}, {}, sched};
    traj.times.reserve(static_cast<std::size_t>(n) + 1);
    traj.states.reserve(static_cast<std::size_t>(n) + 1);
    traj.midpoints.reserve(static_cast<std::size_t>(n));
    traj.concurrences.reserve(static_cast<std::size_t>(n) + 1);

    traj.times.push_back(sched.time(0));
    traj.states.push_back(rho0);
    traj.concurrences.push_back(concurrence(rho0));

    Mat4 rho = rho0.mat();
    for (int i = 0; i < n; ++i) {
        const Mat4 h_total = assemble(h, sched.row(i));
        const Mat4 start = rho;
        Mat4 mid;
        for (int s = 0; s < opts.substeps; ++s) {
            rk4_step(rho, h_total, h_sub);
            if (even && s + 1 == opts.substeps / 2) mid = rho;
        }
        if (!even) mid = integrate_constant(start, h_total, 0.5 * dt, opts.substeps);

        const double t_mid = 0.5 * (sched.time(i) + sched.time(i + 1));
        check_snapshot(mid, purity0, opts.drift_tol, t_mid);
        check_snapshot(rho, purity0, opts.drift_tol, sched.time(i + 1));
        rho = cleanup(rho);

        traj.midpoints.push_back(DensityMatrix::unchecked(cleanup(mid)));
        traj.times.push_back(sched.time(i + 1));
        traj.states.push_back(DensityMatrix::unchecked(rho));
        traj.concurrences.push_back(concurrence(traj.states.back()));
    }
    return traj;
}

// ---- initial states --------------------------------------------------------

int basis_index(std::string_view label) {
    if (label == "00") return 0;
    if (label == "01") return 1;
    if (label == "10") return 2;
    if (label == "11") return 3;
    throw InvalidParameter("unknown separable basis state '" + std::string(label) + "' (expected 00, 01, 10, 11)");
}

DensityMatrix make_initial_state(std::string_view sep_basis, BellKind bell, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidParameter("epsilon must lie in [0, 1]");
    Mat4 sep = Mat4::Zero();
    const int b = basis_index(sep_basis);
    sep(b, b) = 1.0;
    return DensityMatrix((1.0 - epsilon) * sep + epsilon * bell_state(bell).mat());
}

DensityMatrix initial_state_preset(std::string_view preset, double epsilon) {
    if (preset == "case1") return make_initial_state("10", BellKind::PsiPlus, epsilon);
    if (preset == "case2") return make_initial_state("01", BellKind::PsiPlus, epsilon);
    throw InvalidParameter("unknown initial-state preset '" + std::string(preset) + "' (expected case1, case2)");
}

}  // namespace entangle
