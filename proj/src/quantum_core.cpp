#include "entangle/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace entangle {

namespace {

constexpr Complex kI{0.0, 1.0};

}  // namespace

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
    }
    return out;
}

Mat2 pauli_x() {
    Mat2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Mat2 pauli_y() {
    Mat2 m;
    m << 0.0, -kI, kI, 0.0;
    return m;
}

Mat2 pauli_z() {
    Mat2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

// ---- DensityMatrix ---------------------------------------------------------

DensityMatrix::DensityMatrix(const Mat4& m, double tol) : mat_(m) {
    if (!all_finite(m)) throw InvalidState("density matrix has non-finite entries");
    if (!is_hermitian(m, tol)) throw InvalidState("density matrix is not Hermitian");
    if (std::abs(m.trace() - 1.0) > tol) throw InvalidState("density matrix trace is not 1");
    const Mat4 herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat4> solver(herm, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol) {
        throw InvalidState("density matrix has a negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::from_pure(const Vec4& psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidState("state vector has zero or non-finite norm");
    const Vec4 v = psi / norm;
    return DensityMatrix(Mat4(v * v.adjoint()));
}

double DensityMatrix::purity() const { return (mat_ * mat_).trace().real(); }

// ---- ReducedState ----------------------------------------------------------

ReducedState::ReducedState(const Mat2& m, double tol) : mat_(m) {
    if (!all_finite(m)) throw InvalidState("reduced state has non-finite entries");
    if (!is_hermitian(m, tol)) throw InvalidState("reduced state is not Hermitian");
}

double ReducedState::purity() const { return (mat_ * mat_).trace().real(); }

bool ReducedState::is_unit_trace(double tol) const { return std::abs(mat_.trace() - 1.0) <= tol; }

// ---- PartialCommutator -----------------------------------------------------

PartialCommutator PartialCommutator::from_matrix(const Mat2& m, double tol) {
    if (!is_skew_hermitian(m, tol) || !is_traceless(m, tol)) {
        throw InvalidParameter("partial commutator must be skew-Hermitian and traceless");
    }
    return PartialCommutator{m(0, 0), m(0, 1)};
}

Mat2 PartialCommutator::matrix() const {
    Mat2 m;
    m << gamma11, gamma12, -std::conj(gamma12), -gamma11;
    return m;
}

// ---- Bell states -----------------------------------------------------------

BellKind parse_bell_kind(std::string_view name) {
    if (name == "phi+") return BellKind::PhiPlus;
    if (name == "phi-") return BellKind::PhiMinus;
    if (name == "psi+") return BellKind::PsiPlus;
    if (name == "psi-") return BellKind::PsiMinus;
    throw InvalidParameter("unknown Bell state '" + std::string(name) + "' (expected phi+, phi-, psi+, psi-)");
}

std::string_view to_string(BellKind kind) {
    switch (kind) {
        case BellKind::PhiPlus: return "phi+";
        case BellKind::PhiMinus: return "phi-";
        case BellKind::PsiPlus: return "psi+";
        case BellKind::PsiMinus: return "psi-";
    }
    return "?";
}

Vec4 bell_vector(BellKind kind) {
    const double s = 1.0 / std::sqrt(2.0);
    Vec4 v = Vec4::Zero();
    switch (kind) {
        case BellKind::PhiPlus: v(0) = s; v(3) = s; break;
        case BellKind::PhiMinus: v(0) = s; v(3) = -s; break;
        case BellKind::PsiPlus: v(1) = s; v(2) = s; break;
        case BellKind::PsiMinus: v(1) = s; v(2) = -s; break;
    }
    return v;
}

DensityMatrix bell_state(BellKind kind) { return DensityMatrix::from_pure(bell_vector(kind)); }

// ---- partial traces --------------------------------------------------------

Mat2 partial_trace_B(const Mat4& m) {
    Mat2 out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out(i, j) = m(2 * i, 2 * j) + m(2 * i + 1, 2 * j + 1);
        }
    }
    return out;
}

Mat2 partial_trace_A(const Mat4& m) {
    Mat2 out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out(i, j) = m(i, j) + m(2 + i, 2 + j);
        }
    }
    return out;
}

ReducedState partial_trace_B(const DensityMatrix& rho) { return ReducedState(partial_trace_B(rho.mat())); }

ReducedState partial_trace_A(const DensityMatrix& rho) { return ReducedState(partial_trace_A(rho.mat())); }

// ---- entanglement ----------------------------------------------------------

double concurrence(const ReducedState& rho_a) {
    // A qubit's purity lies in [1/2, 1]; anything outside is float noise.
    const double p = std::clamp(rho_a.purity(), 0.5, 1.0);
    return std::sqrt(std::max(0.0, 2.0 * (1.0 - p)));
}

double concurrence(const DensityMatrix& rho) { return concurrence(partial_trace_B(rho)); }

bool is_separable(const DensityMatrix& pure_state, double tol) {
    // For a pure state sqrt(2 (1 - Tr rho_A^2)) equals 2 |det Psi| with Psi the
    // 2x2 coefficient matrix. The determinant form avoids the cancellation in
    // 1 - purity, which would put product states at ~1e-8 instead of ~1e-16.
    if (std::abs(pure_state.purity() - 1.0) > 1e-8) throw InvalidState("is_separable expects a pure state");
    const Eigen::SelfAdjointEigenSolver<Mat4> eig(pure_state.mat());
    const Vec4 psi = eig.eigenvectors().col(3);
    return 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2)) <= tol;
}

TerminalCostate terminal_costate(const ReducedState& rho_a, double reg) {
    const double gap = 1.0 - rho_a.purity();
    const bool degenerate = gap <= reg;
    const double denom = std::sqrt(std::max(gap, reg));
    return TerminalCostate{ReducedState(Mat2(std::sqrt(2.0) * rho_a.mat() / denom)), degenerate};
}

}  // namespace entangle
