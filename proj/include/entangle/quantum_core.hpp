#pragma once

// Dense complex algebra for two-qubit operators: Kronecker products,
// commutators, partial traces, Bell states and the purity-based concurrence.
//
// Basis convention: |ab> has index 2*a + b, subsystem A is the left factor.

#include <Eigen/Dense>

#include <complex>
#include <string_view>

#include "entangle/errors.hpp"

namespace entangle {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;

inline constexpr double kStateTol = 1e-10;

// ---- generic helpers -------------------------------------------------------

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
bool is_skew_hermitian(const Eigen::MatrixBase<Derived>& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m + m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
bool is_traceless(const Eigen::MatrixBase<Derived>& m, double tol) {
    return std::abs(m.trace()) <= tol;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

CMat kron(const CMat& a, const CMat& b);
Mat4 kron(const Mat2& a, const Mat2& b);

/// AB - BA. For Hermitian A and B the result is skew-Hermitian and traceless.
template <typename DA, typename DB>
typename DA::PlainObject commutator(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw DimensionMismatch("commutator: operands must be square with equal dimensions");
    }
    typename DA::PlainObject ab = a * b;
    ab.noalias() -= b * a;
    return ab;
}

Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();

// ---- states ----------------------------------------------------------------

/// Two-qubit density operator: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    /// Validates the matrix against the density-operator invariants at `tol`
    /// (eigenvalue floor is -tol). Throws InvalidState on violation.
    explicit DensityMatrix(const Mat4& m, double tol = kStateTol);

    /// Wraps a matrix produced by a trusted numerical routine that performs
    /// its own drift checks.
    static DensityMatrix unchecked(const Mat4& m) { return DensityMatrix(m, Unchecked{}); }

    static DensityMatrix from_pure(const Vec4& psi);

    const Mat4& mat() const { return mat_; }
    double purity() const;

private:
    struct Unchecked {};
    DensityMatrix(const Mat4& m, Unchecked) : mat_(m) {}
    Mat4 mat_;
};

/// A 2x2 Hermitian operator: the reduced state of one qubit, or the costate
/// attached to it (the latter is not unit-trace).
class ReducedState {
public:
    explicit ReducedState(const Mat2& m, double tol = kStateTol);

    const Mat2& mat() const { return mat_; }
    double purity() const;
    bool is_unit_trace(double tol = kStateTol) const;

private:
    Mat2 mat_;
};

/// Canonical form of Tr_B([H, rho]):
///   [ gamma11        gamma12 ]
///   [ -conj(gamma12) -gamma11 ]
/// with gamma11 purely imaginary.
struct PartialCommutator {
    Complex gamma11;
    Complex gamma12;

    /// Throws InvalidParameter if `m` is not skew-Hermitian and traceless at `tol`.
    static PartialCommutator from_matrix(const Mat2& m, double tol = kStateTol);
    Mat2 matrix() const;
};

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

BellKind parse_bell_kind(std::string_view name);
std::string_view to_string(BellKind kind);

Vec4 bell_vector(BellKind kind);
DensityMatrix bell_state(BellKind kind);

// ---- partial traces --------------------------------------------------------

/// (rho_A)_{ij} = sum_k rho_{2i+k, 2j+k}. Raw map, no invariants assumed.
Mat2 partial_trace_B(const Mat4& m);
/// (rho_B)_{ij} = sum_k rho_{2k+i, 2k+j}.
Mat2 partial_trace_A(const Mat4& m);

ReducedState partial_trace_B(const DensityMatrix& rho);
ReducedState partial_trace_A(const DensityMatrix& rho);

// ---- entanglement ----------------------------------------------------------

/// sqrt(2 (1 - Tr rho_A^2)) with the purity clamped to [1/2, 1].
double concurrence(const ReducedState& rho_a);
double concurrence(const DensityMatrix& rho);

/// True when the reduced state of a pure bipartite state has zero concurrence,
/// i.e. the state factorizes. Throws InvalidState for a mixed input.
bool is_separable(const DensityMatrix& pure_state, double tol = 1e-8);

struct TerminalCostate {
    ReducedState value;
    // 1 - Tr rho_A^2 fell to or below the regularization: the gradient of the
    // concurrence is singular there and `value` uses the regularized denominator.
    bool degenerate = false;
};

inline constexpr double kDefaultGradientReg = 1e-12;

/// Gradient of J = -E_c with respect to rho_A:
///   sqrt(2) rho_A / sqrt(max(1 - Tr rho_A^2, reg)).
TerminalCostate terminal_costate(const ReducedState& rho_a, double reg = kDefaultGradientReg);

}  // namespace entangle
