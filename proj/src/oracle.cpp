#include "entangle/oracle.hpp"

#include <cmath>
#include <string>

namespace entangle::oracle {

Mat4 unitary(const Mat4& h_total, double t) {
    const Mat4 herm = 0.5 * (h_total + h_total.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat4> solver(herm);
    const Eigen::Vector4d e = solver.eigenvalues();
    Eigen::Vector4cd phases;
    for (int j = 0; j < 4; ++j) phases(j) = std::polar(1.0, -e(j) * t);
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

DensityMatrix exact_propagate_constant(const DensityMatrix& rho0, const Mat4& h_total, double dt) {
    const Mat4 u = unitary(h_total, dt);
    return DensityMatrix::unchecked(u * rho0.mat() * u.adjoint());
}

DensityMatrix exact_propagate(const DensityMatrix& rho0, const HamiltonianSet& h, const ControlSchedule& sched) {
    DensityMatrix rho = rho0;
    for (int i = 0; i < sched.n_steps(); ++i) {
        rho = exact_propagate_constant(rho, assemble(h, sched.row(i)), sched.dt());
    }
    return rho;
}

PatternResult exhaustive_bang_bang(const DensityMatrix& rho0, const HamiltonianSet& h, double t_end, int n_steps,
                                   double u_max, double t_start) {
    const int m = static_cast<int>(h.size());
    const int bits = n_steps * m;
    if (n_steps < 1 || m < 1) throw InvalidParameter("exhaustive search needs n_steps >= 1 and m >= 1");
    if (bits > kMaxSearchBits) {
        throw SearchTooLarge("exhaustive search over 2^" + std::to_string(bits) + " patterns exceeds the cap 2^" +
                             std::to_string(kMaxSearchBits));
    }
    const double dt = (t_end - t_start) / n_steps;

    // One propagator per sign combination of a single interval, indexed by the
    // m-bit code with the most significant bit for u_1 (bit set = +u_max).
    std::vector<Mat4> step(std::size_t{1} << m);
    for (std::size_t code = 0; code < step.size(); ++code) {
        std::vector<double> u(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) u[static_cast<std::size_t>(k)] = ((code >> (m - 1 - k)) & 1U) ? u_max : -u_max;
        step[code] = unitary(assemble(h, u), dt);
    }

    // Enumerating codes upward walks the patterns in lexicographic order.
    PatternResult best;
    best.terminal_concurrence = -1.0;
    const unsigned long total = 1UL << bits;
    const unsigned long mask = (1UL << m) - 1;
    unsigned long best_code = 0;
    for (unsigned long code = 0; code < total; ++code) {
        Mat4 rho = rho0.mat();
        for (int i = 0; i < n_steps; ++i) {
            const Mat4& u = step[(code >> (m * (n_steps - 1 - i))) & mask];
            rho = u * rho * u.adjoint();
        }
        const double c = concurrence(DensityMatrix::unchecked(rho));
        if (c > best.terminal_concurrence) {
            best.terminal_concurrence = c;
            best_code = code;
        }
    }
    best.evaluated = static_cast<long>(total);
    best.pattern.resize(n_steps, m);
    for (int i = 0; i < n_steps; ++i) {
        for (int k = 0; k < m; ++k) {
            const int bit = m * (n_steps - 1 - i) + (m - 1 - k);
            best.pattern(i, k) = ((best_code >> bit) & 1UL) ? 1 : -1;
        }
    }
    return best;
}

double terminal_cost(const Mat2& x) {
    const Mat2 herm = 0.5 * (x + x.adjoint());
    const double purity = (herm * herm).trace().real();
    return -std::sqrt(2.0 * (1.0 - purity));
}

double directional_derivative(const Mat2& x, const Mat2& direction, double h) {
    return (terminal_cost(x + h * direction) - terminal_cost(x - h * direction)) / (2.0 * h);
}

ReducedState finite_diff_cost_gradient(const ReducedState& rho_a, double h) {
    const Mat2& x = rho_a.mat();
    if (1.0 - rho_a.purity() <= 10.0 * h) {
        throw DegenerateState("cost gradient is singular: reduced state is (nearly) pure");
    }
    Mat2 e11 = Mat2::Zero();
    e11(0, 0) = 1.0;
    Mat2 e22 = Mat2::Zero();
    e22(1, 1) = 1.0;
    Mat2 sym = Mat2::Zero();
    sym(0, 1) = 1.0;
    sym(1, 0) = 1.0;
    Mat2 asym = Mat2::Zero();
    asym(0, 1) = Complex(0.0, 1.0);
    asym(1, 0) = Complex(0.0, -1.0);

    const double g11 = directional_derivative(x, e11, h);
    const double g22 = directional_derivative(x, e22, h);
    // Tr(G (E12 + E21)) = 2 Re G12 and Tr(G i(E12 - E21)) = 2 Im G12 for Hermitian G.
    const double re12 = 0.5 * directional_derivative(x, sym, h);
    const double im12 = 0.5 * directional_derivative(x, asym, h);

    Mat2 g;
    g << g11, Complex(re12, im12), Complex(re12, -im12), g22;
    return ReducedState(g);
}

}  // namespace entangle::oracle
