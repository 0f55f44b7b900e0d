#pragma once

// Random generators shared by the property-style tests.

#include <random>

#include "entangle/quantum_core.hpp"

namespace entangle::testing {

inline Complex random_complex(std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    return {normal(gen), normal(gen)};
}

template <typename M>
M random_matrix(std::mt19937_64& gen) {
    M m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = random_complex(gen);
    }
    return m;
}

template <typename M>
M random_hermitian(std::mt19937_64& gen) {
    const M a = random_matrix<M>(gen);
    return 0.5 * (a + a.adjoint());
}

inline Vec4 random_pure_vector(std::mt19937_64& gen) {
    Vec4 v;
    for (int j = 0; j < 4; ++j) v(j) = random_complex(gen);
    return v.normalized();
}

/// Mixed state from a random rank-4 Gram matrix.
inline DensityMatrix random_density(std::mt19937_64& gen) {
    const Mat4 a = random_matrix<Mat4>(gen);
    Mat4 rho = a * a.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

inline Mat2 random_unitary2(std::mt19937_64& gen) {
    Eigen::HouseholderQR<Mat2> qr(random_matrix<Mat2>(gen));
    return qr.householderQ();
}

inline Vec2 random_qubit(std::mt19937_64& gen) {
    Vec2 v(random_complex(gen), random_complex(gen));
    return v.normalized();
}

/// Reduced state of a random pure two-qubit state, kept away from purity.
inline ReducedState random_mixed_reduced(std::mt19937_64& gen, double min_gap = 1e-3) {
    for (;;) {
        const ReducedState r = partial_trace_B(DensityMatrix::from_pure(random_pure_vector(gen)));
        if (1.0 - r.purity() > min_gap) return r;
    }
}

}  // namespace entangle::testing
