#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "entangle/oracle.hpp"
#include "entangle/pmp_solver.hpp"
#include "test_support.hpp"

using namespace entangle;
using entangle::testing::random_density;
using entangle::testing::random_hermitian;

namespace {

constexpr Complex kI{0.0, 1.0};

const Mat4& lifted(const Costate& c) { return std::get<LiftedCostate>(c).mat; }

Mat4 costate_matrix(const Costate& c) {
    if (const auto* l = std::get_if<LiftedCostate>(&c)) return l->mat;
    Mat4 m = Mat4::Zero();
    m.topLeftCorner<2, 2>() = std::get<ReducedState>(c).mat();
    return m;
}

SolveParams short_horizon_params() {
    // A horizon on which the sweep reaches a genuine PMP fixed point after a
    // few nontrivial updates.
    SolveParams p;
    p.t_end = 0.3;
    p.n_steps = 20;
    return p;
}

}  // namespace

TEST_CASE("Pontryagin Hamiltonian examples") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    std::mt19937_64 gen(21);
    const std::vector<double> u{1.0, -1.0, 1.0};

    SUBCASE("identity costate gives zero") {
        for (int s = 0; s < 20; ++s) {
            const DensityMatrix rho = random_density(gen);
            CHECK(std::abs(pontryagin_hamiltonian(ReducedState(Mat2::Identity()), rho, h, u)) < 1e-12);
        }
    }

    SUBCASE("stationary state gives zero") {
        const Mat4 total = assemble(h, u);
        const Eigen::SelfAdjointEigenSolver<Mat4> eig(total);
        const DensityMatrix rho = DensityMatrix::from_pure(eig.eigenvectors().col(1));
        const Costate lambda = ReducedState(random_hermitian<Mat2>(gen));
        CHECK(std::abs(pontryagin_hamiltonian(lambda, rho, h, u)) < 1e-12);
        const Costate big = LiftedCostate{random_hermitian<Mat4>(gen)};
        CHECK(std::abs(pontryagin_hamiltonian(big, rho, h, u)) < 1e-12);
    }

    SUBCASE("matches the gamma expansion") {
        for (int s = 0; s < 50; ++s) {
            const Mat2 lam = random_hermitian<Mat2>(gen);
            const DensityMatrix rho = random_density(gen);
            const PartialCommutator g =
                PartialCommutator::from_matrix(partial_trace_B(Mat4(commutator(assemble(h, u), rho.mat()))));
            const Complex expected =
                -kI * ((lam(0, 0) - lam(1, 1)) * g.gamma11 + 2.0 * kI * std::imag(std::conj(lam(0, 1)) * g.gamma12));
            const Complex raw = pontryagin_hamiltonian_raw(ReducedState(lam), rho, h, u);
            REQUIRE(std::abs(raw - expected) < 1e-12);
            REQUIRE(std::abs(raw.imag()) < 1e-12);
        }
    }

    SUBCASE("lifted form with lambda (x) I equals the reduced form") {
        for (int s = 0; s < 20; ++s) {
            const Mat2 lam = random_hermitian<Mat2>(gen);
            const DensityMatrix rho = random_density(gen);
            const double a = pontryagin_hamiltonian(ReducedState(lam), rho, h, u);
            const double b = pontryagin_hamiltonian(LiftedCostate{kron(lam, Mat2(Mat2::Identity()))}, rho, h, u);
            REQUIRE(std::abs(a - b) < 1e-12);
        }
    }

    SUBCASE("non-Hermitian costate is caught as non-real") {
        Mat2 lam = Mat2::Zero();
        lam(0, 1) = 1.0;  // not Hermitian
        Mat4 lifted_lam = kron(lam, Mat2(Mat2::Identity())) * kI;
        const DensityMatrix rho = random_density(gen);
        CHECK_THROWS_AS(pontryagin_hamiltonian(LiftedCostate{lifted_lam}, rho, h, u), NonRealValue);
    }
}

TEST_CASE("switching function examples") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    std::mt19937_64 gen(22);
    const DensityMatrix rho = random_density(gen);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(switching_function(ReducedState(Mat2::Zero()), rho, h.control(k)) == 0.0);
        CHECK(switching_function(LiftedCostate{Mat4::Zero()}, rho, h.control(k)) == 0.0);
        const DensityMatrix mixed(0.25 * Mat4::Identity());
        CHECK(std::abs(switching_function(ReducedState(random_hermitian<Mat2>(gen)), mixed, h.control(k))) < 1e-15);
    }

    // The control term of H is -sum_k u_k phi_k.
    const Mat2 lam = random_hermitian<Mat2>(gen);
    const std::vector<double> zero{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> e = zero;
        e[k] = 1.0;
        const double dh = pontryagin_hamiltonian(ReducedState(lam), rho, h, e) -
                          pontryagin_hamiltonian(ReducedState(lam), rho, h, zero);
        CHECK(dh == doctest::Approx(-switching_function(ReducedState(lam), rho, h.control(k))).epsilon(1e-12));
    }
}

TEST_CASE("bang-bang update") {
    Eigen::MatrixXd phi(1, 3);
    phi << 0.3, -0.2, 0.0;
    Eigen::MatrixXd expected(1, 3);
    expected << 1.0, -1.0, -1.0;
    CHECK(bang_bang_update(phi, 1.0) == expected);
    CHECK(bang_bang_update(Eigen::MatrixXd::Zero(4, 3), 2.0) == Eigen::MatrixXd::Constant(4, 3, -2.0));

    std::mt19937_64 gen(23);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd random(50, 3);
    for (int i = 0; i < random.size(); ++i) random.data()[i] = normal(gen);
    const Eigen::MatrixXd base = bang_bang_update(random, 1.0);
    for (double scale : {1e-9, 0.5, 3.0, 1e6}) CHECK(bang_bang_update(scale * random, 1.0) == base);
}

TEST_CASE("costate is constant under a zero Hamiltonian") {
    const HamiltonianSet zero(Mat4::Zero(), {Mat4::Zero(), Mat4::Zero(), Mat4::Zero()});
    const DensityMatrix rho0 = initial_state_preset("case1");
    const Trajectory traj = propagate(rho0, zero, ControlSchedule::constant(0.0, 1.0, 25, std::vector<double>{1.0, -1.0, 1.0}, 1.0));
    for (AdjointMode mode : {AdjointMode::Lifted, AdjointMode::ReducedSeparable}) {
        const CostateTrajectory c = backward_adjoint(traj, zero, mode);
        REQUIRE(c.nodes.size() == 26);
        REQUIRE(c.midpoints.size() == 25);
        const Mat4 terminal = costate_matrix(c.nodes.back());
        for (const auto& node : c.nodes) CHECK((costate_matrix(node) - terminal).norm() == 0.0);
        for (const auto& mid : c.midpoints) CHECK((costate_matrix(mid) - terminal).norm() == 0.0);
    }
}

TEST_CASE("lifted costate matches exact conjugation for constant H") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const std::vector<double> u{1.0, 0.0, -1.0};
    const DensityMatrix rho0 = initial_state_preset("case2");
    const ControlSchedule sched = ControlSchedule::constant(0.0, 1.0, 100, u, 1.0);
    const Trajectory traj = propagate(rho0, h, sched);
    const CostateTrajectory c = backward_adjoint(traj, h, AdjointMode::Lifted);

    const Mat2 lambda_t = terminal_costate(partial_trace_B(traj.final_state())).value.mat();
    const Mat4 big_t = kron(lambda_t, Mat2(Mat2::Identity()));
    CHECK((lifted(c.nodes.back()) - big_t).norm() < 1e-14);

    const Mat4 total = assemble(h, u);
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const Mat4 w = oracle::unitary(total, sched.time(i) - 1.0);
        const Mat4 expected = w * big_t * w.adjoint();
        worst = std::max(worst, (lifted(c.nodes[static_cast<std::size_t>(i)]) - expected).norm());
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("lifted and reduced modes agree when the state stays a product") {
    // A local drift with the exchange controls held at zero keeps a product
    // state a product, so the separable costate is exact there. The switching
    // functions of a product state vanish in both modes, so the costates are
    // compared directly as well.
    const HamiltonianSet full = HamiltonianSet::two_qubit_exchange();
    const Mat2 id = Mat2::Identity();
    const Mat4 local = kron(Mat2(pauli_z() + 0.3 * pauli_x()), id) + kron(id, Mat2(pauli_y()));
    const HamiltonianSet h(local, full.controls());
    std::mt19937_64 gen(24);
    const Mat2 a = partial_trace_B(random_density(gen)).mat();
    const Mat2 b = partial_trace_A(random_density(gen).mat());
    const DensityMatrix rho0(kron(a, b));
    const ControlSchedule sched = ControlSchedule::constant(0.0, 1.0, 40, std::vector<double>{0.0, 0.0, 0.0}, 1.0);
    const Trajectory traj = propagate(rho0, h, sched);
    const CostateTrajectory l = backward_adjoint(traj, h, AdjointMode::Lifted);
    const CostateTrajectory r = backward_adjoint(traj, h, AdjointMode::ReducedSeparable);

    const SwitchRecord lifted_sw = switching_record(traj, l, h);
    const SwitchRecord reduced_sw = switching_record(traj, r, h);
    CHECK((lifted_sw.phi - reduced_sw.phi).cwiseAbs().maxCoeff() < 1e-6);

    double worst = 0.0;
    for (std::size_t i = 0; i < l.nodes.size(); ++i) {
        const Mat4 expected = kron(std::get<ReducedState>(r.nodes[i]).mat(), id);
        worst = std::max(worst, (lifted(l.nodes[i]) - expected).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
    // The costate really moves, so the comparison is not trivial.
    CHECK((lifted(l.nodes.front()) - lifted(l.nodes.back())).norm() > 1e-2);
}

TEST_CASE("lifted and reduced switching functions agree at T") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    std::mt19937_64 gen(25);
    for (const char* preset : {"case1", "case2"}) {
        Eigen::MatrixXd v(200, 3);
        std::bernoulli_distribution coin;
        for (int i = 0; i < v.size(); ++i) v.data()[i] = coin(gen) ? 1.0 : -1.0;
        const Trajectory traj = propagate(initial_state_preset(preset), h, ControlSchedule(0.0, 1.0, v, 1.0));
        const CostateTrajectory l = backward_adjoint(traj, h, AdjointMode::Lifted);
        const CostateTrajectory r = backward_adjoint(traj, h, AdjointMode::ReducedSeparable);
        for (std::size_t k = 0; k < 3; ++k) {
            const double pl = switching_function(l.nodes.back(), traj.final_state(), h.control(k));
            const double pr = switching_function(r.nodes.back(), traj.final_state(), h.control(k));
            CHECK(std::abs(pl - pr) < 1e-6);
        }
    }
}

TEST_CASE("costates stay Hermitian along the backward pass") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    std::mt19937_64 gen(26);
    Eigen::MatrixXd v(200, 3);
    std::bernoulli_distribution coin;
    for (int i = 0; i < v.size(); ++i) v.data()[i] = coin(gen) ? 1.0 : -1.0;
    const Trajectory traj = propagate(initial_state_preset("case1"), h, ControlSchedule(0.0, 1.0, v, 1.0));
    for (AdjointMode mode : {AdjointMode::Lifted, AdjointMode::ReducedSeparable}) {
        const CostateTrajectory c = backward_adjoint(traj, h, mode);
        CHECK_FALSE(c.degenerate);
        double worst = 0.0;
        for (const auto& node : c.nodes) {
            const Mat4 m = costate_matrix(node);
            worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
        }
        for (const auto& node : c.midpoints) {
            const Mat4 m = costate_matrix(node);
            worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("switching functions at T match a post-T control sensitivity") {
    // Extend the run by a short window with u_k nudged; the cost changes at the
    // rate -window * phi_k.
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const std::vector<double> u{1.0, 1.0, 1.0};
    const Trajectory traj =
        propagate(initial_state_preset("case1"), h, ControlSchedule::constant(0.0, 1.0, 200, u, 1.0));
    const DensityMatrix& rho_t = traj.final_state();
    const double window = 1e-6;
    const double du = 1e-3;
    for (AdjointMode mode : {AdjointMode::Lifted, AdjointMode::ReducedSeparable}) {
        const CostateTrajectory c = backward_adjoint(traj, h, mode);
        for (std::size_t k = 0; k < 3; ++k) {
            auto cost = [&](double sign) {
                const Mat4 total = assemble(h, u) + sign * du * h.control(k);
                return oracle::terminal_cost(partial_trace_B(oracle::exact_propagate_constant(rho_t, total, window).mat()));
            };
            const double rate = (cost(1.0) - cost(-1.0)) / (2.0 * du * window);
            CHECK(std::abs(-rate - switching_function(c.nodes.back(), rho_t, h.control(k))) < 1e-4);
        }
    }
}

TEST_CASE("switching record flags singular entries and reports imaginary residue") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const Trajectory traj = propagate(DensityMatrix(Mat4::Identity() / 4.0), h,
                                      ControlSchedule::constant(0.0, 1.0, 10, std::vector<double>{1.0, 1.0, 1.0}, 1.0));
    const SwitchRecord sw = switching_record(traj, backward_adjoint(traj, h, AdjointMode::Lifted), h);
    CHECK(sw.singular == 30);
    CHECK(sw.controls == Eigen::MatrixXd::Constant(10, 3, -1.0));
    CHECK(sw.max_imag < 1e-12);
    REQUIRE(sw.times.size() == 10);
    CHECK(sw.times[0] == doctest::Approx(0.05));
}

TEST_CASE("solver parameter validation") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const DensityMatrix rho0 = initial_state_preset("case1");
    auto bad = [&](auto mutate) {
        SolveParams p;
        mutate(p);
        CHECK_THROWS_AS(forward_backward_solve(rho0, h, p), InvalidParameter);
    };
    bad([](SolveParams& p) { p.max_iters = 0; });
    bad([](SolveParams& p) { p.n_steps = 0; });
    bad([](SolveParams& p) { p.t_end = 0.0; });
    bad([](SolveParams& p) { p.u_max = -1.0; });
    bad([](SolveParams& p) { p.reg = 0.0; });
    bad([](SolveParams& p) { p.substeps = 0; });
    bad([](SolveParams& p) { p.max_flips_per_iter = -1; });
    CHECK(parse_adjoint_mode("reduced") == AdjointMode::ReducedSeparable);
    CHECK(parse_adjoint_mode(to_string(AdjointMode::Lifted)) == AdjointMode::Lifted);
    CHECK_THROWS_AS(parse_adjoint_mode("full"), InvalidParameter);
}

TEST_CASE("one iteration without relaxation is plain propagation") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const DensityMatrix rho0 = initial_state_preset("case1");
    SolveParams p;
    p.max_iters = 1;
    p.relaxation = false;
    const SolveReport report = forward_backward_solve(rho0, h, p);
    const Trajectory direct = propagate(rho0, h, ControlSchedule::constant(0.0, 1.0, 200, std::vector<double>{1.0, 1.0, 1.0}, 1.0));
    CHECK(report.iterations == 1);
    CHECK(report.schedule == direct.schedule);
    REQUIRE(report.trajectory.states.size() == direct.states.size());
    for (std::size_t i = 0; i < direct.states.size(); ++i)
        CHECK(report.trajectory.states[i].mat() == direct.states[i].mat());
    CHECK(report.terminal_concurrence == direct.terminal_concurrence());
}

TEST_CASE("random initial guesses are seeded") {
    SolveParams p;
    p.init = InitialGuess::Random;
    p.seed = 7;
    const Eigen::MatrixXd a = initial_controls(p, 3);
    CHECK(a == initial_controls(p, 3));
    CHECK((a.array().abs() == 1.0).all());
    CHECK((a.array() > 0.0).count() > 200);
    CHECK((a.array() < 0.0).count() > 200);
    p.seed = 8;
    CHECK(a != initial_controls(p, 3));
}

TEST_CASE("preset cases: history, realness and bang-bang values") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    for (const char* preset : {"case1", "case2"}) {
        CAPTURE(preset);
        SolveParams p;
        const SolveReport r = forward_backward_solve(initial_state_preset(preset), h, p);
        CHECK(r.terminal_concurrence >= 0.9);
        CHECK(r.iterations <= p.max_iters);
        CHECK(r.diagnostics.max_imag_hamiltonian < kRealTol);
        CHECK(r.diagnostics.max_imag_switching < kRealTol);
        CHECK((r.schedule.values().array().abs() == p.u_max).all());
        REQUIRE(r.history.size() == static_cast<std::size_t>(r.iterations));
        for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].cost <= r.history[i - 1].cost + p.cost_tol);
        CHECK(r.history.back().cost == doctest::Approx(-r.terminal_concurrence).epsilon(1e-15));
        if (r.converged) {
            CHECK((r.stop_reason == StopReason::PmpFixedPoint || r.stop_reason == StopReason::CostStationary));
        } else {
            CHECK(r.stop_reason != StopReason::PmpFixedPoint);
        }
    }
}

TEST_CASE("disabling relaxation applies every proposed flip") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const DensityMatrix rho0 = initial_state_preset("case1");
    SolveParams p;
    p.relaxation = false;
    p.max_iters = 2;
    const SolveReport r = forward_backward_solve(rho0, h, p);
    const Trajectory first = propagate(rho0, h, ControlSchedule::constant(0.0, 1.0, 200, std::vector<double>{1.0, 1.0, 1.0}, 1.0));
    const SwitchRecord sw = switching_record(first, backward_adjoint(first, h, AdjointMode::Lifted), h);
    CHECK(r.schedule.values() == sw.controls);
}

TEST_CASE("flip cap limits the flips accepted per iteration") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    SolveParams p;
    p.max_flips_per_iter = 3;
    p.max_iters = 5;
    const SolveReport r = forward_backward_solve(initial_state_preset("case2"), h, p);
    for (const auto& rec : r.history) CHECK(rec.flips <= 3);
}

TEST_CASE("a PMP fixed point minimizes the Pontryagin Hamiltonian pointwise") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const DensityMatrix rho0 = initial_state_preset("case1");
    const SolveParams p = short_horizon_params();
    const SolveReport r = forward_backward_solve(rho0, h, p);
    REQUIRE(r.converged);
    REQUIRE(r.stop_reason == StopReason::PmpFixedPoint);
    CHECK(r.iterations > 1);
    CHECK(r.diagnostics.pmp_violations == 0);

    for (int i = 0; i < p.n_steps; ++i) {
        const std::vector<double> u = r.schedule.row(i);
        const auto& rho = r.trajectory.midpoints[static_cast<std::size_t>(i)];
        const auto& lam = r.costate.midpoints[static_cast<std::size_t>(i)];
        const double base = pontryagin_hamiltonian(lam, rho, h, u);
        for (int k = 0; k < 3; ++k) {
            std::vector<double> flipped = u;
            flipped[static_cast<std::size_t>(k)] = -flipped[static_cast<std::size_t>(k)];
            REQUIRE(pontryagin_hamiltonian(lam, rho, h, flipped) >= base - 1e-9);
        }
    }
}

TEST_CASE("switching functions match finite-difference control sensitivities at a fixed point") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    const DensityMatrix rho0 = initial_state_preset("case1");
    SolveParams p = short_horizon_params();
    p.n_steps = 200;
    p.t_end = 0.2;
    const SolveReport r = forward_backward_solve(rho0, h, p);
    REQUIRE(r.converged);

    const double du = 1e-5;
    const double dt = r.schedule.dt();
    int compared = 0;
    for (int i = 0; i < p.n_steps; i += 13) {
        for (int k = 0; k < 3; ++k) {
            const double phi = r.switching.phi(i, k);
            if (std::abs(phi) <= 1e-3) continue;
            auto cost = [&](double sign) {
                Eigen::MatrixXd v = r.schedule.values();
                v(i, k) += sign * du;
                const ControlSchedule s(p.t_start, p.t_end, v, p.u_max + 2.0 * du);
                return oracle::terminal_cost(partial_trace_B(oracle::exact_propagate(rho0, h, s).mat()));
            };
            const double dj = (cost(1.0) - cost(-1.0)) / (2.0 * du);
            CHECK(std::abs(-dj / dt - phi) <= 1e-3 * std::abs(phi));
            ++compared;
        }
    }
    CHECK(compared > 10);
}

TEST_CASE("four-interval grid: solver reaches the exhaustive optimum or reports non-convergence") {
    const HamiltonianSet h = HamiltonianSet::two_qubit_exchange();
    for (const char* preset : {"case1", "case2"}) {
        for (AdjointMode mode : {AdjointMode::Lifted, AdjointMode::ReducedSeparable}) {
            CAPTURE(preset);
            const DensityMatrix rho0 = initial_state_preset(preset);
            const oracle::PatternResult best = oracle::exhaustive_bang_bang(rho0, h, 1.0, 4, 1.0);
            SolveParams p;
            p.n_steps = 4;
            p.substeps = 100;
            p.mode = mode;
            const SolveReport r = forward_backward_solve(rho0, h, p);
            CHECK((r.terminal_concurrence >= best.terminal_concurrence - 1e-6 || !r.converged));
            CHECK(r.terminal_concurrence <= best.terminal_concurrence + 1e-9);
        }
    }
}

TEST_CASE("a start that stays pure and separable flags a degenerate terminal gradient") {
    const HamiltonianSet idle(Mat4::Zero(), {Mat4::Zero(), Mat4::Zero(), Mat4::Zero()});
    SolveParams p;
    p.max_iters = 1;
    const SolveReport r = forward_backward_solve(make_initial_state("00", BellKind::PhiPlus, 0.0), idle, p);
    CHECK(r.costate.degenerate);
    CHECK(r.diagnostics.degenerate_terminal_gradient);
    CHECK(r.terminal_concurrence == 0.0);
    for (const auto& node : r.costate.nodes) CHECK(costate_matrix(node).allFinite());

    // The exchange drift entangles |00> before T, so the same start is regular there.
    const SolveReport driven =
        forward_backward_solve(make_initial_state("00", BellKind::PhiPlus, 0.0), HamiltonianSet::two_qubit_exchange(), p);
    CHECK_FALSE(driven.diagnostics.degenerate_terminal_gradient);
    CHECK(driven.terminal_concurrence > 0.1);
}
