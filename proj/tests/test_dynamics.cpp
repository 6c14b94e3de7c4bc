#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qtm/dynamics.hpp"
#include "qtm/sampling.hpp"

using namespace qtm;

namespace {

double thermal_occupancy(double omega, double temperature) {
    return 1.0 / std::expm1(omega / temperature);
}

HermitianOperator qubit_hamiltonian(double omega) {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = omega;
    return HermitianOperator(h);
}

Matrix sigma_minus() {
    Matrix s = Matrix::Zero(2, 2);
    s(0, 1) = 1.0;
    return s;
}

BathChannel thermal_channel(const Matrix& jump, double rate, double omega, double temperature) {
    return BathChannel{jump, rate, temperature, thermal_occupancy(omega, temperature), 0.0};
}

} // namespace

TEST_CASE("thermal state is a fixed point of the matching channel") {
    const double omega = 1.2, temperature = 0.9;
    const HermitianOperator h = qubit_hamiltonian(omega);
    const DensityMatrix gibbs = gibbs_state(h, temperature);
    const BathChannel channel = thermal_channel(sigma_minus(), 0.7, omega, temperature);
    CHECK(frobenius_norm(lindblad_rhs(gibbs, h, {channel})) <= 1e-10);

    const int dim = 12;
    const FockSpace fock = fock_space(dim);
    const HermitianOperator hosc(omega * fock.number.matrix());
    const DensityMatrix gibbs_osc = gibbs_state(hosc, temperature);
    const BathChannel cavity = thermal_channel(fock.annihilation, 0.7, omega, temperature);
    CHECK(frobenius_norm(lindblad_rhs(gibbs_osc, hosc, {cavity})) <= 1e-10);
}

TEST_CASE("vacuum is dark for a zero-temperature channel") {
    const FockSpace fock = fock_space(6);
    const HermitianOperator h(fock.number.matrix());
    const BathChannel channel{fock.annihilation, 1.0, 0.0, 0.0, 0.0};
    const DensityMatrix vacuum = pure_state(basis_ket(6, 0));
    CHECK(frobenius_norm(lindblad_rhs(vacuum, h, {channel})) <= 1e-14);
}

TEST_CASE("two-level decay rate is the bare channel rate") {
    const double gamma = 0.37;
    const HermitianOperator h = qubit_hamiltonian(1.0);
    const BathChannel channel{sigma_minus(), gamma, 0.0, 0.0, 0.0};
    const Matrix rate = lindblad_rhs(pure_state(basis_ket(2, 1)), h, {channel});
    CHECK(rate(1, 1).real() == doctest::Approx(-gamma).epsilon(1e-14));
}

TEST_CASE("generator output is traceless and Hermitian") {
    std::mt19937_64 rng(5);
    const int dim = 8;
    const FockSpace fock = fock_space(dim);
    const DensityMatrix rho = random_density_matrix(dim, rng);
    const HermitianOperator h = random_hermitian(dim, rng);
    const BathChannel squeezed{fock.annihilation, 0.8, 1.0, 0.4, 0.6};
    const BathChannel thermal = thermal_channel(fock.annihilation, 0.5, 1.0, 2.0);
    const Matrix out = lindblad_rhs(rho, h, {squeezed, thermal});
    CHECK(std::abs(out.trace().real()) <= 1e-12);
    CHECK(std::abs(out.trace().imag()) <= 1e-12);
    CHECK(max_abs(out - out.adjoint().eval()) <= 1e-12);
}

TEST_CASE("damped coherent state keeps its closed-form amplitude") {
    const double gamma = 1.0;
    const int dim = 24;
    const FockSpace fock = fock_space(dim);
    const HermitianOperator h(Matrix::Zero(dim, dim));  // rotating frame
    const BathChannel channel{fock.annihilation, gamma, 0.0, 0.0, 0.0};
    const DensityMatrix initial = coherent_state(Complex(1.0, 0.0), dim);

    const Trajectory traj = evolve(initial, HamiltonianSchedule::constant(h), {channel}, 3.0,
                                   1e-3, 100);
    for (size_t i = 0; i < traj.times.size(); ++i) {
        const double amplitude =
            (traj.states[i].matrix() * fock.annihilation).trace().real();
        const double expected = std::exp(-0.5 * gamma * traj.times[i]);
        CHECK(std::abs(amplitude - expected) <= 1e-6);
    }
}

TEST_CASE("thermal initial state stays stationary") {
    const double omega = 1.0, temperature = 1.4;
    const HermitianOperator h = qubit_hamiltonian(omega);
    const DensityMatrix gibbs = gibbs_state(h, temperature);
    const BathChannel channel = thermal_channel(sigma_minus(), 1.0, omega, temperature);
    const Trajectory traj =
        evolve(gibbs, HamiltonianSchedule::constant(h), {channel}, 5.0, 0.01, 50);
    for (const auto& state : traj.states) {
        CHECK(max_abs(state.matrix() - gibbs.matrix()) <= 1e-8);
    }
}

TEST_CASE("excited qubit reaches half population at the half-life") {
    const HermitianOperator h = qubit_hamiltonian(1.0);
    const BathChannel channel{sigma_minus(), 1.0, 0.0, 0.0, 0.0};
    const double t_half = std::log(2.0);
    const Trajectory traj = evolve(pure_state(basis_ket(2, 1)),
                                   HamiltonianSchedule::constant(h), {channel}, t_half, 1e-3, 1000);
    CHECK(traj.states.back().matrix()(1, 1).real() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("trajectories preserve trace and Hermiticity") {
    std::mt19937_64 rng(19);
    const int dim = 6;
    const FockSpace fock = fock_space(dim);
    const DensityMatrix rho0 = random_density_matrix(dim, rng);
    const BathChannel channel = thermal_channel(fock.annihilation, 1.0, 1.0, 1.0);
    const HermitianOperator h(fock.number.matrix());
    const Trajectory traj =
        evolve(rho0, HamiltonianSchedule::constant(h), {channel}, 4.0, 0.005, 10);
    CHECK(traj.max_trace_drift <= 1e-8);
    CHECK(traj.max_hermiticity_drift <= 1e-10);
    for (const auto& state : traj.states) {
        CHECK(std::abs(state.matrix().trace().real() - 1.0) <= 1e-12);
    }
}

TEST_CASE("halving dt shrinks the end-state error by about 16x") {
    const HermitianOperator h = qubit_hamiltonian(1.0);
    const BathChannel channel{sigma_minus(), 1.0, 0.0, 0.0, 0.0};
    const DensityMatrix excited = pure_state(basis_ket(2, 1));
    const auto end_error = [&](double dt) {
        const Trajectory traj =
            evolve(excited, HamiltonianSchedule::constant(h), {channel}, 1.0, dt, 1 << 20);
        return std::abs(traj.states.back().matrix()(1, 1).real() - std::exp(-1.0));
    };
    const double coarse = end_error(0.05);
    const double fine = end_error(0.025);
    CHECK(coarse / fine >= 10.0);
    CHECK(coarse / fine <= 24.0);
}

TEST_CASE("driven dephasing accumulates the integrated phase") {
    // H(t) = f(t) sigma_z with f(t) = a + b t is exactly solvable: the
    // coherence picks up exp(-2i Phi(t)), Phi = a t + b t^2 / 2.
    const double a = 0.4, b = 0.3, t_end = 2.0;
    const HamiltonianSchedule schedule(
        [&](double t) { return HermitianOperator(Matrix((a + b * t) * pauli_z())); });
    Vector plus(2);
    plus << 1.0, 1.0;
    const Trajectory traj = evolve(pure_state(plus), schedule, {}, t_end, 1e-3, 2000);
    const Complex coherence = traj.states.back().matrix()(0, 1);
    const double phase = a * t_end + 0.5 * b * t_end * t_end;
    const Complex expected = 0.5 * std::exp(Complex(0.0, -2.0 * phase));
    CHECK(std::abs(coherence - expected) <= 1e-8);
}

TEST_CASE("steady state of a single thermal channel is the Gibbs state") {
    const double omega = 1.0, temperature = 0.8;
    const HermitianOperator h = qubit_hamiltonian(omega);
    const BathChannel channel = thermal_channel(sigma_minus(), 0.6, omega, temperature);
    const DensityMatrix ss = steady_state(h, {channel});
    CHECK(max_abs(ss.matrix() - gibbs_state(h, temperature).matrix()) <= 1e-8);
    CHECK(frobenius_norm(lindblad_rhs(ss, h, {channel})) <= 1e-8);
}

TEST_CASE("zero-temperature channel relaxes to the ground state") {
    const HermitianOperator h = qubit_hamiltonian(1.0);
    const BathChannel channel{sigma_minus(), 1.0, 0.0, 0.0, 0.0};
    const DensityMatrix ss = steady_state(h, {channel});
    CHECK(max_abs(ss.matrix() - pure_state(basis_ket(2, 0)).matrix()) <= 1e-8);
}

TEST_CASE("two-channel qubit matches the rate-equation population") {
    const double gamma_hot = 0.8, gamma_cold = 0.25;
    const double n_hot = 1.7, n_cold = 0.2;
    const HermitianOperator h = qubit_hamiltonian(1.0);
    const BathChannel hot{sigma_minus(), gamma_hot, 0.0, n_hot, 0.0};
    const BathChannel cold{sigma_minus(), gamma_cold, 0.0, n_cold, 0.0};
    const DensityMatrix ss = steady_state(h, {hot, cold});
    const double up = gamma_hot * n_hot + gamma_cold * n_cold;
    const double down = gamma_hot * (n_hot + 1.0) + gamma_cold * (n_cold + 1.0);
    CHECK(ss.matrix()(1, 1).real() == doctest::Approx(up / (up + down)).epsilon(1e-10));
}

TEST_CASE("explicit and implicit steady-state paths agree") {
    const double omega = 1.1, temperature = 1.3;
    Matrix h = 0.5 * omega * pauli_z() + 0.3 * pauli_x();
    const HermitianOperator hamiltonian(h);
    const BathChannel channel = thermal_channel(sigma_minus(), 0.9, omega, temperature);
    const DensityMatrix a = steady_state(hamiltonian, {channel}, SteadyStateMethod::explicit_rk4);
    const DensityMatrix b = steady_state(hamiltonian, {channel}, SteadyStateMethod::implicit_euler);
    CHECK(max_abs(a.matrix() - b.matrix()) <= 1e-8);
}

TEST_CASE("oscillator thermal steady state via the implicit path") {
    const double omega = 1.0, temperature = 1.5;
    const int dim = 20;
    const FockSpace fock = fock_space(dim);
    const HermitianOperator h(omega * fock.number.matrix());
    const BathChannel channel = thermal_channel(fock.annihilation, 1.0, omega, temperature);
    const DensityMatrix ss = steady_state(h, {channel});
    CHECK(max_abs(ss.matrix() - gibbs_state(h, temperature).matrix()) <= 1e-8);
}

TEST_CASE("input validation") {
    const HermitianOperator h = qubit_hamiltonian(1.0);
    const DensityMatrix rho = maximally_mixed(2);
    CHECK_THROWS_AS(steady_state(h, {}), std::invalid_argument);
    BathChannel mismatched{Matrix::Zero(3, 3), 1.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(lindblad_rhs(rho, h, {mismatched}), std::invalid_argument);
    BathChannel negative_rate{sigma_minus(), -1.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(lindblad_rhs(rho, h, {negative_rate}), std::invalid_argument);
    CHECK_THROWS_AS(evolve(rho, HamiltonianSchedule::constant(h), {}, -1.0, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(evolve(rho, HamiltonianSchedule::constant(h), {}, 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(HamiltonianSchedule(
                        [](double t) {
                            return HermitianOperator(Matrix(t * pauli_z()));
                        },
                        1.0),
                    std::invalid_argument);
}
