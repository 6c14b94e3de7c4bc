#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qtm/machines.hpp"
#include "qtm/sampling.hpp"

using namespace qtm;

namespace {

// temperature whose thermal occupancy at `omega` equals n
double temperature_for_occupancy(double omega, double n) {
    if (n <= 0.0) return 0.0;
    return omega / std::log1p(1.0 / n);
}

} // namespace

TEST_CASE("bose occupancy values and limits") {
    // direct evaluation: 1/(e - 1)
    CHECK(bose_occupancy(1.0, 1.0) == doctest::Approx(1.0 / std::expm1(1.0)).epsilon(1e-14));
    CHECK(bose_occupancy(1.0, 1.0) == doctest::Approx(0.581977).epsilon(1e-6));
    CHECK(bose_occupancy(2.0, 0.0) == 0.0);
    // classical limit n -> T/omega
    const double n = bose_occupancy(1e-4, 1.0);
    CHECK(std::abs(n - 1e4) / 1e4 <= 1e-3);
    CHECK_THROWS_AS(bose_occupancy(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bose_occupancy(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("critical modulation frequency") {
    CHECK(critical_modulation(3.0, 2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(critical_modulation(3.0, 1.5, 1.5) == 0.0);
    CHECK(critical_modulation(5.0, 2.0, 1e-12) == doctest::Approx(5.0).epsilon(1e-9));
    // occupancies coincide at the critical point
    const double omega0 = 2.7, t_hot = 1.9, t_cold = 0.6;
    const double delta_cr = critical_modulation(omega0, t_hot, t_cold);
    const double n_cold = bose_occupancy(omega0 - delta_cr, t_cold);
    const double n_hot = bose_occupancy(omega0 + delta_cr, t_hot);
    CHECK(std::abs(n_cold - n_hot) <= 1e-12);
    CHECK_THROWS_AS(critical_modulation(3.0, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("minimal machine: engine point from the worked example") {
    MinimalMachineParams params;
    params.omega0 = 3.0;
    params.delta = 0.5;
    params.t_hot = 2.0;
    params.t_cold = 1.0;
    const SteadyStateReport report = minimal_machine_steady_state(params);
    CHECK(report.regime == Regime::engine);
    REQUIRE(report.efficiency.has_value());
    CHECK(*report.efficiency == doctest::Approx(2.0 * 0.5 / 3.5).epsilon(1e-12));
    CHECK(*report.efficiency == doctest::Approx(0.285714).epsilon(1e-5));
    CHECK(*report.efficiency <= report.carnot + 1e-12);
    CHECK(report.carnot == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(report.power < 0.0);
    // steady-state first law
    CHECK(std::abs(report.current_hot + report.current_cold + report.power) <= 1e-10);
}

TEST_CASE("minimal machine: idle exactly at the critical modulation") {
    MinimalMachineParams params;
    params.omega0 = 3.0;
    params.delta = critical_modulation(3.0, 2.0, 1.0);
    params.t_hot = 2.0;
    params.t_cold = 1.0;
    const SteadyStateReport report = minimal_machine_steady_state(params);
    CHECK(report.regime == Regime::idle);
    CHECK(std::abs(report.flux_hot) <= 1e-15);
    CHECK(std::abs(report.power) <= 1e-15);
    REQUIRE(report.efficiency.has_value());
    // limiting efficiency equals Carnot
    CHECK(*report.efficiency == doctest::Approx(report.carnot).epsilon(1e-12));
}

TEST_CASE("minimal machine: refrigerator point from the worked example") {
    MinimalMachineParams params;
    params.omega0 = 3.0;
    params.delta = 1.5;
    params.t_hot = 2.0;
    params.t_cold = 1.0;
    const SteadyStateReport report = minimal_machine_steady_state(params);
    CHECK(report.regime == Regime::refrigerator);
    REQUIRE(report.cop.has_value());
    CHECK(*report.cop == doctest::Approx((3.0 - 1.5) / 3.0).epsilon(1e-12));
    CHECK(*report.cop <= report.carnot_cop + 1e-12);
    CHECK(report.carnot_cop == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(report.power > 0.0);
}

TEST_CASE("efficiency is independent of the coupling rates") {
    MinimalMachineParams params;
    params.omega0 = 2.4;
    params.delta = 0.45;
    params.t_hot = 3.1;
    params.t_cold = 1.2;
    std::optional<double> reference;
    for (double gamma_hot : {0.01, 0.1, 1.0}) {
        for (double gamma_cold : {0.02, 0.2, 2.0}) {
            params.gamma_hot = gamma_hot;
            params.gamma_cold = gamma_cold;
            const SteadyStateReport report = minimal_machine_steady_state(params);
            REQUIRE(report.efficiency.has_value());
            if (!reference) reference = report.efficiency;
            CHECK(std::abs(*report.efficiency - *reference) <= 1e-12);
        }
    }
}

TEST_CASE("regime classification follows the occupancy comparison") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        MinimalMachineParams params;
        params.omega0 = 1.0 + 4.0 * uniform(rng);
        params.t_cold = 0.3 + 1.5 * uniform(rng);
        params.t_hot = params.t_cold + 0.2 + 2.0 * uniform(rng);
        params.delta = params.omega0 * (0.02 + 0.96 * uniform(rng));
        const SteadyStateReport report = minimal_machine_steady_state(params);
        const double n_hot = bose_occupancy(params.omega0 + params.delta, params.t_hot);
        const double n_cold = bose_occupancy(params.omega0 - params.delta, params.t_cold);
        if (n_hot > n_cold + 1e-14) CHECK(report.regime == Regime::engine);
        if (n_cold > n_hot + 1e-14) CHECK(report.regime == Regime::refrigerator);
    }
}

TEST_CASE("power changes sign exactly at the critical modulation") {
    MinimalMachineParams params;
    params.omega0 = 3.7;
    params.t_hot = 2.6;
    params.t_cold = 0.9;
    const double expected = critical_modulation(params.omega0, params.t_hot, params.t_cold);
    double lo = 1e-6, hi = params.omega0 * (1.0 - 1e-9);
    auto power_at = [&](double delta) {
        MinimalMachineParams p = params;
        p.delta = delta;
        return minimal_machine_steady_state(p).power;
    };
    REQUIRE(power_at(lo) < 0.0);
    REQUIRE(power_at(hi) > 0.0);
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (power_at(mid) < 0.0 ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - expected) <= 1e-9);
}

TEST_CASE("efficiency grows with the modulation and meets Carnot at the edge") {
    MinimalMachineParams params;
    params.omega0 = 3.0;
    params.t_hot = 2.0;
    params.t_cold = 1.0;
    const double delta_cr = critical_modulation(3.0, 2.0, 1.0);
    double previous = -1.0;
    for (int i = 1; i <= 20; ++i) {
        params.delta = delta_cr * double(i) / 20.0 * (1.0 - 1e-12);
        const SteadyStateReport report = minimal_machine_steady_state(params);
        REQUIRE(report.efficiency.has_value());
        CHECK(*report.efficiency > previous);
        previous = *report.efficiency;
    }
    const double at_edge = 2.0 * delta_cr / (params.omega0 + delta_cr);
    CHECK(std::abs(at_edge - carnot_efficiency(1.0, 2.0)) <= 1e-12);
}

TEST_CASE("COP decreases beyond the critical modulation toward its supremum") {
    MinimalMachineParams params;
    params.omega0 = 3.0;
    params.t_hot = 2.0;
    params.t_cold = 1.0;
    const double delta_cr = critical_modulation(3.0, 2.0, 1.0);
    double previous = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 15; ++i) {
        params.delta = delta_cr + (params.omega0 - delta_cr - 1e-9) * double(i) / 15.0;
        const SteadyStateReport report = minimal_machine_steady_state(params);
        REQUIRE(report.cop.has_value());
        CHECK(*report.cop < previous);
        CHECK(*report.cop <= carnot_cop(1.0, 2.0) + 1e-12);
        previous = *report.cop;
    }
    // supremum approached at the critical point
    const double sup = (params.omega0 - delta_cr) / (2.0 * delta_cr);
    CHECK(std::abs(sup - carnot_cop(1.0, 2.0)) <= 1e-12);
}

TEST_CASE("minimal machine cross-check against the two-channel dynamics") {
    MinimalMachineParams params;
    params.omega0 = 3.0;
    params.delta = 0.5;
    params.t_hot = 2.0;
    params.t_cold = 1.0;
    params.gamma_hot = 0.8;
    params.gamma_cold = 0.3;
    const SteadyStateReport report = minimal_machine_steady_state(params);

    Matrix sigma = Matrix::Zero(2, 2);
    sigma(0, 1) = 1.0;
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = params.omega0;
    const BathChannel hot{sigma, params.gamma_hot, params.t_hot, report.occupancy_hot, 0.0};
    const BathChannel cold{sigma, params.gamma_cold, params.t_cold, report.occupancy_cold, 0.0};
    const DensityMatrix ss = steady_state(HermitianOperator(h), {hot, cold});
    CHECK(std::abs(ss.matrix()(1, 1).real() - report.p_excited) <= 1e-8);
}

TEST_CASE("squeezed thermal state construction") {
    SUBCASE("no squeezing reproduces the Gibbs state") {
        const int dim = 40;
        const FockSpace fock = fock_space(dim);
        const HermitianOperator h(1.0 * fock.number.matrix());
        const DensityMatrix state = squeezed_thermal_state(1.0, 1.5, 0.0, dim);
        CHECK(max_abs(state.matrix() - gibbs_state(h, 1.5).matrix()) <= 1e-12);
    }
    SUBCASE("squeezed vacuum mean quanta") {
        const int dim = 80;
        const DensityMatrix state = squeezed_thermal_state(1.0, 0.0, 1.0, dim);
        const FockSpace fock = fock_space(dim);
        const double mean = (state.matrix() * fock.number.matrix()).trace().real();
        const double expected = std::sinh(1.0) * std::sinh(1.0);
        CHECK(expected == doctest::Approx(1.381098).epsilon(1e-6));
        CHECK(mean == doctest::Approx(expected).epsilon(1e-8));
    }
    SUBCASE("mean quanta and entropy of a squeezed thermal state") {
        const double omega = 1.0, temperature = 1.2, r = 0.6;
        const int dim = recommended_fock_dim(omega, temperature, r);
        const FockSpace fock = fock_space(dim);
        const DensityMatrix state = squeezed_thermal_state(omega, temperature, r, dim);
        const double n = bose_occupancy(omega, temperature);
        const double expected = n * std::cosh(2.0 * r) + std::sinh(r) * std::sinh(r);
        const double mean = (state.matrix() * fock.number.matrix()).trace().real();
        CHECK(mean == doctest::Approx(expected).epsilon(1e-7));
        const HermitianOperator h(omega * fock.number.matrix());
        CHECK(std::abs(von_neumann_entropy(state) -
                       von_neumann_entropy(gibbs_state(h, temperature))) <= 1e-8);
    }
    SUBCASE("tight truncation is rejected") {
        CHECK_THROWS_AS(squeezed_thermal_state(1.0, 2.0, 1.0, 12), NumericalError);
    }
}

TEST_CASE("squeezed channel fixed point matches the squeezed thermal state") {
    const double omega = 1.0, n = 0.5, r = 0.5;
    const double temperature = temperature_for_occupancy(omega, n);
    const int dim = recommended_fock_dim(omega, temperature, r) + 24;
    const FockSpace fock = fock_space(dim);
    const BathChannel channel{fock.annihilation, 1.0, temperature, n, r};
    const DensityMatrix ss = steady_state(HermitianOperator(Matrix::Zero(dim, dim)), {channel});
    const DensityMatrix oracle = squeezed_thermal_state(omega, temperature, r, dim);
    CHECK(trace_distance(ss, oracle) <= 1e-6);
}

TEST_CASE("otto cycle without squeezing reproduces the standard numbers") {
    OttoParams params;  // omega 1 -> 2, T_H = 4, T_C = 1
    const CycleReport report = otto_cycle(params);
    CHECK(report.engine);
    REQUIRE(report.eta.has_value());
    REQUIRE(report.eta_max.has_value());
    // population-preserving ramps + full thermalization: eta = 1 - omega_1/omega_2
    CHECK(*report.eta == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(*report.eta_max == doctest::Approx(report.carnot).epsilon(1e-9));
    CHECK(report.carnot == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(std::abs(report.net_work + report.exchange_hot + report.exchange_cold) <= 1e-8);
    CHECK(report.counterfactual_heat == report.exchange_hot);
}

TEST_CASE("squeezing lifts the efficiency bound above Carnot") {
    OttoParams params;
    params.squeezing = 0.75;
    const CycleReport report = otto_cycle(params);
    REQUIRE(report.eta.has_value());
    REQUIRE(report.eta_max.has_value());
    CHECK(*report.eta <= *report.eta_max + 1e-9);
    CHECK(*report.eta_max <= 1.0 + 1e-12);
    CHECK(*report.eta_max > report.carnot);
    CHECK(std::abs(report.net_work + report.exchange_hot + report.exchange_cold) <= 1e-8);
}

TEST_CASE("non-engine frequency ratios are flagged without an efficiency") {
    OttoParams params;
    params.omega_hot = 2.2;
    params.t_hot = 2.0;
    params.t_cold = 1.0;
    const CycleReport report = otto_cycle(params);
    CHECK_FALSE(report.engine);
    CHECK_FALSE(report.eta.has_value());
    CHECK(report.net_work >= 0.0);
}

TEST_CASE("efficiency bound formula") {
    CHECK(efficiency_bound(1.0, 1.0, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(efficiency_bound(1e-12, 1.0, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(efficiency_bound(0.5, 1.0, 1.0, 2.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(efficiency_bound(-0.5, 1.0, 1.0, 2.0) == 1.0);  // clamped
    CHECK_THROWS_AS(efficiency_bound(1.0, 0.0, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(efficiency_bound(1.0, 1.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("recommended fock dimension satisfies the tail rule") {
    const int dim = recommended_fock_dim(2.0, 4.0, 1.0);
    const DensityMatrix state = squeezed_thermal_state(2.0, 4.0, 1.0, dim);
    const double tail = state.matrix()(dim - 1, dim - 1).real() +
                        state.matrix()(dim - 2, dim - 2).real();
    CHECK(tail < 1e-8);
}

TEST_CASE("machine parameter validation") {
    MinimalMachineParams bad;
    bad.delta = 3.5;  // >= omega0
    CHECK_THROWS_AS(minimal_machine_steady_state(bad), std::invalid_argument);
    bad = MinimalMachineParams{};
    bad.t_hot = 0.5;  // <= t_cold
    CHECK_THROWS_AS(minimal_machine_steady_state(bad), std::invalid_argument);
    OttoParams otto_bad;
    otto_bad.omega_cold = 3.0;  // >= omega_hot
    CHECK_THROWS_AS(otto_cycle(otto_bad), std::invalid_argument);
}
