// machines.hpp — The minimal periodically-modulated qubit machine and the
// squeezed-thermal-bath Otto cycle with its generalized efficiency bound.

#pragma once

#include <optional>

#include "qtm/dynamics.hpp"
#include "qtm/ops.hpp"

namespace qtm {

// Bose-Einstein occupancy 1/(exp(omega/T) - 1); 0 at T = 0.
double bose_occupancy(double omega, double temperature);

// Modulation frequency separating engine and refrigerator operation:
// omega0 (T_H - T_C) / (T_H + T_C). The occupancies at the shifted
// frequencies coincide there.
double critical_modulation(double omega0, double t_hot, double t_cold);

double carnot_efficiency(double t_cold, double t_hot);
double carnot_cop(double t_cold, double t_hot);

enum class Regime { engine, refrigerator, idle };
const char* regime_name(Regime regime);

// Two-level working fluid at resonance omega0, frequency-modulated with
// amplitude delta, coupled to the hot bath at omega0+delta and to the cold
// bath at omega0-delta.
struct MinimalMachineParams {
    double omega0 = 3.0;
    double delta = 0.5;
    double gamma_hot = 1.0;
    double gamma_cold = 1.0;
    double t_hot = 2.0;
    double t_cold = 1.0;

    void validate() const;
};

// Steady-state currents; sign convention: J positive into the working fluid,
// power positive when consumed from the piston.
struct SteadyStateReport {
    double p_excited = 0.0;
    double flux_hot = 0.0;  // quanta/time from the hot bath
    double current_hot = 0.0;
    double current_cold = 0.0;
    double power = 0.0;
    Regime regime = Regime::idle;
    std::optional<double> efficiency;
    std::optional<double> cop;
    double carnot = 0.0;
    double carnot_cop = 0.0;
    double occupancy_hot = 0.0;
    double occupancy_cold = 0.0;
};

SteadyStateReport minimal_machine_steady_state(const MinimalMachineParams& params);

// Squeeze-transformed Gibbs state of the oscillator mode. Mean quanta
// n*cosh(2r) + sinh^2(r) with n the thermal occupancy at (omega, T). Errors
// if the top two Fock populations exceed 1e-8 (truncation too tight).
DensityMatrix squeezed_thermal_state(double omega, double temperature, double squeezing, int dim);

// Smallest Fock dimension whose squeezed thermal state passes the truncation
// tail rule; errors if none does within the contact-dimension ceiling.
int recommended_fock_dim(double omega, double temperature, double squeezing,
                         double tail_tol = 1e-8);

struct OttoParams {
    double omega_cold = 1.0;  // stroke frequency omega_1
    double omega_hot = 2.0;   // stroke frequency omega_2 > omega_1
    double t_hot = 4.0;
    double t_cold = 1.0;
    double squeezing = 0.0;  // hot-bath squeeze parameter r
    int fock_dim = 0;        // 0 = choose by the truncation tail rule

    void validate() const;
};

// Four strokes: population-preserving frequency ramps and full equilibration
// with each bath (fixed points of the contact generators, expressed in the
// frame rotating at the contact frequency; energies use the lab Hamiltonian).
struct CycleReport {
    double work_compression = 0.0;    // omega_cold -> omega_hot ramp
    double work_expansion = 0.0;      // omega_hot -> omega_cold ramp
    double exchange_hot = 0.0;        // energy drawn from the hot contact
    double exchange_cold = 0.0;       // energy drawn from the cold contact
    double net_work = 0.0;            // negative = extracted
    double counterfactual_heat = 0.0; // hot exchange of the thermal (r=0) cycle
    bool engine = false;
    std::optional<double> eta;
    std::optional<double> eta_max;
    double carnot = 0.0;
    int fock_dim = 0;
    double hot_tail = 0.0;       // top-two Fock populations of the hot contact
    double quanta_defect = 0.0;  // relative truncation defect of its mean quanta
};

CycleReport otto_cycle(const OttoParams& params);

// 1 - (T_C/T_H) (exchange'/exchange), clamped at 1. Reduces to the Carnot
// bound when the two exchanges coincide.
double efficiency_bound(double exchange_prime, double exchange, double t_cold, double t_hot);

} // namespace qtm
