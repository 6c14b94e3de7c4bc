// ledger.hpp — Energy and entropy accounting along trajectories: the
// heat / dissipated-ergotropy split of the bath energy exchange and the
// entropy inequalities it sharpens.

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qtm/dynamics.hpp"

namespace qtm {

// Cumulative series along a trajectory. By construction
// exchange = (E - E(0)) - work and dissipated_ergotropy = exchange - heat,
// so the first law and the split close exactly; exchange_direct is the
// redundant direct quadrature of Tr[drho/dt H], kept as an accuracy probe.
struct EnergyLedger {
    std::vector<double> times;
    std::vector<double> energy;                // Tr[rho(t) H(t)]
    std::vector<double> work;                  // integral of Tr[rho dH/dt]
    std::vector<double> exchange;              // energy taken from the baths
    std::vector<double> heat;                  // integral of Tr[dpi/dt H]
    std::vector<double> dissipated_ergotropy;  // exchange - heat
    std::vector<double> entropy;               // von Neumann entropy of rho(t)
    std::vector<double> exchange_direct;

    // worst disagreement between the direct integral and exchange
    double direct_residual() const;
};

// Requires at least three samples. Derivatives use centered differences in
// the interior and one-sided differences at the endpoints; integrals use the
// trapezoidal rule on the stored grid.
EnergyLedger build_ledger(const Trajectory& trajectory);

struct InequalityReport {
    double delta_S = 0.0;
    double Q_over_T = 0.0;
    double E_over_T = 0.0;
    std::optional<double> E_prime_over_T;
    double slack_tight = 0.0;  // delta_S minus (Q/T or E'/T)
    double slack_spohn = 0.0;  // delta_S minus E/T
};

// Constant-Hamiltonian runs use Q/T for the tight bound; supply the
// counterfactual exchange E' to check the driven-case bound instead.
InequalityReport check_inequalities(const EnergyLedger& ledger, double t_bath,
                                    std::optional<double> counterfactual_exchange = std::nullopt);

// Reruns the identical evolution from the passive counterpart of the initial
// state (with respect to H(0)) and returns that run's final exchange.
double counterfactual_exchange(const EvolutionSpec& spec);

// CSV schema: t,E,W,exchange,heat,diss_ergotropy,entropy. Comment lines are
// written verbatim before the header.
void write_ledger_csv(const EnergyLedger& ledger, std::ostream& out,
                      const std::vector<std::string>& comment_lines = {});

} // namespace qtm
