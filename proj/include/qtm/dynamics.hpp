// dynamics.hpp — Markovian (GKLS) open-system propagation with time-dependent
// Hamiltonian schedules. Produces trajectories for the energy ledger.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qtm/ops.hpp"

namespace qtm {

// One dissipative coupling. The generator weights the downward jump with
// rate*(N+1) and the upward (adjoint) jump with rate*N. For squeezing r > 0
// the effective occupancy is N = n*cosh(2r) + sinh^2(r) and the two anomalous
// terms enter with M = -(n+1/2)*sinh(2r), phase fixed to 0; this generator is
// written in the frame rotating at the coupled transition frequency.
struct BathChannel {
    Matrix jump_operator;
    double rate = 0.0;         // 1/time
    double temperature = 0.0;  // bookkeeping for inequality checks
    double occupancy = 0.0;    // thermal mean quanta n at the transition
    double squeezing = 0.0;    // squeeze parameter r, 0 = thermal

    void validate(Eigen::Index dim) const;
};

// Time-dependent Hamiltonian H(t). If a period is declared, H(t) = H(t+period)
// is spot-checked at construction (within 1e-12).
class HamiltonianSchedule {
public:
    HamiltonianSchedule(std::function<HermitianOperator(double)> evaluator,
                        std::optional<double> period = std::nullopt);
    static HamiltonianSchedule constant(HermitianOperator h);

    HermitianOperator operator()(double t) const { return evaluator_(t); }
    Eigen::Index dim() const { return dim_; }
    bool constant_in_time() const { return constant_; }
    std::optional<double> period() const { return period_; }

private:
    std::function<HermitianOperator(double)> evaluator_;
    std::optional<double> period_;
    Eigen::Index dim_ = 0;
    bool constant_ = false;
};

// Sampled evolution: states pass the DensityMatrix checks (after clamping);
// the worst invariant drift seen while storing is reported alongside.
struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<HermitianOperator> hamiltonians;
    double max_trace_drift = 0.0;
    double max_positivity_violation = 0.0;
    double max_hermiticity_drift = 0.0;
};

// A full evolution specification, reusable for counterfactual reruns.
struct EvolutionSpec {
    DensityMatrix initial;
    HamiltonianSchedule schedule;
    std::vector<BathChannel> channels;
    double t_end = 0.0;
    double dt = 0.0;
    int stride = 1;  // store every stride-th step
};

// d(rho)/dt = -i[H,rho] + sum_k dissipators, as described on BathChannel.
Matrix lindblad_rhs(const DensityMatrix& rho, const HermitianOperator& hamiltonian,
                    const std::vector<BathChannel>& channels);

// Fixed-step RK4. The grid is uniform: dt is shrunk (never grown) so that an
// integer number of steps lands exactly on t_end.
Trajectory evolve(const DensityMatrix& rho0, const HamiltonianSchedule& schedule,
                  const std::vector<BathChannel>& channels, double t_end, double dt,
                  int stride = 1);
Trajectory evolve(const EvolutionSpec& spec);

enum class SteadyStateMethod {
    automatic,      // explicit for small dims, implicit otherwise
    explicit_rk4,   // RK4 time stepping in blocks with convergence checks
    implicit_euler  // backward-Euler stepping via a sparse LU of the generator
};

// Fixed point of the generator: stepping continues until the state change per
// block is <= 1e-10 and the generator residual is <= 1e-8.
DensityMatrix steady_state(const HermitianOperator& hamiltonian,
                           const std::vector<BathChannel>& channels,
                           SteadyStateMethod method = SteadyStateMethod::automatic);

} // namespace qtm
