#include "qtm/passivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qtm {

RealVector passive_populations(const RealVector& ascending_state_values) {
    const Eigen::Index dim = ascending_state_values.size();
    RealVector populations(dim);
    for (Eigen::Index level = 0; level < dim; ++level) {
        populations[level] = std::max(ascending_state_values[dim - 1 - level], 0.0);
    }
    return populations;
}

PassiveDecomposition passive_state(const DensityMatrix& rho, const HermitianOperator& hamiltonian) {
    if (rho.dim() != hamiltonian.dim()) {
        throw std::invalid_argument("passive_state: dimension mismatch between state and Hamiltonian");
    }
    const Eigen::Index dim = rho.dim();
    const EigenSystem state = eigh(rho.matrix());
    const EigenSystem energy = eigh(hamiltonian);

    // Descending population order; ties keep the ascending-eigh order (stable).
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return state.values[a] > state.values[b];
    });

    RealVector populations(dim);
    std::vector<int> permutation(dim);
    for (Eigen::Index level = 0; level < dim; ++level) {
        populations[level] = std::max(state.values[order[level]], 0.0);
        permutation[order[level]] = int(level);
    }

    Matrix pi = energy.vectors * populations.asDiagonal().toDenseMatrix().cast<Complex>() *
                energy.vectors.adjoint();
    const double energy_rho = (rho.matrix() * hamiltonian.matrix()).trace().real();
    const double energy_pi = populations.dot(energy.values);
    double work = energy_rho - energy_pi;
    if (work < 0.0) {
        if (work < -1e-10) {
            throw NumericalError("passive_state: negative ergotropy beyond tolerance");
        }
        work = 0.0;
    }
    return PassiveDecomposition{DensityMatrix(std::move(pi)), work, std::move(permutation)};
}

double ergotropy(const DensityMatrix& rho, const HermitianOperator& hamiltonian) {
    return passive_state(rho, hamiltonian).ergotropy;
}

bool is_passive(const DensityMatrix& rho, const HermitianOperator& hamiltonian, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("is_passive: tol must be positive");
    if (ergotropy(rho, hamiltonian) > tol) return false;
    return frobenius_norm(commutator(rho.matrix(), hamiltonian.matrix())) <= tol;
}

} // namespace qtm
