// passivity.hpp — Passive-state construction, ergotropy, and passivity tests.
// The passive counterpart assigns the state's eigenvalues, sorted descending,
// to the energy eigenstates sorted ascending.

#pragma once

#include <vector>

#include "qtm/ops.hpp"

namespace qtm {

struct PassiveDecomposition {
    DensityMatrix passive_state;  // pi, diagonal in the H eigenbasis
    double ergotropy = 0.0;       // Tr(rho H) - Tr(pi H), >= 0
    // permutation[j] = ascending-energy level that receives the j-th
    // eigenvalue of rho (in the ascending EigenSystem order)
    std::vector<int> permutation;
};

PassiveDecomposition passive_state(const DensityMatrix& rho, const HermitianOperator& hamiltonian);

// State eigenvalues (ascending, as eigh returns them) rearranged into the
// passive order: descending populations over ascending energy levels,
// clamped at zero.
RealVector passive_populations(const RealVector& ascending_state_values);

double ergotropy(const DensityMatrix& rho, const HermitianOperator& hamiltonian);

// True iff ergotropy <= tol and ||[rho, H]||_F <= tol.
bool is_passive(const DensityMatrix& rho, const HermitianOperator& hamiltonian,
                double tol = 1e-9);

} // namespace qtm
