// sampling.hpp — Seeded random states and operators for sweeps and property
// suites. Spectra come from a symmetric Dirichlet (concentration 1), bases
// from Haar-random unitaries built by QR of a complex Gaussian matrix.

#pragma once

#include <random>

#include "qtm/ops.hpp"

namespace qtm {

Matrix haar_unitary(int dim, std::mt19937_64& rng);

DensityMatrix random_density_matrix(int dim, std::mt19937_64& rng);

HermitianOperator random_hermitian(int dim, std::mt19937_64& rng, double scale = 1.0);

// Stream-splitting helper: a decorrelated seed for grid point `index`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

} // namespace qtm
