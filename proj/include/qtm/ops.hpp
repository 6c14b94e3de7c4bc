// ops.hpp — Dense complex linear algebra on small Hilbert spaces: Hermitian
// operators, density matrices, eigendecomposition, entropy, and the usual
// state/operator constructors (qubit, truncated Fock space).

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qtm/errors.hpp"

namespace qtm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Units: hbar = k_B = 1 throughout; frequencies, energies and temperatures
// share one unit.
inline constexpr int kMaxDim = 512;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;

double max_abs(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

// Observable on a small Hilbert space. Hermiticity is enforced (within
// kHermitianTol) at construction; the stored matrix is exactly symmetrized.
class HermitianOperator {
public:
    explicit HermitianOperator(Matrix elements);

    Eigen::Index dim() const { return elements_.rows(); }
    const Matrix& matrix() const { return elements_; }

private:
    Matrix elements_;
};

// Quantum state: Hermitian, unit trace (within kTraceTol), eigenvalues
// >= -kPositivityTol. The full check runs at construction.
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix elements);

    // Repair path for integrator output: eigenvalues in [-floor, 0) are
    // clamped to zero and the state renormalized; below -floor throws
    // NumericalError. Reports the worst violation if requested.
    static DensityMatrix clamped(const Matrix& elements, double floor = 1e-6,
                                 double* violation = nullptr);

    Eigen::Index dim() const { return elements_.rows(); }
    const Matrix& matrix() const { return elements_; }

private:
    struct Trusted {};
    DensityMatrix(Matrix elements, Trusted) : elements_(std::move(elements)) {}

    Matrix elements_;
};

// Eigendecomposition with ascending eigenvalues and orthonormal column
// eigenvectors. Degenerate eigenvalues come out in the solver's stable order.
struct EigenSystem {
    RealVector values;  // ascending
    Matrix vectors;     // unitary, columns are eigenvectors
};

EigenSystem eigh(const HermitianOperator& a);
EigenSystem eigh(const Matrix& hermitian);

// -sum_i lambda_i ln lambda_i over eigenvalues > 1e-14 (k_B = 1).
double von_neumann_entropy(const DensityMatrix& rho);

// exp(-H/T)/Z built in the eigenbasis of H; T > 0 required.
DensityMatrix gibbs_state(const HermitianOperator& hamiltonian, double temperature);

// Truncated Fock space: a|n> = sqrt(n)|n-1>, number = a^dag a.
struct FockSpace {
    Matrix annihilation;
    HermitianOperator number;
};
FockSpace fock_space(int dim);

// Normalized truncated coherent state |alpha>.
Vector coherent_ket(Complex alpha, int dim);
DensityMatrix coherent_state(Complex alpha, int dim);

Vector basis_ket(int dim, int level);
DensityMatrix pure_state(const Vector& psi);
DensityMatrix maximally_mixed(int dim);

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

Matrix commutator(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);

// 1/2 * ||rho - sigma||_1 via the spectrum of the (Hermitian) difference.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// exp(G) for anti-Hermitian G (i.e. G^dag = -G), via the spectrum of iG.
Matrix expm_antihermitian(const Matrix& g);

} // namespace qtm
