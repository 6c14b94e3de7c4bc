#include "qtm/ops.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qtm {

namespace {

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
    }
    if (m.rows() > kMaxDim) {
        throw std::invalid_argument(std::string(what) + ": dimension exceeds supported maximum " +
                                    std::to_string(kMaxDim));
    }
}

} // namespace

double max_abs(const Matrix& m) {
    return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= tol;
}

HermitianOperator::HermitianOperator(Matrix elements) {
    require_square(elements, "HermitianOperator");
    if (!is_hermitian(elements, kHermitianTol)) {
        throw std::invalid_argument("HermitianOperator: matrix is not Hermitian within 1e-12");
    }
    elements_ = 0.5 * (elements + elements.adjoint().eval());
}

DensityMatrix::DensityMatrix(Matrix elements) {
    require_square(elements, "DensityMatrix");
    if (!is_hermitian(elements, kHermitianTol)) {
        throw std::invalid_argument("DensityMatrix: matrix is not Hermitian within 1e-12");
    }
    elements_ = 0.5 * (elements + elements.adjoint().eval());
    const double trace = elements_.trace().real();
    if (std::abs(trace - 1.0) > kTraceTol) {
        throw std::invalid_argument("DensityMatrix: trace deviates from 1 by more than 1e-10");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(elements_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("DensityMatrix: eigenvalue check failed to converge");
    }
    if (solver.eigenvalues().minCoeff() < -kPositivityTol) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond 1e-10");
    }
}

DensityMatrix DensityMatrix::clamped(const Matrix& elements, double floor, double* violation) {
    require_square(elements, "DensityMatrix");
    Matrix sym = 0.5 * (elements + elements.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("DensityMatrix: eigenvalue clamp failed to converge");
    }
    RealVector vals = solver.eigenvalues();
    const double worst = -vals.minCoeff();
    if (violation) *violation = std::max(0.0, worst);
    if (worst > floor) {
        throw NumericalError("DensityMatrix: eigenvalue " + std::to_string(-worst) +
                             " violates positivity beyond " + std::to_string(floor) +
                             "; reduce the integration step");
    }
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = std::max(vals[i], 0.0);
    const double total = vals.sum();
    if (total <= 0.0) {
        throw NumericalError("DensityMatrix: state collapsed to zero trace during clamping");
    }
    vals /= total;
    Matrix repaired = solver.eigenvectors() * vals.asDiagonal() *
                      solver.eigenvectors().adjoint();
    repaired = 0.5 * (repaired + repaired.adjoint().eval());
    return DensityMatrix(std::move(repaired), Trusted{});
}

EigenSystem eigh(const Matrix& hermitian) {
    require_square(hermitian, "eigh");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigh: eigendecomposition failed to converge");
    }
    EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
    const Eigen::Index n = hermitian.rows();
    const Matrix identity = Matrix::Identity(n, n);
    if (max_abs(es.vectors.adjoint() * es.vectors - identity) > 1e-10) {
        throw NumericalError("eigh: eigenvector basis lost orthonormality");
    }
    const Matrix rebuilt =
        es.vectors * es.values.asDiagonal().toDenseMatrix().cast<Complex>() * es.vectors.adjoint();
    if (max_abs(rebuilt - hermitian) > 1e-10 * std::max(1.0, max_abs(hermitian))) {
        throw NumericalError("eigh: reconstruction residual too large");
    }
    return es;
}

EigenSystem eigh(const HermitianOperator& a) {
    return eigh(a.matrix());
}

double von_neumann_entropy(const DensityMatrix& rho) {
    const EigenSystem es = eigh(rho.matrix());
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        const double p = es.values[i];
        if (p > 1e-14) entropy -= p * std::log(p);
    }
    return entropy;
}

DensityMatrix gibbs_state(const HermitianOperator& hamiltonian, double temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("gibbs_state: temperature must be positive");
    }
    const EigenSystem es = eigh(hamiltonian);
    const double ground = es.values.minCoeff();
    RealVector weights(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        weights[i] = std::exp(-(es.values[i] - ground) / temperature);
    }
    weights /= weights.sum();
    Matrix rho = es.vectors * weights.asDiagonal().toDenseMatrix().cast<Complex>() *
                 es.vectors.adjoint();
    return DensityMatrix(std::move(rho));
}

FockSpace fock_space(int dim) {
    if (dim < 2) throw std::invalid_argument("fock_space: dim must be >= 2");
    if (dim > kMaxDim) throw std::invalid_argument("fock_space: dim exceeds supported maximum");
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
    Matrix number = a.adjoint() * a;
    return FockSpace{std::move(a), HermitianOperator(std::move(number))};
}

Vector coherent_ket(Complex alpha, int dim) {
    if (dim < 1) throw std::invalid_argument("coherent_ket: dim must be >= 1");
    Vector psi(dim);
    // amplitude recursion c_n = c_{n-1} * alpha / sqrt(n), normalized at the end
    psi[0] = Complex(1.0, 0.0);
    for (int n = 1; n < dim; ++n) psi[n] = psi[n - 1] * alpha / std::sqrt(double(n));
    psi /= psi.norm();
    return psi;
}

DensityMatrix coherent_state(Complex alpha, int dim) {
    return pure_state(coherent_ket(alpha, dim));
}

Vector basis_ket(int dim, int level) {
    if (dim < 1 || level < 0 || level >= dim) {
        throw std::invalid_argument("basis_ket: level out of range");
    }
    Vector psi = Vector::Zero(dim);
    psi[level] = Complex(1.0, 0.0);
    return psi;
}

DensityMatrix pure_state(const Vector& psi) {
    const double norm = psi.norm();
    if (norm <= 0.0) throw std::invalid_argument("pure_state: zero vector");
    Vector unit = psi / norm;
    return DensityMatrix(unit * unit.adjoint());
}

DensityMatrix maximally_mixed(int dim) {
    if (dim < 1) throw std::invalid_argument("maximally_mixed: dim must be >= 1");
    return DensityMatrix(Matrix::Identity(dim, dim) / double(dim));
}

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
    return a * b - b * a;
}

double frobenius_norm(const Matrix& m) {
    return m.norm();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    const EigenSystem es = eigh(Matrix(rho.matrix() - sigma.matrix()));
    return 0.5 * es.values.cwiseAbs().sum();
}

Matrix expm_antihermitian(const Matrix& g) {
    require_square(g, "expm_antihermitian");
    if (max_abs(g + g.adjoint()) > 1e-10 * std::max(1.0, max_abs(g))) {
        throw std::invalid_argument("expm_antihermitian: generator is not anti-Hermitian");
    }
    // G = -i(iG) with iG Hermitian, so exp(G) = V exp(-i diag) V^dag
    const Matrix herm = Complex(0, 1) * g;
    const EigenSystem es = eigh(herm);
    Vector phases(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        phases[i] = std::exp(Complex(0, -es.values[i]));
    }
    return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

} // namespace qtm
