#include "qtm/sampling.hpp"

#include <cmath>

#include <Eigen/QR>

namespace qtm {

Matrix haar_unitary(int dim, std::mt19937_64& rng) {
    if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix ginibre(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            ginibre(r, c) = Complex(re, im) / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(ginibre);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix the R-diagonal phases so the distribution is exactly Haar
    for (int i = 0; i < dim; ++i) {
        const Complex d = r(i, i);
        const double mag = std::abs(d);
        q.col(i) *= mag > 0.0 ? d / mag : Complex(1, 0);
    }
    return q;
}

DensityMatrix random_density_matrix(int dim, std::mt19937_64& rng) {
    if (dim < 1) throw std::invalid_argument("random_density_matrix: dim must be >= 1");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    RealVector spectrum(dim);
    for (int i = 0; i < dim; ++i) {
        double u = uniform(rng);
        while (u <= 0.0) u = uniform(rng);
        spectrum[i] = -std::log(u);  // Exp(1) draws normalize to Dirichlet(1)
    }
    spectrum /= spectrum.sum();
    const Matrix basis = haar_unitary(dim, rng);
    Matrix rho = basis * spectrum.asDiagonal().toDenseMatrix().cast<Complex>() * basis.adjoint();
    return DensityMatrix(std::move(rho));
}

HermitianOperator random_hermitian(int dim, std::mt19937_64& rng, double scale) {
    if (dim < 1) throw std::invalid_argument("random_hermitian: dim must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) {
            g(r, c) = Complex(normal(rng), normal(rng));
        }
    }
    Matrix h = 0.5 * scale * (g + g.adjoint().eval());
    return HermitianOperator(std::move(h));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 step over base xor golden-ratio-scaled index
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace qtm
