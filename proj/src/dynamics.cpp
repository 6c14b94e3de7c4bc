#include "qtm/dynamics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace qtm {

namespace {

using SparseCd = Eigen::SparseMatrix<Complex>;
using SparseD = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<Complex>;

constexpr double kBlockDelta = 1e-10;   // state change per convergence block
constexpr double kResidualTol = 1e-8;   // generator residual at the fixed point
constexpr long kExplicitStepCap = 2000000;
constexpr int kImplicitIterCap = 400;
constexpr int kImplicitMaxDim = 448;

SparseCd to_sparse(const Matrix& m) {
    return m.sparseView();
}

// Precompiled generator: rhs(rho) = -i[H,rho] + sum_p A_p rho B_p - (K rho + rho K)
// with sum_p B_p A_p = 2K, which preserves trace and Hermiticity.
struct CompiledGenerator {
    Eigen::Index dim = 0;
    bool has_h = false;
    bool h_sparse_ok = false;
    Matrix h_dense;
    SparseCd h_sparse;
    std::vector<std::pair<SparseCd, SparseCd>> pairs;
    SparseCd damping;
    Matrix damping_dense;
    double damping_top = 0.0;  // largest eigenvalue of K

    void set_hamiltonian(const Matrix& h) {
        has_h = max_abs(h) > 0.0;
        if (!has_h) return;
        h_dense = h;
        const Eigen::Index nnz = (h.cwiseAbs().array() > 0.0).count();
        h_sparse_ok = dim >= 8 && nnz * 10 <= 3 * dim * dim;
        if (h_sparse_ok) h_sparse = to_sparse(h);
    }

    void rhs(const Matrix& rho, Matrix& out, Matrix& tmp) const {
        if (has_h) {
            if (h_sparse_ok) {
                tmp.noalias() = h_sparse * rho;
                tmp.noalias() -= rho * h_sparse;
            } else {
                tmp.noalias() = h_dense * rho;
                tmp.noalias() -= rho * h_dense;
            }
            out = Complex(0, -1) * tmp;
        } else {
            out.setZero(rho.rows(), rho.cols());
        }
        for (const auto& [a, b] : pairs) {
            tmp.noalias() = rho * b;
            out.noalias() += a * tmp;
        }
        tmp.noalias() = damping * rho;
        out -= tmp;
        tmp.noalias() = rho * damping;
        out -= tmp;
    }

    Matrix rhs(const Matrix& rho) const {
        Matrix out, tmp;
        rhs(rho, out, tmp);
        return out;
    }
};

CompiledGenerator compile_channels(const std::vector<BathChannel>& channels, Eigen::Index dim) {
    CompiledGenerator gen;
    gen.dim = dim;
    Matrix damping = Matrix::Zero(dim, dim);
    for (const auto& channel : channels) {
        channel.validate(dim);
        if (channel.rate <= 0.0) continue;
        const Matrix& jump = channel.jump_operator;
        const Matrix jump_dag = jump.adjoint();
        const double rate = channel.rate;
        const double n = channel.occupancy;
        const double r = channel.squeezing;
        double n_eff = n;
        double anomalous = 0.0;
        if (r > 0.0) {
            n_eff = n * std::cosh(2.0 * r) + std::sinh(r) * std::sinh(r);
            anomalous = -(n + 0.5) * std::sinh(2.0 * r);
        }
        const double down = rate * (n_eff + 1.0);
        gen.pairs.emplace_back(to_sparse(Matrix(down * jump)), to_sparse(jump_dag));
        damping += 0.5 * down * (jump_dag * jump);
        if (n_eff > 0.0) {
            const double up = rate * n_eff;
            gen.pairs.emplace_back(to_sparse(Matrix(up * jump_dag)), to_sparse(jump));
            damping += 0.5 * up * (jump * jump_dag);
        }
        if (anomalous != 0.0) {
            const double m = rate * anomalous;
            gen.pairs.emplace_back(to_sparse(Matrix(-m * jump_dag)), to_sparse(jump_dag));
            gen.pairs.emplace_back(to_sparse(Matrix(-m * jump)), to_sparse(jump));
            damping -= 0.5 * m * (jump_dag * jump_dag + jump * jump);
        }
    }
    gen.damping_dense = damping;
    gen.damping = to_sparse(damping);
    if (max_abs(damping) > 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(damping, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("dynamics: damping spectrum failed to converge");
        }
        gen.damping_top = solver.eigenvalues().maxCoeff();
    }
    return gen;
}

double spectral_spread(const Matrix& h) {
    if (max_abs(h) == 0.0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("dynamics: Hamiltonian spectrum failed to converge");
    }
    return solver.eigenvalues().maxCoeff() - solver.eigenvalues().minCoeff();
}

// Magnitude scale of the stiffest generator mode, for step-size choices.
double generator_scale(const CompiledGenerator& gen, const Matrix& h) {
    return std::max(2.0 * gen.damping_top + spectral_spread(h), 1e-300);
}

struct Rk4Workspace {
    Matrix k1, k2, k3, k4, scratch, tmp;
};

void rk4_step(const CompiledGenerator& gen_start, const CompiledGenerator& gen_mid,
              const CompiledGenerator& gen_end, Matrix& rho, double dt, Rk4Workspace& ws) {
    gen_start.rhs(rho, ws.k1, ws.tmp);
    ws.scratch = rho + (0.5 * dt) * ws.k1;
    gen_mid.rhs(ws.scratch, ws.k2, ws.tmp);
    ws.scratch = rho + (0.5 * dt) * ws.k2;
    gen_mid.rhs(ws.scratch, ws.k3, ws.tmp);
    ws.scratch = rho + dt * ws.k3;
    gen_end.rhs(ws.scratch, ws.k4, ws.tmp);
    rho += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

// --- implicit steady-state machinery -------------------------------------

// Column-major vec: vec(A rho B) = (B^T kron A) vec(rho).
void append_kron(std::vector<Triplet>& triplets, const SparseCd& b_transposed_factor,
                 const SparseCd& a, Complex scale) {
    for (int bo = 0; bo < b_transposed_factor.outerSize(); ++bo) {
        for (SparseCd::InnerIterator bit(b_transposed_factor, bo); bit; ++bit) {
            // entry B(l, c) lands at block row c, block col l
            const Eigen::Index block_row = bit.col();
            const Eigen::Index block_col = bit.row();
            const Complex bval = scale * bit.value();
            for (int ao = 0; ao < a.outerSize(); ++ao) {
                for (SparseCd::InnerIterator ait(a, ao); ait; ++ait) {
                    triplets.emplace_back(block_row * a.rows() + ait.row(),
                                          block_col * a.rows() + ait.col(), bval * ait.value());
                }
            }
        }
    }
}

void append_left_mult(std::vector<Triplet>& triplets, const SparseCd& op, Eigen::Index dim,
                      Complex scale) {
    // vec(Op rho): block-diagonal copies of Op
    for (Eigen::Index block = 0; block < dim; ++block) {
        for (int o = 0; o < op.outerSize(); ++o) {
            for (SparseCd::InnerIterator it(op, o); it; ++it) {
                triplets.emplace_back(block * dim + it.row(), block * dim + it.col(),
                                      scale * it.value());
            }
        }
    }
}

void append_right_mult(std::vector<Triplet>& triplets, const SparseCd& op, Eigen::Index dim,
                       Complex scale) {
    // vec(rho Op): entry Op(l, c) couples column block l to row block c
    for (int o = 0; o < op.outerSize(); ++o) {
        for (SparseCd::InnerIterator it(op, o); it; ++it) {
            for (Eigen::Index r = 0; r < dim; ++r) {
                triplets.emplace_back(it.col() * dim + r, it.row() * dim + r, scale * it.value());
            }
        }
    }
}

std::vector<Triplet> build_superoperator(const CompiledGenerator& gen) {
    const Eigen::Index dim = gen.dim;
    std::vector<Triplet> triplets;
    if (gen.has_h) {
        const SparseCd h = to_sparse(gen.h_dense);
        append_left_mult(triplets, h, dim, Complex(0, -1));
        append_right_mult(triplets, h, dim, Complex(0, 1));
    }
    for (const auto& [a, b] : gen.pairs) append_kron(triplets, b, a, Complex(1, 0));
    append_left_mult(triplets, gen.damping, dim, Complex(-1, 0));
    append_right_mult(triplets, gen.damping, dim, Complex(-1, 0));
    return triplets;
}

bool all_real(const std::vector<Triplet>& triplets) {
    for (const auto& t : triplets) {
        if (t.value().imag() != 0.0) return false;
    }
    return true;
}

// Backward-Euler stepping x_{k+1} = (I - h L)^{-1} x_k on the vectorized
// state. Trace is preserved exactly by each implicit step.
template <typename Scalar>
Eigen::VectorXcd implicit_iterate(const std::vector<Eigen::Triplet<Scalar>>& triplets,
                                  Eigen::Index vec_dim, double step, Eigen::VectorXcd start) {
    Eigen::SparseMatrix<Scalar> system(vec_dim, vec_dim);
    {
        std::vector<Eigen::Triplet<Scalar>> scaled;
        scaled.reserve(triplets.size() + vec_dim);
        for (const auto& t : triplets) {
            scaled.emplace_back(t.row(), t.col(), Scalar(-step) * t.value());
        }
        for (Eigen::Index i = 0; i < vec_dim; ++i) scaled.emplace_back(i, i, Scalar(1));
        system.setFromTriplets(scaled.begin(), scaled.end());
    }
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> solver;
    solver.compute(system);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("steady_state: sparse factorization of the implicit system failed");
    }
    using SolveVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    SolveVector x;
    if constexpr (std::is_same_v<Scalar, double>) {
        x = start.real();
    } else {
        x = start;
    }
    double delta = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kImplicitIterCap; ++iter) {
        SolveVector next = solver.solve(x);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("steady_state: implicit solve failed");
        }
        delta = (next - x).norm();
        x = next;
        if (iter >= 1 && delta <= kBlockDelta) break;
    }
    if (delta > kBlockDelta) {
        throw NumericalError("steady_state: implicit stepping did not converge within step cap");
    }
    if constexpr (std::is_same_v<Scalar, double>) {
        return x.template cast<Complex>();
    } else {
        return x;
    }
}

// Detects generators that map diagonal states to diagonal states (thermal
// birth-death structure). The stepping then acts on the d populations only,
// which is exact because the maximally mixed start is diagonal.
bool diagonal_sector_closed(const CompiledGenerator& gen) {
    if (gen.has_h) {
        const Eigen::Index offdiag =
            (gen.h_dense.cwiseAbs().array() > 0.0).count() -
            (gen.h_dense.diagonal().cwiseAbs().array() > 0.0).count();
        if (offdiag != 0) return false;
    }
    Matrix damping_offdiag = gen.damping_dense;
    damping_offdiag.diagonal().setZero();
    if (max_abs(damping_offdiag) > 0.0) return false;
    for (const auto& [a, b] : gen.pairs) {
        for (Eigen::Index k = 0; k < gen.dim; ++k) {
            int a_row = -1;
            for (SparseCd::InnerIterator it(a, k); it; ++it) {
                if (a_row >= 0) return false;
                a_row = int(it.row());
            }
            // column k of B^T is row k of B
            int b_col = -1;
            for (int o = 0; o < b.outerSize(); ++o) {
                for (SparseCd::InnerIterator it(b, o); it; ++it) {
                    if (it.row() == k) {
                        if (b_col >= 0) return false;
                        b_col = int(it.col());
                    }
                }
            }
            if (a_row >= 0 && b_col >= 0 && a_row != b_col) return false;
        }
    }
    return true;
}

Eigen::VectorXd diagonal_steady_populations(const CompiledGenerator& gen) {
    const Eigen::Index dim = gen.dim;
    // population rate matrix: G(m,k) = sum_p A_p(m,k) B_p(k,m) - 2 K(m,m) delta_mk
    Matrix g = Matrix::Zero(dim, dim);
    for (const auto& [a, b] : gen.pairs) {
        const Matrix ad(a);
        const Matrix bd(b);
        for (Eigen::Index k = 0; k < dim; ++k) {
            for (Eigen::Index m = 0; m < dim; ++m) {
                g(m, k) += ad(m, k) * bd(k, m);
            }
        }
    }
    for (Eigen::Index m = 0; m < dim; ++m) g(m, m) -= 2.0 * gen.damping_dense(m, m);
    if (max_abs(Matrix(g.imag().cast<Complex>())) > 0.0) {
        throw NumericalError("steady_state: diagonal-sector generator unexpectedly complex");
    }
    const Eigen::MatrixXd gr = g.real();
    const double scale = std::max(gr.cwiseAbs().maxCoeff(), 1e-300);
    const double step = 1e5 / scale;
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(dim, dim) - step * gr;
    Eigen::PartialPivLU<Eigen::MatrixXd> solver(system);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(dim, 1.0 / double(dim));
    double delta = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kImplicitIterCap; ++iter) {
        Eigen::VectorXd next = solver.solve(p);
        delta = (next - p).norm();
        p = next;
        if (iter >= 1 && delta <= kBlockDelta) break;
    }
    if (delta > kBlockDelta) {
        throw NumericalError("steady_state: population stepping did not converge");
    }
    return p;
}

DensityMatrix finish_steady_state(const CompiledGenerator& gen, const Matrix& candidate) {
    Matrix sym = 0.5 * (candidate + candidate.adjoint().eval());
    const double trace = sym.trace().real();
    if (!(trace > 0.0)) throw NumericalError("steady_state: candidate has non-positive trace");
    sym /= trace;
    const double residual = frobenius_norm(gen.rhs(sym));
    if (residual > kResidualTol) {
        throw NumericalError("steady_state: fixed-point residual " + std::to_string(residual) +
                             " exceeds tolerance");
    }
    return DensityMatrix::clamped(sym, 1e-6);
}

DensityMatrix steady_state_explicit(const CompiledGenerator& gen_in, const Matrix& h) {
    CompiledGenerator gen = gen_in;
    gen.set_hamiltonian(h);
    const Eigen::Index dim = gen.dim;
    const double dt = 2.0 / generator_scale(gen, h);
    Matrix rho = Matrix::Identity(dim, dim) / double(dim);
    Rk4Workspace ws;
    const long block = 256;
    Matrix previous;
    for (long done = 0; done < kExplicitStepCap; done += block) {
        previous = rho;
        for (long s = 0; s < block; ++s) rk4_step(gen, gen, gen, rho, dt, ws);
        if (!rho.allFinite()) {
            throw NumericalError("steady_state: explicit propagation diverged");
        }
        const double delta = frobenius_norm(rho - previous);
        if (delta <= kBlockDelta &&
            frobenius_norm(gen.rhs(rho)) <= kResidualTol) {
            return finish_steady_state(gen, rho);
        }
    }
    throw NumericalError("steady_state: no convergence within the explicit step cap");
}

DensityMatrix steady_state_implicit(const CompiledGenerator& gen_in, const Matrix& h) {
    CompiledGenerator gen = gen_in;
    gen.set_hamiltonian(h);
    const Eigen::Index dim = gen.dim;
    if (diagonal_sector_closed(gen)) {
        const Eigen::VectorXd populations = diagonal_steady_populations(gen);
        Matrix rho = Matrix::Zero(dim, dim);
        rho.diagonal() = populations.cast<Complex>();
        return finish_steady_state(gen, rho);
    }
    if (dim > kImplicitMaxDim) {
        throw NumericalError("steady_state: dimension too large for the implicit path");
    }
    const std::vector<Triplet> triplets = build_superoperator(gen);
    if (triplets.size() > size_t(4e7)) {
        throw NumericalError("steady_state: superoperator too dense for the implicit path");
    }
    const double step = 1e5 / generator_scale(gen, h);
    const Eigen::Index vec_dim = dim * dim;
    Eigen::VectorXcd start = Eigen::VectorXcd::Zero(vec_dim);
    for (Eigen::Index i = 0; i < dim; ++i) start[i * dim + i] = Complex(1.0 / double(dim), 0);
    Eigen::VectorXcd x;
    if (all_real(triplets)) {
        std::vector<Eigen::Triplet<double>> real_triplets;
        real_triplets.reserve(triplets.size());
        for (const auto& t : triplets) {
            real_triplets.emplace_back(t.row(), t.col(), t.value().real());
        }
        x = implicit_iterate<double>(real_triplets, vec_dim, step, start);
    } else {
        x = implicit_iterate<Complex>(triplets, vec_dim, step, start);
    }
    const Matrix rho = Eigen::Map<const Matrix>(x.data(), dim, dim);
    return finish_steady_state(gen, rho);
}

} // namespace

void BathChannel::validate(Eigen::Index dim) const {
    if (jump_operator.rows() != dim || jump_operator.cols() != dim) {
        throw std::invalid_argument("BathChannel: jump operator dimension mismatch");
    }
    if (rate < 0.0) throw std::invalid_argument("BathChannel: rate must be >= 0");
    if (occupancy < 0.0) throw std::invalid_argument("BathChannel: occupancy must be >= 0");
    if (squeezing < 0.0) throw std::invalid_argument("BathChannel: squeezing must be >= 0");
    if (temperature < 0.0) throw std::invalid_argument("BathChannel: temperature must be >= 0");
}

HamiltonianSchedule::HamiltonianSchedule(std::function<HermitianOperator(double)> evaluator,
                                         std::optional<double> period)
    : evaluator_(std::move(evaluator)), period_(period) {
    if (!evaluator_) throw std::invalid_argument("HamiltonianSchedule: empty evaluator");
    dim_ = evaluator_(0.0).dim();
    if (period_) {
        if (!(*period_ > 0.0)) {
            throw std::invalid_argument("HamiltonianSchedule: period must be positive");
        }
        for (const double t : {0.0, 0.37 * *period_}) {
            const Matrix a = evaluator_(t).matrix();
            const Matrix b = evaluator_(t + *period_).matrix();
            if (max_abs(a - b) > 1e-12) {
                throw std::invalid_argument("HamiltonianSchedule: evaluator violates declared period");
            }
        }
    }
}

HamiltonianSchedule HamiltonianSchedule::constant(HermitianOperator h) {
    HamiltonianSchedule schedule([h](double) { return h; });
    schedule.constant_ = true;
    return schedule;
}

Matrix lindblad_rhs(const DensityMatrix& rho, const HermitianOperator& hamiltonian,
                    const std::vector<BathChannel>& channels) {
    if (rho.dim() != hamiltonian.dim()) {
        throw std::invalid_argument("lindblad_rhs: state and Hamiltonian dimensions differ");
    }
    CompiledGenerator gen = compile_channels(channels, rho.dim());
    gen.set_hamiltonian(hamiltonian.matrix());
    return gen.rhs(rho.matrix());
}

Trajectory evolve(const DensityMatrix& rho0, const HamiltonianSchedule& schedule,
                  const std::vector<BathChannel>& channels, double t_end, double dt, int stride) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("evolve: t_end must be positive");
    if (stride < 1) throw std::invalid_argument("evolve: stride must be >= 1");
    if (rho0.dim() != schedule.dim()) {
        throw std::invalid_argument("evolve: state and schedule dimensions differ");
    }
    const Eigen::Index dim = rho0.dim();
    const long n_steps = std::max(1L, long(std::ceil(t_end / dt - 1e-9)));
    const double h = t_end / double(n_steps);

    CompiledGenerator gen = compile_channels(channels, dim);
    CompiledGenerator gen_mid = gen;
    CompiledGenerator gen_end = gen;
    const bool constant = schedule.constant_in_time();
    if (constant) {
        const Matrix h0 = schedule(0.0).matrix();
        gen.set_hamiltonian(h0);
        gen_mid = gen;
        gen_end = gen;
    }

    Trajectory traj;
    traj.times.reserve(size_t(n_steps / stride) + 2);

    Matrix rho = rho0.matrix();
    Rk4Workspace ws;

    auto store = [&](double t, const Matrix& raw) {
        traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(raw.trace().real() - 1.0));
        traj.max_hermiticity_drift =
            std::max(traj.max_hermiticity_drift, max_abs(raw - raw.adjoint().eval()));
        double violation = 0.0;
        DensityMatrix state = DensityMatrix::clamped(raw, 1e-6, &violation);
        traj.max_positivity_violation = std::max(traj.max_positivity_violation, violation);
        traj.times.push_back(t);
        traj.states.push_back(std::move(state));
        traj.hamiltonians.push_back(schedule(t));
    };

    store(0.0, rho);
    for (long k = 0; k < n_steps; ++k) {
        const double t = double(k) * h;
        if (!constant) {
            gen.set_hamiltonian(schedule(t).matrix());
            gen_mid.set_hamiltonian(schedule(t + 0.5 * h).matrix());
            gen_end.set_hamiltonian(schedule(t + h).matrix());
        }
        rk4_step(gen, gen_mid, gen_end, rho, h, ws);
        if (!rho.allFinite()) {
            throw NumericalError("evolve: state diverged; reduce dt");
        }
        if ((k + 1) % stride == 0 || k + 1 == n_steps) {
            store(double(k + 1) * h, rho);
        }
    }
    return traj;
}

Trajectory evolve(const EvolutionSpec& spec) {
    return evolve(spec.initial, spec.schedule, spec.channels, spec.t_end, spec.dt, spec.stride);
}

DensityMatrix steady_state(const HermitianOperator& hamiltonian,
                           const std::vector<BathChannel>& channels, SteadyStateMethod method) {
    bool any_active = false;
    for (const auto& channel : channels) any_active = any_active || channel.rate > 0.0;
    if (!any_active) {
        throw std::invalid_argument("steady_state: needs at least one channel with rate > 0");
    }
    const Eigen::Index dim = hamiltonian.dim();
    CompiledGenerator gen = compile_channels(channels, dim);
    if (method == SteadyStateMethod::automatic) {
        method = dim <= 16 ? SteadyStateMethod::explicit_rk4 : SteadyStateMethod::implicit_euler;
    }
    if (method == SteadyStateMethod::explicit_rk4) {
        return steady_state_explicit(gen, hamiltonian.matrix());
    }
    return steady_state_implicit(gen, hamiltonian.matrix());
}

} // namespace qtm
