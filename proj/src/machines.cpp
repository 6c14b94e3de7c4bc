#include "qtm/machines.hpp"

#include <cmath>

namespace qtm {

namespace {

constexpr double kTailTol = 1e-8;
constexpr double kIdleTol = 1e-14;
// Largest bath-contact dimension the dense steady-state solver handles on a
// desk-scale box. Strong squeezing (r >~ 1.3 at these occupancies) would need
// 700..2000 Fock levels to push the truncation tail below 1e-8, which is out
// of reach for dense numerics; contacts then run at this ceiling and are
// accepted only if the mean-quanta truncation defect stays below
// kQuantaDefectTol.
constexpr int kContactDimCeiling = 448;
constexpr double kQuantaDefectTol = 0.05;

double top_two_populations(const DensityMatrix& rho) {
    const Eigen::Index dim = rho.dim();
    return rho.matrix()(dim - 1, dim - 1).real() + rho.matrix()(dim - 2, dim - 2).real();
}

DensityMatrix oscillator_contact_state(double omega, const BathChannel& channel, int dim) {
    const HermitianOperator frame(Matrix::Zero(dim, dim));
    (void)omega;
    return steady_state(frame, {channel});
}

Matrix build_squeezed_thermal(double omega, double temperature, double squeezing, int dim) {
    const FockSpace fock = fock_space(dim);
    Matrix thermal;
    if (temperature > 0.0) {
        thermal = gibbs_state(HermitianOperator(omega * fock.number.matrix()), temperature).matrix();
    } else {
        thermal = Matrix::Zero(dim, dim);
        thermal(0, 0) = Complex(1, 0);
    }
    if (squeezing == 0.0) return thermal;
    const Matrix& a = fock.annihilation;
    const Matrix generator = 0.5 * squeezing * (a * a - (a * a).adjoint().eval());
    const Matrix squeeze = expm_antihermitian(generator);
    Matrix rho = squeeze * thermal * squeeze.adjoint();
    rho = 0.5 * (rho + rho.adjoint().eval());
    rho /= rho.trace().real();
    return rho;
}

double top_two_populations(const Matrix& rho) {
    const Eigen::Index dim = rho.rows();
    return rho(dim - 1, dim - 1).real() + rho(dim - 2, dim - 2).real();
}

// Asymptotic per-level decay of the squeezed thermal Fock populations is set
// by the anti-squeezed quadrature variance V = (n+1/2) e^{2r}:
// p_{m+1}/p_m -> (V - 1/2)/(V + 1/2).
double tail_level_estimate(double occupancy, double squeezing, double tail_tol) {
    const double v_big = (occupancy + 0.5) * std::exp(2.0 * squeezing);
    if (v_big <= 0.5 + 1e-12) return 4.0;
    const double ratio = (v_big - 0.5) / (v_big + 0.5);
    return std::log(1.0 / tail_tol) / (-std::log(ratio));
}

} // namespace

double bose_occupancy(double omega, double temperature) {
    if (!(omega > 0.0)) throw std::invalid_argument("bose_occupancy: omega must be positive");
    if (temperature < 0.0) throw std::invalid_argument("bose_occupancy: temperature must be >= 0");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(omega / temperature);
}

double critical_modulation(double omega0, double t_hot, double t_cold) {
    if (!(omega0 > 0.0)) throw std::invalid_argument("critical_modulation: omega0 must be positive");
    if (!(t_hot >= t_cold) || !(t_cold > 0.0)) {
        throw std::invalid_argument("critical_modulation: need T_H >= T_C > 0");
    }
    return omega0 * (t_hot - t_cold) / (t_hot + t_cold);
}

double carnot_efficiency(double t_cold, double t_hot) {
    return 1.0 - t_cold / t_hot;
}

double carnot_cop(double t_cold, double t_hot) {
    return t_cold / (t_hot - t_cold);
}

const char* regime_name(Regime regime) {
    switch (regime) {
        case Regime::engine: return "engine";
        case Regime::refrigerator: return "refrigerator";
        case Regime::idle: return "idle";
    }
    return "unknown";
}

void MinimalMachineParams::validate() const {
    if (!(omega0 > 0.0)) throw std::invalid_argument("minimal machine: omega0 must be positive");
    if (!(delta > 0.0) || !(delta < omega0)) {
        throw std::invalid_argument("minimal machine: need 0 < delta < omega0");
    }
    if (!(gamma_hot > 0.0) || !(gamma_cold > 0.0)) {
        throw std::invalid_argument("minimal machine: coupling rates must be positive");
    }
    if (!(t_hot > t_cold) || !(t_cold > 0.0)) {
        throw std::invalid_argument("minimal machine: need T_H > T_C > 0");
    }
}

SteadyStateReport minimal_machine_steady_state(const MinimalMachineParams& params) {
    params.validate();
    SteadyStateReport report;
    const double n_hot = bose_occupancy(params.omega0 + params.delta, params.t_hot);
    const double n_cold = bose_occupancy(params.omega0 - params.delta, params.t_cold);
    report.occupancy_hot = n_hot;
    report.occupancy_cold = n_cold;

    const double up = params.gamma_hot * n_hot + params.gamma_cold * n_cold;
    const double down = params.gamma_hot * (n_hot + 1.0) + params.gamma_cold * (n_cold + 1.0);
    const double p = up / (up + down);
    report.p_excited = p;

    const double flux = params.gamma_hot * (n_hot * (1.0 - p) - (n_hot + 1.0) * p);
    report.flux_hot = flux;
    report.current_hot = (params.omega0 + params.delta) * flux;
    report.current_cold = -(params.omega0 - params.delta) * flux;
    report.power = -2.0 * params.delta * flux;
    report.carnot = carnot_efficiency(params.t_cold, params.t_hot);
    report.carnot_cop = carnot_cop(params.t_cold, params.t_hot);

    if (std::abs(n_hot - n_cold) <= kIdleTol) {
        report.regime = Regime::idle;
        // limiting values on approach to the critical modulation
        report.efficiency = 2.0 * params.delta / (params.omega0 + params.delta);
        report.cop = (params.omega0 - params.delta) / (2.0 * params.delta);
    } else if (n_hot > n_cold) {
        report.regime = Regime::engine;
        report.efficiency = -report.power / report.current_hot;
    } else {
        report.regime = Regime::refrigerator;
        report.cop = report.current_cold / report.power;
    }
    return report;
}

DensityMatrix squeezed_thermal_state(double omega, double temperature, double squeezing, int dim) {
    if (!(omega > 0.0)) throw std::invalid_argument("squeezed_thermal_state: omega must be positive");
    if (temperature < 0.0) {
        throw std::invalid_argument("squeezed_thermal_state: temperature must be >= 0");
    }
    if (squeezing < 0.0) {
        throw std::invalid_argument("squeezed_thermal_state: squeezing must be >= 0");
    }
    if (dim < 2) throw std::invalid_argument("squeezed_thermal_state: dim must be >= 2");

    DensityMatrix state(build_squeezed_thermal(omega, temperature, squeezing, dim));
    if (top_two_populations(state) > kTailTol) {
        throw NumericalError("squeezed_thermal_state: truncation tail above 1e-8; increase dim");
    }
    return state;
}

int recommended_fock_dim(double omega, double temperature, double squeezing, double tail_tol) {
    if (!(tail_tol > 0.0)) throw std::invalid_argument("recommended_fock_dim: tail_tol must be positive");
    const double occupancy = bose_occupancy(omega, temperature);
    const double level_estimate = tail_level_estimate(occupancy, squeezing, tail_tol);
    if (level_estimate > 1.35 * kContactDimCeiling) {
        throw NumericalError("recommended_fock_dim: tail rule needs about " +
                             std::to_string(int(level_estimate)) +
                             " levels, beyond the supported contact dimension " +
                             std::to_string(kContactDimCeiling));
    }
    int scan_dim = std::min(kContactDimCeiling, std::max(16, int(1.18 * level_estimate) + 24));
    while (true) {
        const Matrix rho = build_squeezed_thermal(omega, temperature, squeezing, scan_dim);
        if (top_two_populations(rho) < tail_tol) {
            int smallest = scan_dim;
            for (int d = 4; d < scan_dim; ++d) {
                if (rho(d - 1, d - 1).real() + rho(d - 2, d - 2).real() < 0.5 * tail_tol) {
                    smallest = d;
                    break;
                }
            }
            const int candidate = std::min(scan_dim, smallest + 4);
            if (candidate < scan_dim) {
                const Matrix probe =
                    build_squeezed_thermal(omega, temperature, squeezing, candidate);
                if (top_two_populations(probe) < tail_tol) return candidate;
            }
            return scan_dim;
        }
        if (scan_dim >= kContactDimCeiling) {
            throw NumericalError("recommended_fock_dim: tail rule unsatisfiable within dimension " +
                                 std::to_string(kContactDimCeiling));
        }
        scan_dim = std::min(kContactDimCeiling, scan_dim * 13 / 10 + 8);
    }
}

void OttoParams::validate() const {
    if (!(omega_cold > 0.0) || !(omega_hot > omega_cold)) {
        throw std::invalid_argument("otto_cycle: need 0 < omega_cold < omega_hot");
    }
    if (!(t_hot > t_cold) || !(t_cold > 0.0)) {
        throw std::invalid_argument("otto_cycle: need T_H > T_C > 0");
    }
    if (squeezing < 0.0) throw std::invalid_argument("otto_cycle: squeezing must be >= 0");
    if (fock_dim != 0 && fock_dim < 2) {
        throw std::invalid_argument("otto_cycle: fock_dim must be >= 2 (or 0 for automatic)");
    }
}

CycleReport otto_cycle(const OttoParams& params) {
    params.validate();
    int dim = params.fock_dim;
    if (dim == 0) {
        try {
            dim = recommended_fock_dim(params.omega_hot, params.t_hot, params.squeezing);
        } catch (const NumericalError&) {
            dim = kContactDimCeiling;  // accepted below only if the quanta defect is small
        }
        dim = std::max(dim, recommended_fock_dim(params.omega_cold, params.t_cold, 0.0));
    }
    const FockSpace fock = fock_space(dim);
    const Matrix number = fock.number.matrix();

    const double n_cold = bose_occupancy(params.omega_cold, params.t_cold);
    const double n_hot = bose_occupancy(params.omega_hot, params.t_hot);
    const double contact_rate = 1.0;  // efficiency is rate-independent at full equilibration

    BathChannel cold{fock.annihilation, contact_rate, params.t_cold, n_cold, 0.0};
    BathChannel hot{fock.annihilation, contact_rate, params.t_hot, n_hot, params.squeezing};

    const DensityMatrix state_cold = oscillator_contact_state(params.omega_cold, cold, dim);
    const DensityMatrix state_hot = oscillator_contact_state(params.omega_hot, hot, dim);

    const double quanta_cold = (state_cold.matrix() * number).trace().real();
    const double quanta_hot = (state_hot.matrix() * number).trace().real();

    const double tail = top_two_populations(state_hot);
    const double quanta_exact =
        n_hot * std::cosh(2.0 * params.squeezing) +
        std::sinh(params.squeezing) * std::sinh(params.squeezing);
    const double quanta_defect = std::abs(quanta_hot - quanta_exact) / std::max(quanta_exact, 1e-12);
    if (tail > kTailTol && quanta_defect > kQuantaDefectTol) {
        throw NumericalError("otto_cycle: hot-contact truncation too coarse; increase fock_dim");
    }

    CycleReport report;
    report.fock_dim = dim;
    report.hot_tail = tail;
    report.quanta_defect = quanta_defect;
    report.carnot = carnot_efficiency(params.t_cold, params.t_hot);
    // (i) compression at frozen populations, (ii) hot contact at omega_hot,
    // (iii) expansion at frozen populations, (iv) cold contact at omega_cold
    report.work_compression = (params.omega_hot - params.omega_cold) * quanta_cold;
    report.exchange_hot = params.omega_hot * (quanta_hot - quanta_cold);
    report.work_expansion = (params.omega_cold - params.omega_hot) * quanta_hot;
    report.exchange_cold = params.omega_cold * (quanta_cold - quanta_hot);
    report.net_work = report.work_compression + report.work_expansion;

    if (params.squeezing > 0.0) {
        BathChannel hot_thermal = hot;
        hot_thermal.squeezing = 0.0;
        const DensityMatrix thermal_hot =
            oscillator_contact_state(params.omega_hot, hot_thermal, dim);
        const double quanta_thermal = (thermal_hot.matrix() * number).trace().real();
        report.counterfactual_heat = params.omega_hot * (quanta_thermal - quanta_cold);
    } else {
        report.counterfactual_heat = report.exchange_hot;
    }

    report.engine = report.net_work < 0.0;
    if (report.exchange_hot > 0.0) {
        report.eta_max = efficiency_bound(report.counterfactual_heat, report.exchange_hot,
                                          params.t_cold, params.t_hot);
        if (report.engine) report.eta = -report.net_work / report.exchange_hot;
    }
    return report;
}

double efficiency_bound(double exchange_prime, double exchange, double t_cold, double t_hot) {
    if (!(exchange > 0.0)) {
        throw std::invalid_argument("efficiency_bound: exchange must be positive");
    }
    if (!(t_cold > 0.0) || !(t_hot > t_cold)) {
        throw std::invalid_argument("efficiency_bound: need 0 < T_C < T_H");
    }
    return std::min(1.0, 1.0 - (t_cold / t_hot) * (exchange_prime / exchange));
}

} // namespace qtm
