#include "qtm/ledger.hpp"

#include <cmath>

#include "qtm/format.hpp"
#include "qtm/passivity.hpp"

namespace qtm {

namespace {

// Tr[A B] for same-sized square matrices, O(d^2).
double trace_product(const Matrix& a, const Matrix& b) {
    return a.cwiseProduct(b.transpose()).sum().real();
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& times,
                                         const std::vector<double>& integrand) {
    std::vector<double> result(times.size(), 0.0);
    for (size_t k = 1; k < times.size(); ++k) {
        result[k] = result[k - 1] +
                    0.5 * (integrand[k - 1] + integrand[k]) * (times[k] - times[k - 1]);
    }
    return result;
}

double entropy_from_values(const RealVector& values) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] > 1e-14) s -= values[i] * std::log(values[i]);
    }
    return s;
}

} // namespace

double EnergyLedger::direct_residual() const {
    double worst = 0.0;
    for (size_t i = 0; i < exchange.size(); ++i) {
        worst = std::max(worst, std::abs(exchange_direct[i] - exchange[i]));
    }
    return worst;
}

EnergyLedger build_ledger(const Trajectory& trajectory) {
    const size_t n = trajectory.times.size();
    if (n < 3) throw std::invalid_argument("build_ledger: need at least 3 samples");
    if (trajectory.states.size() != n || trajectory.hamiltonians.size() != n) {
        throw std::invalid_argument("build_ledger: trajectory series lengths differ");
    }
    for (size_t i = 1; i < n; ++i) {
        if (!(trajectory.times[i] > trajectory.times[i - 1])) {
            throw std::invalid_argument("build_ledger: times must be strictly increasing");
        }
    }

    EnergyLedger ledger;
    ledger.times = trajectory.times;
    ledger.energy.resize(n);
    ledger.entropy.resize(n);

    // Passive counterparts per sample; the H eigenbasis is cached across
    // samples with identical Hamiltonians (the common constant-H case).
    std::vector<Matrix> passive(n);
    EigenSystem h_basis;
    const Matrix* cached_h = nullptr;
    for (size_t i = 0; i < n; ++i) {
        const Matrix& h = trajectory.hamiltonians[i].matrix();
        if (cached_h == nullptr || max_abs(h - *cached_h) > 0.0) {
            h_basis = eigh(h);
            cached_h = &h;
        }
        const EigenSystem state = eigh(trajectory.states[i].matrix());
        const RealVector populations = passive_populations(state.values);
        passive[i] = h_basis.vectors *
                     populations.asDiagonal().toDenseMatrix().cast<Complex>() *
                     h_basis.vectors.adjoint();
        ledger.energy[i] = trace_product(trajectory.states[i].matrix(), h);
        ledger.entropy[i] = entropy_from_values(state.values);
    }

    std::vector<double> work_rate(n), heat_rate(n), exchange_rate(n);
    for (size_t i = 0; i < n; ++i) {
        const size_t lo = i == 0 ? 0 : i - 1;
        const size_t hi = i + 1 == n ? i : i + 1;
        const double span = trajectory.times[hi] - trajectory.times[lo];
        const Matrix dh = trajectory.hamiltonians[hi].matrix() - trajectory.hamiltonians[lo].matrix();
        const Matrix dpi = passive[hi] - passive[lo];
        const Matrix drho = trajectory.states[hi].matrix() - trajectory.states[lo].matrix();
        const Matrix& h = trajectory.hamiltonians[i].matrix();
        work_rate[i] = trace_product(trajectory.states[i].matrix(), dh) / span;
        heat_rate[i] = trace_product(dpi, h) / span;
        exchange_rate[i] = trace_product(drho, h) / span;
    }

    ledger.work = cumulative_trapezoid(ledger.times, work_rate);
    ledger.heat = cumulative_trapezoid(ledger.times, heat_rate);
    ledger.exchange_direct = cumulative_trapezoid(ledger.times, exchange_rate);
    ledger.exchange.resize(n);
    ledger.dissipated_ergotropy.resize(n);
    for (size_t i = 0; i < n; ++i) {
        ledger.exchange[i] = (ledger.energy[i] - ledger.energy[0]) - ledger.work[i];
        ledger.dissipated_ergotropy[i] = ledger.exchange[i] - ledger.heat[i];
    }
    return ledger;
}

InequalityReport check_inequalities(const EnergyLedger& ledger, double t_bath,
                                    std::optional<double> counterfactual_exchange) {
    if (!(t_bath > 0.0)) {
        throw std::invalid_argument("check_inequalities: bath temperature must be positive");
    }
    if (ledger.times.empty()) {
        throw std::invalid_argument("check_inequalities: empty ledger");
    }
    InequalityReport report;
    report.delta_S = ledger.entropy.back() - ledger.entropy.front();
    report.Q_over_T = ledger.heat.back() / t_bath;
    report.E_over_T = ledger.exchange.back() / t_bath;
    if (counterfactual_exchange) {
        report.E_prime_over_T = *counterfactual_exchange / t_bath;
        report.slack_tight = report.delta_S - *report.E_prime_over_T;
    } else {
        report.slack_tight = report.delta_S - report.Q_over_T;
    }
    report.slack_spohn = report.delta_S - report.E_over_T;
    return report;
}

double counterfactual_exchange(const EvolutionSpec& spec) {
    EvolutionSpec passive_spec = spec;
    passive_spec.initial = passive_state(spec.initial, spec.schedule(0.0)).passive_state;
    const Trajectory trajectory = evolve(passive_spec);
    const EnergyLedger ledger = build_ledger(trajectory);
    return ledger.exchange.back();
}

void write_ledger_csv(const EnergyLedger& ledger, std::ostream& out,
                      const std::vector<std::string>& comment_lines) {
    for (const auto& line : comment_lines) out << line << "\n";
    out << "t,E,W,exchange,heat,diss_ergotropy,entropy\n";
    for (size_t i = 0; i < ledger.times.size(); ++i) {
        out << format_number(ledger.times[i]) << ',' << format_number(ledger.energy[i]) << ','
            << format_number(ledger.work[i]) << ',' << format_number(ledger.exchange[i]) << ','
            << format_number(ledger.heat[i]) << ','
            << format_number(ledger.dissipated_ergotropy[i]) << ','
            << format_number(ledger.entropy[i]) << "\n";
    }
}

} // namespace qtm
