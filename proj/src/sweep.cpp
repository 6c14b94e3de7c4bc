#include "qtm/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "qtm/format.hpp"
#include "qtm/machines.hpp"
#include "qtm/passivity.hpp"
#include "qtm/sampling.hpp"

namespace qtm {

namespace {

using nlohmann::json;

const std::set<std::string> kScenarios = {"minimal-machine", "otto", "trajectory", "inequalities"};

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto drain = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double fixed_or(const SweepConfig& config, const std::string& name, double fallback) {
    const auto it = config.fixed.find(name);
    return it == config.fixed.end() ? fallback : it->second;
}

void require_known_names(const SweepConfig& config, const std::set<std::string>& grid_names,
                         const std::set<std::string>& fixed_names) {
    for (const auto& [name, spec] : config.grid) {
        (void)spec;
        if (!grid_names.count(name)) {
            throw ConfigError("scenario '" + config.scenario + "' does not sweep parameter '" +
                              name + "'");
        }
    }
    for (const auto& [name, value] : config.fixed) {
        (void)value;
        if (!fixed_names.count(name)) {
            throw ConfigError("scenario '" + config.scenario + "' has no parameter '" + name + "'");
        }
    }
    if (config.grid.size() > 1) {
        throw ConfigError("only one grid parameter is supported per sweep");
    }
}

GridSpec grid_or(const SweepConfig& config, const std::string& name, GridSpec fallback) {
    const auto it = config.grid.find(name);
    return it == config.grid.end() ? fallback : it->second;
}

json grid_to_json(const GridSpec& g) {
    return json{{"start", g.start}, {"stop", g.stop}, {"count", g.count}};
}

json base_resolved(const SweepConfig& config) {
    json j;
    j["scenario"] = config.scenario;
    j["format"] = config.format;
    j["seed"] = config.seed;
    j["workers"] = config.workers;
    return j;
}

Cell opt_cell(const std::optional<double>& v) {
    if (v) return Cell{*v};
    return Cell{};
}

} // namespace

std::vector<double> GridSpec::values() const {
    std::vector<double> out;
    out.reserve(size_t(count));
    if (count == 1) {
        out.push_back(start);
        return out;
    }
    for (int i = 0; i < count; ++i) {
        out.push_back(start + double(i) * (stop - start) / double(count - 1));
    }
    return out;
}

SweepConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    SweepConfig config;
    for (const auto& [key, value] : j.items()) {
        if (key == "scenario") {
            if (!value.is_string()) throw ConfigError("scenario must be a string");
            config.scenario = value.get<std::string>();
        } else if (key == "grid") {
            if (!value.is_object()) throw ConfigError("grid must be an object");
            for (const auto& [name, spec] : value.items()) {
                if (!spec.is_object()) throw ConfigError("grid entry '" + name + "' must be an object");
                GridSpec g;
                for (const auto& [k, v] : spec.items()) {
                    if (k == "start") g.start = v.get<double>();
                    else if (k == "stop") g.stop = v.get<double>();
                    else if (k == "count") g.count = v.get<int>();
                    else throw ConfigError("grid entry '" + name + "' has unknown key '" + k + "'");
                }
                if (g.count < 1) {
                    throw ConfigError("grid entry '" + name + "' must have count >= 1");
                }
                config.grid[name] = g;
            }
        } else if (key == "fixed") {
            if (!value.is_object()) throw ConfigError("fixed must be an object");
            for (const auto& [name, v] : value.items()) {
                if (!v.is_number()) throw ConfigError("fixed parameter '" + name + "' must be numeric");
                config.fixed[name] = v.get<double>();
            }
        } else if (key == "preset") {
            config.preset = value.get<std::string>();
        } else if (key == "out") {
            config.out_path = value.get<std::string>();
        } else if (key == "format") {
            config.format = value.get<std::string>();
        } else if (key == "seed") {
            config.seed = value.get<std::uint64_t>();
        } else if (key == "workers") {
            config.workers = value.get<int>();
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (!config.scenario.empty() && !kScenarios.count(config.scenario)) {
        throw ConfigError("unknown scenario '" + config.scenario + "'");
    }
    if (config.format != "csv" && config.format != "json") {
        throw ConfigError("format must be 'csv' or 'json'");
    }
    if (config.workers < 1) throw ConfigError("workers must be >= 1");
    return config;
}

Table run_minimal_sweep(const SweepConfig& config) {
    require_known_names(config, {"delta"},
                        {"omega0", "t_hot", "t_cold", "gamma_hot", "gamma_cold"});
    MinimalMachineParams base;
    base.omega0 = fixed_or(config, "omega0", 3.0);
    base.t_hot = fixed_or(config, "t_hot", 2.0);
    base.t_cold = fixed_or(config, "t_cold", 1.0);
    base.gamma_hot = fixed_or(config, "gamma_hot", 1.0);
    base.gamma_cold = fixed_or(config, "gamma_cold", 1.0);
    const GridSpec grid = grid_or(config, "delta", GridSpec{0.25, 2.75, 11});
    const std::vector<double> deltas = grid.values();
    const double delta_cr = critical_modulation(base.omega0, base.t_hot, base.t_cold);

    Table table;
    table.resolved_config = base_resolved(config);
    table.resolved_config["grid"] = json{{"delta", grid_to_json(grid)}};
    table.resolved_config["fixed"] = json{{"omega0", base.omega0},
                                          {"t_hot", base.t_hot},
                                          {"t_cold", base.t_cold},
                                          {"gamma_hot", base.gamma_hot},
                                          {"gamma_cold", base.gamma_cold}};
    table.columns = {"delta", "regime", "p_excited", "J_H", "J_C",
                     "power", "efficiency", "cop", "carnot", "delta_cr"};
    table.rows.resize(deltas.size());
    parallel_for(int(deltas.size()), config.workers, [&](int i) {
        MinimalMachineParams params = base;
        params.delta = deltas[size_t(i)];
        const SteadyStateReport report = minimal_machine_steady_state(params);
        table.rows[size_t(i)] = {Cell{params.delta},
                                 Cell{std::string(regime_name(report.regime))},
                                 Cell{report.p_excited},
                                 Cell{report.current_hot},
                                 Cell{report.current_cold},
                                 Cell{report.power},
                                 opt_cell(report.efficiency),
                                 opt_cell(report.cop),
                                 Cell{report.carnot},
                                 Cell{delta_cr}};
    });
    return table;
}

Table run_otto_sweep(const SweepConfig& config) {
    require_known_names(config, {"r"},
                        {"omega_cold", "omega_hot", "t_hot", "t_cold", "fock_dim"});
    OttoParams base;
    base.omega_cold = fixed_or(config, "omega_cold", 1.0);
    base.omega_hot = fixed_or(config, "omega_hot", 2.0);
    base.t_hot = fixed_or(config, "t_hot", 4.0);
    base.t_cold = fixed_or(config, "t_cold", 1.0);
    base.fock_dim = int(fixed_or(config, "fock_dim", 0.0));
    const GridSpec grid = grid_or(config, "r", GridSpec{0.0, 2.0, 9});
    const std::vector<double> squeezings = grid.values();

    Table table;
    table.resolved_config = base_resolved(config);
    table.resolved_config["grid"] = json{{"r", grid_to_json(grid)}};
    table.resolved_config["fixed"] = json{{"omega_cold", base.omega_cold},
                                          {"omega_hot", base.omega_hot},
                                          {"t_hot", base.t_hot},
                                          {"t_cold", base.t_cold},
                                          {"fock_dim", base.fock_dim}};
    table.columns = {"r", "regime", "eta", "eta_max", "carnot", "exchange_hot",
                     "counterfactual_heat"};
    table.rows.resize(squeezings.size());
    parallel_for(int(squeezings.size()), config.workers, [&](int i) {
        OttoParams params = base;
        params.squeezing = squeezings[size_t(i)];
        const CycleReport report = otto_cycle(params);
        table.rows[size_t(i)] = {Cell{params.squeezing},
                                 Cell{std::string(report.engine ? "engine" : "non-engine")},
                                 opt_cell(report.eta),
                                 opt_cell(report.eta_max),
                                 Cell{report.carnot},
                                 Cell{report.exchange_hot},
                                 Cell{report.counterfactual_heat}};
    });
    return table;
}

Table run_inequality_suite(const SweepConfig& config) {
    require_known_names(config, {},
                        {"count", "dim", "temperature", "omega", "gamma", "t_end", "dt",
                         "stride", "passive_only"});
    const int count = int(fixed_or(config, "count", 100.0));
    if (count < 1) throw ConfigError("inequalities: count must be >= 1");
    const int dim = int(fixed_or(config, "dim", 2.0));
    if (dim < 2) throw ConfigError("inequalities: dim must be >= 2");
    const double temperature = fixed_or(config, "temperature", 1.0);
    if (!(temperature > 0.0)) throw ConfigError("inequalities: temperature must be positive");
    const double omega = fixed_or(config, "omega", 1.0);
    const double gamma = fixed_or(config, "gamma", 1.0);
    const double t_end = fixed_or(config, "t_end", 25.0);
    const double dt = fixed_or(config, "dt", 0.01);
    const int stride = int(fixed_or(config, "stride", 5.0));
    const bool passive_only = fixed_or(config, "passive_only", 0.0) != 0.0;

    const FockSpace fock = fock_space(dim);
    const HermitianOperator hamiltonian(omega * fock.number.matrix());
    const HamiltonianSchedule schedule = HamiltonianSchedule::constant(hamiltonian);
    const double occupancy = bose_occupancy(omega, temperature);
    const BathChannel channel{fock.annihilation, gamma, temperature, occupancy, 0.0};

    Table table;
    table.resolved_config = base_resolved(config);
    table.resolved_config["fixed"] =
        json{{"count", count},         {"dim", dim},   {"temperature", temperature},
             {"omega", omega},         {"gamma", gamma}, {"t_end", t_end},
             {"dt", dt},               {"stride", stride},
             {"passive_only", passive_only ? 1 : 0}};
    table.columns = {"index", "ergotropy0", "delta_S", "Q_over_T", "E_over_T",
                     "slack_tight", "slack_spohn", "pass_tight", "pass_spohn"};
    table.rows.resize(size_t(count));

    std::mutex summary_mutex;
    double min_tight = std::numeric_limits<double>::infinity();
    double min_spohn = std::numeric_limits<double>::infinity();
    parallel_for(count, config.workers, [&](int i) {
        std::mt19937_64 rng(derive_seed(config.seed, std::uint64_t(i)));
        DensityMatrix rho0 = random_density_matrix(dim, rng);
        if (passive_only) rho0 = passive_state(rho0, hamiltonian).passive_state;
        const double initial_ergotropy = ergotropy(rho0, hamiltonian);
        const Trajectory trajectory = evolve(rho0, schedule, {channel}, t_end, dt, stride);
        const EnergyLedger ledger = build_ledger(trajectory);
        const InequalityReport report = check_inequalities(ledger, temperature);
        table.rows[size_t(i)] = {
            Cell{double(i)},
            Cell{initial_ergotropy},
            Cell{report.delta_S},
            Cell{report.Q_over_T},
            Cell{report.E_over_T},
            Cell{report.slack_tight},
            Cell{report.slack_spohn},
            Cell{std::string(report.slack_tight >= -1e-8 ? "true" : "false")},
            Cell{std::string(report.slack_spohn >= -1e-8 ? "true" : "false")}};
        std::lock_guard<std::mutex> lock(summary_mutex);
        min_tight = std::min(min_tight, report.slack_tight);
        min_spohn = std::min(min_spohn, report.slack_spohn);
    });
    table.summary["min_slack_tight"] = min_tight;
    table.summary["min_slack_spohn"] = min_spohn;
    return table;
}

TrajectoryRun run_trajectory(const SweepConfig& config) {
    require_known_names(config, {},
                        {"alpha0", "gamma", "omega", "dim", "t_end", "dt", "stride", "level"});
    std::string preset = config.preset.empty() ? "coherent-decay" : config.preset;
    if (preset != "coherent-decay" && preset != "fock-decay") {
        throw ConfigError("unknown trajectory preset '" + preset + "'");
    }

    const double omega = fixed_or(config, "omega", 1.0);
    const double gamma = fixed_or(config, "gamma", 1.0);
    double t_end, dt;
    int dim, stride, level = 0;
    double alpha0 = 0.0;
    if (preset == "coherent-decay") {
        alpha0 = fixed_or(config, "alpha0", 2.0);
        dim = int(fixed_or(config, "dim", 40.0));
        t_end = fixed_or(config, "t_end", 10.0);
        dt = fixed_or(config, "dt", 0.005);
        stride = int(fixed_or(config, "stride", 2.0));
    } else {
        level = int(fixed_or(config, "level", 1.0));
        dim = int(fixed_or(config, "dim", std::max(2.0, double(level + 1))));
        t_end = fixed_or(config, "t_end", 12.0);
        dt = fixed_or(config, "dt", 0.005);
        stride = int(fixed_or(config, "stride", 2.0));
    }
    if (dim < 2) throw ConfigError("trajectory: dim must be >= 2");
    if (level < 0 || level >= dim) throw ConfigError("trajectory: level out of range");

    const FockSpace fock = fock_space(dim);
    const HermitianOperator hamiltonian(omega * fock.number.matrix());
    const BathChannel channel{fock.annihilation, gamma, 0.0, 0.0, 0.0};
    const DensityMatrix initial = preset == "coherent-decay"
                                      ? coherent_state(Complex(alpha0, 0.0), dim)
                                      : pure_state(basis_ket(dim, level));

    TrajectoryRun run;
    run.resolved_config = base_resolved(config);
    json fixed{{"omega", omega}, {"gamma", gamma}, {"dim", dim},
               {"t_end", t_end}, {"dt", dt},       {"stride", stride}};
    if (preset == "coherent-decay") fixed["alpha0"] = alpha0;
    else fixed["level"] = level;
    run.resolved_config["preset"] = preset;
    run.resolved_config["fixed"] = fixed;

    const Trajectory trajectory =
        evolve(initial, HamiltonianSchedule::constant(hamiltonian), {channel}, t_end, dt, stride);
    run.ledger = build_ledger(trajectory);
    return run;
}

namespace {

void write_cell_csv(const Cell& cell, std::ostream& out) {
    if (std::holds_alternative<double>(cell)) {
        out << format_number(std::get<double>(cell));
    } else if (std::holds_alternative<std::string>(cell)) {
        out << std::get<std::string>(cell);
    }
}

json cell_to_json(const Cell& cell) {
    if (std::holds_alternative<double>(cell)) return std::get<double>(cell);
    if (std::holds_alternative<std::string>(cell)) return std::get<std::string>(cell);
    return nullptr;
}

} // namespace

void write_table(const Table& table, const std::string& format, std::ostream& out) {
    if (format == "csv") {
        out << "# config: " << table.resolved_config.dump() << "\n";
        for (size_t c = 0; c < table.columns.size(); ++c) {
            out << (c ? "," : "") << table.columns[c];
        }
        out << "\n";
        for (const auto& row : table.rows) {
            for (size_t c = 0; c < row.size(); ++c) {
                if (c) out << ',';
                write_cell_csv(row[c], out);
            }
            out << "\n";
        }
        if (!table.summary.empty()) {
            out << "# summary:";
            for (const auto& [key, value] : table.summary) {
                out << ' ' << key << '=' << format_number(value);
            }
            out << "\n";
        }
    } else if (format == "json") {
        json j;
        j["config"] = table.resolved_config;
        j["columns"] = table.columns;
        j["rows"] = json::array();
        for (const auto& row : table.rows) {
            json jrow = json::array();
            for (const auto& cell : row) jrow.push_back(cell_to_json(cell));
            j["rows"].push_back(std::move(jrow));
        }
        if (!table.summary.empty()) j["summary"] = table.summary;
        out << j.dump(2) << "\n";
    } else {
        throw ConfigError("format must be 'csv' or 'json'");
    }
}

void write_trajectory(const TrajectoryRun& run, const std::string& format, std::ostream& out) {
    if (format == "csv") {
        write_ledger_csv(run.ledger, out, {"# config: " + run.resolved_config.dump()});
    } else if (format == "json") {
        json j;
        j["config"] = run.resolved_config;
        j["columns"] = {"t", "E", "W", "exchange", "heat", "diss_ergotropy", "entropy"};
        j["rows"] = json::array();
        const EnergyLedger& ledger = run.ledger;
        for (size_t i = 0; i < ledger.times.size(); ++i) {
            j["rows"].push_back({ledger.times[i], ledger.energy[i], ledger.work[i],
                                 ledger.exchange[i], ledger.heat[i],
                                 ledger.dissipated_ergotropy[i], ledger.entropy[i]});
        }
        out << j.dump(2) << "\n";
    } else {
        throw ConfigError("format must be 'csv' or 'json'");
    }
}

void run_scenario(const SweepConfig& config, std::ostream& out) {
    if (config.scenario == "minimal-machine") {
        write_table(run_minimal_sweep(config), config.format, out);
    } else if (config.scenario == "otto") {
        write_table(run_otto_sweep(config), config.format, out);
    } else if (config.scenario == "inequalities") {
        write_table(run_inequality_suite(config), config.format, out);
    } else if (config.scenario == "trajectory") {
        write_trajectory(run_trajectory(config), config.format, out);
    } else {
        throw ConfigError("unknown scenario '" + config.scenario + "'");
    }
}

} // namespace qtm
