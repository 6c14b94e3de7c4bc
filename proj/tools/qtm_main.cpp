// qtm — command-line front end for machine sweeps, trajectory ledgers, and
// the entropy-inequality suite. Exit codes: 0 success, 2 configuration
// error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtm/sweep.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string preset;

    CLI::Option* format_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* preset_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--out", flags.out_path, "output path (default: stdout)");
    flags.format_opt = cmd->add_option("--format", flags.format, "output format: csv|json");
    flags.seed_opt = cmd->add_option("--seed", flags.seed, "PRNG seed for random-state suites");
    flags.workers_opt = cmd->add_option("--workers", flags.workers, "worker-pool size for sweeps");
}

qtm::SweepConfig load_config(const CommonFlags& flags, const std::string& scenario) {
    nlohmann::json j = nlohmann::json::object();
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw qtm::ConfigError("cannot open config file '" + flags.config_path + "'");
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw qtm::ConfigError("config parse error: " + std::string(e.what()));
        }
    }
    qtm::SweepConfig config = qtm::parse_config(j);
    config.scenario = scenario;
    // flags take precedence over the config file
    if (!flags.out_path.empty()) config.out_path = flags.out_path;
    if (flags.format_opt && flags.format_opt->count() > 0) config.format = flags.format;
    if (flags.seed_opt && flags.seed_opt->count() > 0) config.seed = flags.seed;
    if (flags.workers_opt && flags.workers_opt->count() > 0) config.workers = flags.workers;
    if (flags.preset_opt && flags.preset_opt->count() > 0) config.preset = flags.preset;
    if (config.format != "csv" && config.format != "json") {
        throw qtm::ConfigError("format must be 'csv' or 'json'");
    }
    if (config.workers < 1) throw qtm::ConfigError("workers must be >= 1");
    return config;
}

int dispatch(const qtm::SweepConfig& config) {
    std::ostringstream buffer;
    qtm::run_scenario(config, buffer);
    if (config.out_path.empty()) {
        std::cout << buffer.str();
    } else {
        std::ofstream out(config.out_path, std::ios::binary);
        if (!out) throw qtm::ConfigError("cannot open output file '" + config.out_path + "'");
        out << buffer.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qtm — quantum thermodynamic machine sweeps and trajectory ledgers"};
    app.require_subcommand(1);

    CommonFlags minimal_flags, otto_flags, ineq_flags, traj_flags;

    CLI::App* minimal = app.add_subcommand(
        "minimal",
        "steady-state sweep of the periodically modulated qubit machine over the modulation "
        "delta (defaults: omega0=3, t_hot=2, t_cold=1, gamma_hot=1, gamma_cold=1, "
        "delta grid 0.25..2.75 with 11 points)");
    add_common_flags(minimal, minimal_flags);

    CLI::App* otto = app.add_subcommand(
        "otto",
        "squeezed-bath Otto cycle sweep over the squeeze parameter r (defaults: omega_cold=1, "
        "omega_hot=2, t_hot=4, t_cold=1, r grid 0..2 with 9 points, fock_dim chosen by the "
        "truncation tail rule)");
    add_common_flags(otto, otto_flags);

    CLI::App* inequalities = app.add_subcommand(
        "inequalities",
        "entropy-inequality suite over seeded random initial states relaxing in a thermal bath "
        "(defaults: count=100, dim=2, temperature=1, omega=1, gamma=1, t_end=25, dt=0.01)");
    add_common_flags(inequalities, ineq_flags);

    CLI::App* trajectory = app.add_subcommand(
        "trajectory",
        "energy/entropy ledger of a single decay trajectory; presets: coherent-decay "
        "(alpha0=2, gamma=1, dim=40) and fock-decay (level=1, gamma=1)");
    add_common_flags(trajectory, traj_flags);
    traj_flags.preset_opt =
        trajectory->add_option("--preset", traj_flags.preset, "coherent-decay|fock-decay");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (minimal->parsed()) return dispatch(load_config(minimal_flags, "minimal-machine"));
        if (otto->parsed()) return dispatch(load_config(otto_flags, "otto"));
        if (inequalities->parsed()) return dispatch(load_config(ineq_flags, "inequalities"));
        if (trajectory->parsed()) return dispatch(load_config(traj_flags, "trajectory"));
    } catch (const qtm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qtm::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
