// sweep.hpp — Scenario runners behind the CLI: config handling, parameter
// sweeps over the machine models, the random-state inequality suite, and
// deterministic CSV/JSON table output.

#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qtm/ledger.hpp"

namespace qtm {

struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;

    std::vector<double> values() const;
};

// Scenario configuration: JSON file contents plus CLI overrides.
struct SweepConfig {
    std::string scenario;  // minimal-machine | otto | trajectory | inequalities
    std::map<std::string, GridSpec> grid;
    std::map<std::string, double> fixed;
    std::string preset;  // trajectory scenario presets
    std::string out_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
    int workers = 1;
};

// Strict parse: unknown keys, malformed grids, and zero-count grids are
// configuration errors.
SweepConfig parse_config(const nlohmann::json& j);

using Cell = std::variant<std::monostate, double, std::string>;

struct Table {
    nlohmann::json resolved_config;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::map<std::string, double> summary;
};

Table run_minimal_sweep(const SweepConfig& config);
Table run_otto_sweep(const SweepConfig& config);
Table run_inequality_suite(const SweepConfig& config);

struct TrajectoryRun {
    nlohmann::json resolved_config;
    EnergyLedger ledger;
};
TrajectoryRun run_trajectory(const SweepConfig& config);

void write_table(const Table& table, const std::string& format, std::ostream& out);
void write_trajectory(const TrajectoryRun& run, const std::string& format, std::ostream& out);

// Dispatches on config.scenario and writes the result to `out`.
void run_scenario(const SweepConfig& config, std::ostream& out);

} // namespace qtm
