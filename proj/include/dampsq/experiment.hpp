// experiment.hpp - named experiments that regenerate each figure's data,
// and their CSV / JSON emission.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dampsq/config.hpp"
#include "dampsq/readout.hpp"

namespace dampsq {

enum class OutputFormat { csv, json };

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentOptions {
    std::string experiment;
    ConfigFile config;
    std::filesystem::path out_dir{"out"};
    OutputFormat format{OutputFormat::csv};
    unsigned jobs{0};
    std::optional<Engine> engine;
    std::optional<std::string> dump_rho;  // binary rho snapshots (oracle-check)
};

struct ExperimentResult {
    std::string experiment;
    std::vector<Table> tables;
    std::vector<std::string> warnings;
    std::map<std::string, std::string> parameters;
    std::map<std::string, double> summary;
};

const std::vector<std::string>& experiment_names();

// Reads the [run] section, the experiment's own section and the leading
// unnamed section of options.config. Throws ConfigError for unknown sections
// or keys and for invalid values.
ExperimentResult run_experiment(const ExperimentOptions& options);

// Writes every table as <name>.csv or <name>.json into dir and returns the
// file names in order.
std::vector<std::string> write_tables(const ExperimentResult& result, const std::filesystem::path& dir,
                                      OutputFormat format);

void write_manifest(const ExperimentResult& result, const ExperimentOptions& options,
                    const std::vector<std::string>& files, double wall_seconds,
                    const std::filesystem::path& dir);

// Applies [run] settings (out, jobs, engine, format) from the config file to
// options where the command line left them unset.
struct RunOverrides {
    std::optional<std::filesystem::path> out_dir;
    std::optional<unsigned> jobs;
    std::optional<Engine> engine;
    std::optional<OutputFormat> format;
};
RunOverrides read_run_section(const ConfigFile& config);

Engine parse_engine(const std::string& s);
OutputFormat parse_format(const std::string& s);

}  // namespace dampsq
