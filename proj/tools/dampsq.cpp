// dampsq - run one named experiment and write its data files.
//
//   dampsq <experiment> [--config FILE] [--out DIR] [--jobs N]
//          [--engine gaussian|fock] [--format csv|json] [--dump-rho FILE]
//
// Exit status: 0 success, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dampsq/experiment.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

std::string experiment_list() {
    std::string s;
    for (const auto& n : dampsq::experiment_names()) s += "  " + n + "\n";
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damping-modulated resonator squeezing experiments"};
    app.footer("Experiments:\n" + experiment_list() +
               "\nThe output directory defaults to $DAMPSQ_OUT, then [run] out, then ./out.");

    std::string experiment;
    std::string config_path;
    std::string out_dir;
    std::string engine;
    std::string format;
    std::string dump_rho;
    long jobs = -1;

    app.add_option("experiment", experiment, "Experiment name")->required();
    app.add_option("--config", config_path, "Configuration file");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--jobs", jobs, "Worker threads (0 = all cores)");
    app.add_option("--engine", engine, "gaussian or fock");
    app.add_option("--format", format, "csv or json");
    app.add_option("--dump-rho", dump_rho, "Write binary density-matrix snapshots (oracle-check)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        const auto start = std::chrono::steady_clock::now();
        dampsq::ExperimentOptions opts;
        opts.experiment = experiment;
        if (!config_path.empty()) opts.config = dampsq::load_config(config_path);
        const dampsq::RunOverrides run = dampsq::read_run_section(opts.config);

        if (!out_dir.empty()) {
            opts.out_dir = out_dir;
        } else if (const char* env = std::getenv("DAMPSQ_OUT"); env && *env) {
            opts.out_dir = env;
        } else if (run.out_dir) {
            opts.out_dir = *run.out_dir;
        }
        if (jobs >= 0) {
            opts.jobs = static_cast<unsigned>(jobs);
        } else if (run.jobs) {
            opts.jobs = *run.jobs;
        }
        if (!engine.empty()) {
            opts.engine = dampsq::parse_engine(engine);
        } else {
            opts.engine = run.engine;
        }
        if (!format.empty()) {
            opts.format = dampsq::parse_format(format);
        } else if (run.format) {
            opts.format = *run.format;
        }
        if (!dump_rho.empty()) opts.dump_rho = dump_rho;

        const dampsq::ExperimentResult result = dampsq::run_experiment(opts);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
        const auto files = dampsq::write_tables(result, opts.out_dir, opts.format);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        dampsq::write_manifest(result, opts, files, wall, opts.out_dir);
        for (const auto& [key, value] : result.summary) std::cout << key << " = " << value << '\n';
        std::cout << "wrote " << files.size() << " files to " << opts.out_dir.string() << '\n';
        return exit_ok;
    } catch (const dampsq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const dampsq::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return exit_config;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
