#include "dampsq/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dampsq/csv.hpp"
#include "dampsq/fock.hpp"
#include "dampsq/freqmod.hpp"
#include "dampsq/gaussian.hpp"
#include "dampsq/inout.hpp"
#include "dampsq/measurement.hpp"

#ifndef DAMPSQ_VERSION
#define DAMPSQ_VERSION "0.0.0"
#endif

namespace dampsq {

namespace {

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("grid: need step > 0 and max >= min");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> g;
    for (long i = 0; i <= n; ++i) g.push_back(lo + step * static_cast<double>(i));
    return g;
}

std::vector<double> linspace(double lo, double hi, long points) {
    if (points < 2) throw ConfigError("grid: need at least 2 points");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (long i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / static_cast<double>(points - 1);
    return g;
}

Table wigner_table(const std::string& name, const GaussianMoments& m, long resolution) {
    const WignerGrid w = wigner_gaussian(m, default_wigner_grid(m, 6.0, static_cast<std::size_t>(resolution)));
    Table t{name, {"x", "y", "W"}, {}};
    for (std::size_t iy = 0; iy < w.y.size(); ++iy)
        for (std::size_t ix = 0; ix < w.x.size(); ++ix) t.rows.push_back({w.x[ix], w.y[iy], w.at(ix, iy)});
    return t;
}

GaussianMoments steady_mono(double dk, double kappa) {
    const DerivedRates r{dk, kappa - dk, dk / (kappa - dk), complex{std::sqrt(dk / kappa) * kappa / (kappa - dk), 0.0}};
    return closed_form_moments(r, INFINITY);
}

struct Context {
    const ExperimentOptions& opts;
    ParamReader& p;
    ExperimentResult& out;
    unsigned jobs;
    std::optional<Engine> engine;
};

void squeeze_sweep(Context& c) {
    const double kappa = c.p.number("kappa", 1.0);
    const double lo = c.p.number("delta_kappa_min", 0.0);
    const double hi = c.p.number("delta_kappa_max", 0.99);
    const double step = c.p.number("delta_kappa_step", 0.01);
    const auto insets = c.p.numbers("wigner_delta_kappa", {0.25, 0.5});
    const long res = c.p.integer("wigner_resolution", 101);
    c.p.finish();
    if (!(kappa > 0.0) || lo < 0.0 || !(hi < kappa)) throw ConfigError("squeeze-sweep: need 0 <= delta_kappa < kappa");

    Table t{"squeeze_sweep", {"delta_kappa", "var_x", "var_y", "gamma_over_kappa"}, {}};
    for (double dk : linear_grid(lo, hi, step)) {
        const QuadratureStats q = quadrature_stats(steady_mono(dk, kappa));
        t.rows.push_back({dk, q.var_x, q.var_y, (kappa - dk) / kappa});
    }
    c.out.tables.push_back(std::move(t));
    for (double dk : insets) {
        if (!(dk >= 0.0 && dk < kappa)) throw ConfigError("squeeze-sweep: wigner_delta_kappa outside [0, kappa)");
        c.out.tables.push_back(wigner_table("wigner_delta_kappa_" + label(dk), steady_mono(dk, kappa), res));
    }
    c.out.summary["var_x_at_half"] = quadrature_stats(steady_mono(0.5 * kappa, kappa)).var_x;
}

void beta_curves(Context& c) {
    const double kappa = c.p.number("kappa", 1.0);
    const auto betas = c.p.numbers("betas", {0.01, 0.1, 3.0});
    const double lo = c.p.number("delta_kappa_min", 0.001);
    const double hi = c.p.number("delta_kappa_max", 0.99);
    const double step = c.p.number("delta_kappa_step", 0.001);
    c.p.finish();
    if (!(kappa > 0.0) || !(lo > 0.0) || !(hi < kappa)) throw ConfigError("beta-curves: need 0 < delta_kappa < kappa");

    Table curves{"beta_curves", {"beta", "delta_kappa", "var_x"}, {}};
    Table optima{"beta_optima", {"beta", "delta_kappa_opt", "var_x_min"}, {}};
    const auto grid = linear_grid(lo, hi, step);
    for (double beta : betas) {
        if (!(beta >= 0.0)) throw ConfigError("beta-curves: beta must be >= 0");
        for (double dk : grid) {
            if (kappa - (1.0 - beta) * dk <= 0.0) continue;
            curves.rows.push_back({beta, dk, beta_variance_curve(dk, beta, kappa)});
        }
        const BetaOptimum o = beta_variance_min(beta, kappa);
        optima.rows.push_back({beta, o.delta_kappa_opt, o.var_x_min});
    }
    c.out.tables.push_back(std::move(curves));
    c.out.tables.push_back(std::move(optima));
}

ReadoutScenario read_scenario(Context& c, ReadoutMode mode) {
    ReadoutScenario sc;
    sc.mode = mode;
    sc.chi = c.p.number("chi", 10.0);
    sc.kappa = c.p.number("kappa", 1.0);
    sc.target_photons = c.p.number("photons", 10.0);
    const double lo = c.p.number("delta_kappa_min", 0.01);
    const double hi = c.p.number("delta_kappa_max", 0.9);
    const double step = c.p.number("delta_kappa_step", 0.01);
    sc.delta_kappa_grid = linear_grid(lo, hi, step);
    sc.phi = c.p.number("phi", 0.0);
    sc.tol = c.p.number("tol", 1e-10);
    sc.fock_truncation = static_cast<std::size_t>(std::max(0L, c.p.integer("fock_truncation", 0)));
    if (mode == ReadoutMode::mono) {
        sc.ground = c.p.choice("ground", "thermal", {"exact", "thermal"}) == "thermal" ? GroundTreatment::thermal
                                                                                   : GroundTreatment::exact;
    } else {
        sc.bichromatic_source = c.p.choice("source", "leading_order", {"leading_order", "ode"}) == "ode"
                                    ? BichromaticSource::ode
                                    : BichromaticSource::leading_order;
        sc.stroboscopic = c.p.flag("stroboscopic", true);
    }
    sc.strobe_samples = static_cast<std::size_t>(std::max(1L, c.p.integer("strobe_samples", 64)));
    sc.engine = c.engine.value_or(Engine::gaussian);
    sc.jobs = c.jobs;
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sc;
}

Table curve_table(const std::string& name, const ErrorCurve& curve) {
    Table t{name, {"delta_kappa", "E", "factor"}, {}};
    for (const auto& p : curve.points) t.rows.push_back({p.delta_kappa, p.error, p.factor});
    return t;
}

void readout(Context& c, ReadoutMode mode) {
    const std::string tag = mode == ReadoutMode::mono ? "mono" : "bi";
    ReadoutScenario sc = read_scenario(c, mode);
    const auto extra = c.p.numbers("extra_photons", {3.0, 20.0});
    const double panel_dk = c.p.number("wigner_delta_kappa", 0.5);
    const long res = c.p.integer("wigner_resolution", 101);
    c.p.finish();

    const ErrorCurve curve = scenario_error_curve(sc);
    for (const auto& w : curve.warnings) c.out.warnings.push_back(w);
    c.out.tables.push_back(curve_table("readout_" + tag, curve));
    c.out.tables.push_back(Table{"readout_" + tag + "_optimum",
                                 {"delta_kappa", "E", "factor", "baseline"},
                                 {{curve.optimum.delta_kappa, curve.optimum.error, curve.optimum.factor, curve.baseline}}});
    c.out.summary["optimum_delta_kappa"] = curve.optimum.delta_kappa;
    c.out.summary["optimum_factor"] = curve.optimum.factor;
    c.out.summary["baseline"] = curve.baseline;

    if (mode == ReadoutMode::bichromatic) {
        Table closed{"readout_bi_closed_form", {"delta_kappa", "E"}, {}};
        for (double dk : sc.grid()) {
            closed.rows.push_back({dk, emin_bichromatic(calibrate_drive(sc.kappa - dk, sc.target_photons), sc.kappa, dk)});
        }
        c.out.tables.push_back(std::move(closed));
    }

    for (double photons : extra) {
        ReadoutScenario other = sc;
        other.target_photons = photons;
        other.engine = Engine::gaussian;
        c.out.tables.push_back(curve_table("readout_" + tag + "_photons_" + label(photons), scenario_error_curve(other)));
    }

    // Wigner panels at the best grid point and at a chosen point.
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (curve.points[i].error < curve.points[best].error) best = i;
    const BranchPair& at_best = curve.details[best].at_optimum;
    c.out.tables.push_back(wigner_table("wigner_" + tag + "_optimum_ground", at_best.ground, res));
    c.out.tables.push_back(wigner_table("wigner_" + tag + "_optimum_excited", at_best.excited, res));
    if (panel_dk > 0.0) {
        ReadoutScenario single = sc;
        single.delta_kappa_grid = {panel_dk};
        try {
            single.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        const PointResult r = evaluate_point(single, panel_dk);
        c.out.tables.push_back(wigner_table("wigner_" + tag + "_delta_kappa_" + label(panel_dk) + "_ground", r.at_optimum.ground, res));
        c.out.tables.push_back(wigner_table("wigner_" + tag + "_delta_kappa_" + label(panel_dk) + "_excited", r.at_optimum.excited, res));
    }
}

void error_trace(Context& c) {
    ReadoutScenario sc;
    sc.mode = ReadoutMode::bichromatic;
    sc.chi = c.p.number("chi", 10.0);
    sc.kappa = c.p.number("kappa", 1.0);
    sc.target_photons = c.p.number("photons", 10.0);
    const double dk = c.p.number("delta_kappa", 0.17);
    const double t_end = c.p.number("t_end", 20.0);
    const long per_period = c.p.integer("samples_per_period", 64);
    sc.phi = c.p.number("phi", 0.0);
    sc.tol = c.p.number("tol", 1e-10);
    c.p.finish();
    sc.delta_kappa_grid = {dk};
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(t_end > 0.0) || per_period < 4) throw ConfigError("error-trace: need t_end > 0 and samples_per_period >= 4");
    if (auto w = sc.warning()) c.out.warnings.push_back(*w);

    const double period = 2.0 * pi / (4.0 * sc.chi);
    const auto count = static_cast<long>(std::ceil(t_end / period * static_cast<double>(per_period)));
    const auto times = linspace(0.0, t_end, count + 1);
    const ErrorTrace tr = error_vs_time(sc, dk, times);
    Table t{"error_trace", {"t", "E"}, {}};
    for (std::size_t k = 0; k < tr.times.size(); ++k) t.rows.push_back({tr.times[k], tr.error[k]});
    c.out.tables.push_back(std::move(t));
    const double closed = emin_bichromatic(calibrate_drive(sc.kappa - dk, sc.target_photons), sc.kappa, dk);
    const double measured = tr.peak_frequency > 0.0 ? 2.0 * pi / tr.peak_frequency : 0.0;
    c.out.tables.push_back(Table{"error_trace_summary",
                                 {"period", "measured_period", "last_period_min", "last_period_max", "closed_form_min"},
                                 {{tr.period, measured, tr.last_period_min, tr.last_period_max, closed}}});
    c.out.summary["measured_period"] = measured;
    c.out.summary["last_period_min"] = tr.last_period_min;
}

void inout_phase(Context& c) {
    const double kappa = c.p.number("kappa", 1.0);
    const double omega_r = c.p.number("omega_r", 1000.0);
    const auto lambdas = c.p.numbers("lambdas", {0.0, 0.5, 0.9});
    const double span = c.p.number("detuning_max", 10.0);
    const long points = c.p.integer("points", 2001);
    c.p.finish();
    const auto omegas = linspace(omega_r - span, omega_r + span, points);
    double worst = 0.0;
    for (double lam : lambdas) {
        if (!(lam >= 0.0 && lam < 1.0)) throw ConfigError("inout-phase: lambdas must lie in [0, 1)");
        Table t{"inout_phase_lambda_" + label(lam), {"omega", "phi", "deviation"}, {}};
        for (const auto& pt : transfer_sweep(omegas, omega_r, kappa, lam)) {
            t.rows.push_back({pt.omega, pt.phase, pt.deviation});
            worst = std::max(worst, pt.deviation);
        }
        c.out.tables.push_back(std::move(t));
    }
    c.out.summary["max_deviation"] = worst;
}

void freqmod_experiment(Context& c) {
    const double omega_r = c.p.number("omega_r", 1000.0);
    const double lo = c.p.number("amplitude_min", 0.0);
    const double hi = c.p.number("amplitude_max", 2.0);
    const long points = c.p.integer("points", 201);
    const auto profile = c.p.numbers("kappa_profile", {1.0});
    c.p.finish();
    if (profile.empty()) throw ConfigError("freqmod-curve: kappa_profile must not be empty");
    const auto amps = linspace(lo, hi, points);
    std::vector<FreqModCurvePoint> curve;
    try {
        curve = freqmod_curve(amps, omega_r, KappaProfile{profile});
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    Table t{"freqmod_curve",
            {"delta_omega_r_over_omega_r", "delta_omega_r_over_omega_m", "var_x", "var_y", "equiv_delta_kappa"},
            {}};
    for (const auto& p : curve) {
        t.rows.push_back({p.rel_amplitude, p.z, p.stats.var_x, p.stats.var_y, p.stats.equiv_delta_kappa});
    }
    c.out.tables.push_back(std::move(t));
    c.out.summary["equiv_delta_kappa_at_0.2_percent"] =
        freqmod_stats(FreqModSpec{0.002 * omega_r, 2.0 * omega_r}, KappaProfile{profile}).equiv_delta_kappa;
}

void oracle_check(Context& c) {
    const double kappa = c.p.number("kappa", 1.0);
    const auto dks = c.p.numbers("delta_kappas", {0.1, 0.25, 0.5});
    const double t_scale = c.p.number("relaxation_times", 12.0);
    const long trunc = c.p.integer("truncation", 0);
    c.p.finish();

    Table t{"oracle_check",
            {"delta_kappa", "N", "var_x_gaussian", "var_x_fock", "abs_difference", "trace_error", "hermiticity",
             "min_eigenvalue", "tail"},
            {}};
    std::vector<std::vector<double>> rows(dks.size());
    parallel_for(dks.size(), c.jobs, [&](std::size_t i) {
        const double dk = dks[i];
        if (!(dk >= 0.0 && dk < kappa)) throw ConfigError("oracle-check: delta_kappas must lie in [0, kappa)");
        SystemParams sys;
        sys.kappa = kappa;
        const ValidatedModulation mod =
            validate_modulation(ModulationSpec{{Tone{std::sqrt(dk / kappa), 2.0 * sys.omega_r}}}, sys);
        const EvolutionContext ctx(sys, mod);
        const double t_end = t_scale / ctx.rates().gamma;
        const std::vector<double> times{t_end};
        FockOptions fo;
        if (c.opts.dump_rho && i == 0) fo.dump_path = *c.opts.dump_rho;
        const FockTrajectory tr = trunc > 0 ? integrate_rho(ctx, static_cast<std::size_t>(trunc), times, fo)
                                            : integrate_rho_adaptive(ctx, times, fo);
        const FockState& s = tr.states.back();
        const StateDiagnostics& d = tr.diagnostics.back();
        if (!d.ok()) {
            std::ostringstream os;
            os << "oracle-check: state invariants violated at delta_kappa = " << dk;
            throw NumericError(os.str());
        }
        const double vg = quadrature_stats(closed_form_moments(ctx.rates(), t_end)).var_x;
        const double vf = quadrature_stats(moments_from_rho(s)).var_x;
        rows[i] = {dk, static_cast<double>(s.truncation()), vg, vf, std::abs(vg - vf),
                   d.trace_error, d.hermiticity, d.min_eigenvalue, d.tail};
    });
    t.rows = std::move(rows);
    c.out.tables.push_back(std::move(t));
}

using Runner = std::function<void(Context&)>;

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> table{
        {"squeeze-sweep", squeeze_sweep},
        {"beta-curves", beta_curves},
        {"readout-mono", [](Context& c) { readout(c, ReadoutMode::mono); }},
        {"readout-bi", [](Context& c) { readout(c, ReadoutMode::bichromatic); }},
        {"error-trace", error_trace},
        {"inout-phase", inout_phase},
        {"freqmod-curve", freqmod_experiment},
        {"oracle-check", oracle_check},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"squeeze-sweep", "beta-curves",   "readout-mono",  "readout-bi",
                                                "error-trace",   "inout-phase",   "freqmod-curve", "oracle-check"};
    return names;
}

Engine parse_engine(const std::string& s) {
    if (s == "gaussian") return Engine::gaussian;
    if (s == "fock") return Engine::fock;
    throw ConfigError("engine must be 'gaussian' or 'fock', got '" + s + "'");
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ConfigError("format must be 'csv' or 'json', got '" + s + "'");
}

RunOverrides read_run_section(const ConfigFile& config) {
    RunOverrides r;
    auto it = config.sections.find("run");
    if (it == config.sections.end()) return r;
    ParamReader p("run", it->second);
    const auto& raw = it->second;
    if (raw.count("out")) r.out_dir = p.text("out", "");
    if (raw.count("jobs")) {
        const long j = p.integer("jobs", 0);
        if (j < 0) throw ConfigError("[run] jobs must be >= 0");
        r.jobs = static_cast<unsigned>(j);
    }
    if (raw.count("engine")) r.engine = parse_engine(p.text("engine", ""));
    if (raw.count("format")) r.format = parse_format(p.text("format", ""));
    p.finish();
    return r;
}

ExperimentResult run_experiment(const ExperimentOptions& options) {
    const auto& table = runners();
    auto runner = table.find(options.experiment);
    if (runner == table.end()) throw ConfigError("unknown experiment '" + options.experiment + "'");
    for (const auto& [name, keys] : options.config.sections) {
        if (name.empty() || name == "run") continue;
        if (!table.count(name)) throw ConfigError("unknown section [" + name + "]");
    }

    std::map<std::string, std::string> raw;
    if (auto it = options.config.sections.find(""); it != options.config.sections.end()) raw = it->second;
    if (auto it = options.config.sections.find(options.experiment); it != options.config.sections.end()) {
        for (const auto& [k, v] : it->second) {
            if (raw.count(k)) throw ConfigError("key '" + k + "' given both globally and in [" + options.experiment + "]");
            raw[k] = v;
        }
    }

    ExperimentResult result;
    result.experiment = options.experiment;
    ParamReader reader(options.experiment, raw);
    Context ctx{options, reader, result, options.jobs, options.engine};
    if (options.engine && options.experiment != "readout-mono" && options.experiment != "readout-bi") {
        result.warnings.push_back("engine selection only applies to readout-mono and readout-bi");
    }
    runner->second(ctx);
    result.parameters = reader.effective();
    return result;
}

std::vector<std::string> write_tables(const ExperimentResult& result, const std::filesystem::path& dir,
                                      OutputFormat format) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    for (const Table& t : result.tables) {
        const std::string name = t.name + (format == OutputFormat::csv ? ".csv" : ".json");
        std::ofstream os(dir / name, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        if (format == OutputFormat::csv) {
            CsvWriter csv(os);
            csv.header(std::span<const std::string>(t.columns));
            for (const auto& row : t.rows) csv.row(std::span<const double>(row));
        } else {
            nlohmann::json j;
            j["name"] = t.name;
            j["columns"] = t.columns;
            j["rows"] = t.rows;
            os << j.dump(1) << '\n';
        }
        if (!os) throw std::runtime_error("write failed for " + (dir / name).string());
        files.push_back(name);
    }
    return files;
}

void write_manifest(const ExperimentResult& result, const ExperimentOptions& options,
                    const std::vector<std::string>& files, double wall_seconds, const std::filesystem::path& dir) {
    nlohmann::json j;
    j["experiment"] = result.experiment;
    j["version"] = DAMPSQ_VERSION;
    j["compiler"] = __VERSION__;
    j["parameters"] = result.parameters;
    j["run"] = {{"jobs", options.jobs},
                {"engine", options.engine ? (*options.engine == Engine::fock ? "fock" : "gaussian") : "default"},
                {"format", options.format == OutputFormat::csv ? "csv" : "json"}};
    j["files"] = files;
    j["warnings"] = result.warnings;
    j["summary"] = result.summary;
    j["wall_time_seconds"] = wall_seconds;
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["finished_at"] = stamp;
    std::ofstream os(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    os << j.dump(2) << '\n';
}

}  // namespace dampsq
