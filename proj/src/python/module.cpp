#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dampsq/experiment.hpp"
#include "dampsq/fock.hpp"
#include "dampsq/freqmod.hpp"
#include "dampsq/gaussian.hpp"
#include "dampsq/inout.hpp"
#include "dampsq/measurement.hpp"
#include "dampsq/readout.hpp"

namespace py = pybind11;
using namespace dampsq;

namespace {

ModulationSpec tones_from(const std::vector<std::pair<complex, double>>& tones) {
    ModulationSpec mod;
    for (const auto& [amp, freq] : tones) mod.tones.push_back({amp, freq});
    return mod;
}

SystemParams system_from(double omega_r, double kappa, double beta, double chi) {
    SystemParams sys;
    sys.omega_r = omega_r;
    sys.kappa = kappa;
    sys.beta = beta;
    sys.chi = chi;
    return sys;
}

std::optional<QubitState> qubit_from(const std::string& q) {
    if (q.empty() || q == "none") return std::nullopt;
    if (q == "ground") return QubitState::ground;
    if (q == "excited") return QubitState::excited;
    throw std::invalid_argument("qubit must be 'ground', 'excited' or 'none'");
}

FrameChoice frame_from(const std::string& f) {
    if (f == "resonator") return FrameChoice::resonator;
    if (f == "excited_pull") return FrameChoice::excited_pull;
    if (f == "drive") return FrameChoice::drive;
    throw std::invalid_argument("frame must be 'resonator', 'excited_pull' or 'drive'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Damping-modulated resonator squeezing: Gaussian engine, Fock oracle, readout error";

    py::register_exception<ModulationError>(m, "ModulationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    auto numeric = py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);
    py::register_exception<TruncationError>(m, "TruncationError", numeric.ptr());
    py::register_exception<PositivityError>(m, "PositivityError", numeric.ptr());
    py::register_exception<StepFailure>(m, "StepFailure", numeric.ptr());
    py::register_exception<PhysicalityViolation>(m, "PhysicalityViolation", numeric.ptr());

    py::class_<GaussianMoments>(m, "GaussianMoments")
        .def(py::init<>())
        .def(py::init([](complex mean, double n, complex s, double frame) {
                 return GaussianMoments{mean, n, s, frame};
             }),
             py::arg("mean") = complex{}, py::arg("n") = 0.0, py::arg("s") = complex{}, py::arg("frame") = 0.0)
        .def_readwrite("mean", &GaussianMoments::mean)
        .def_readwrite("n", &GaussianMoments::n)
        .def_readwrite("s", &GaussianMoments::s)
        .def_readwrite("frame", &GaussianMoments::frame)
        .def("__repr__", [](const GaussianMoments& g) {
            return "GaussianMoments(n=" + std::to_string(g.n) + ", |s|=" + std::to_string(std::abs(g.s)) + ")";
        });

    py::class_<QuadratureStats>(m, "QuadratureStats")
        .def_readonly("var_x", &QuadratureStats::var_x)
        .def_readonly("var_y", &QuadratureStats::var_y)
        .def_readonly("theta", &QuadratureStats::theta);

    py::class_<DerivedRates>(m, "DerivedRates")
        .def_readonly("delta_kappa", &DerivedRates::delta_kappa)
        .def_readonly("gamma", &DerivedRates::gamma)
        .def_readonly("n_bar", &DerivedRates::n_bar)
        .def_readonly("m", &DerivedRates::m);

    py::class_<SqueezeParams>(m, "SqueezeParams")
        .def(py::init([](double r, double theta) { return SqueezeParams{r, theta}; }), py::arg("r"), py::arg("theta"))
        .def_readonly("r", &SqueezeParams::r)
        .def_readonly("theta", &SqueezeParams::theta);

    py::class_<MarginalStats>(m, "MarginalStats")
        .def(py::init([](double x0, double sigma, double phi) { return MarginalStats{x0, sigma, phi}; }),
             py::arg("x0"), py::arg("sigma"), py::arg("phi") = 0.0)
        .def_readonly("x0", &MarginalStats::x0)
        .def_readonly("sigma", &MarginalStats::sigma)
        .def_readonly("phi", &MarginalStats::phi);

    py::class_<ErrorReport>(m, "ErrorReport")
        .def_readonly("error", &ErrorReport::error)
        .def_readonly("intersections", &ErrorReport::intersections)
        .def_property_readonly("method", [](const ErrorReport& r) {
            return r.method == OverlapMethod::analytic ? "analytic" : "numeric";
        });

    py::class_<FreqModStats>(m, "FreqModStats")
        .def_readonly("gamma", &FreqModStats::gamma)
        .def_readonly("n_bar", &FreqModStats::n_bar)
        .def_readonly("m", &FreqModStats::m)
        .def_readonly("var_x", &FreqModStats::var_x)
        .def_readonly("var_y", &FreqModStats::var_y)
        .def_readonly("equiv_delta_kappa", &FreqModStats::equiv_delta_kappa);

    py::class_<Optimum>(m, "Optimum")
        .def_readonly("delta_kappa", &Optimum::delta_kappa)
        .def_readonly("error", &Optimum::error)
        .def_readonly("factor", &Optimum::factor);

    m.def("lambda_at",
          [](const std::vector<std::pair<complex, double>>& tones, double t) { return lambda_at(tones_from(tones), t); },
          py::arg("tones"), py::arg("t"), "lambda(t) for a list of (amplitude, frequency) tones");

    m.def("derived_rates",
          [](const std::vector<std::pair<complex, double>>& tones, double kappa, double beta) {
              const SystemParams sys = system_from(1000.0, kappa, beta, 0.0);
              return derived_rates(validate_modulation(tones_from(tones), sys), sys);
          },
          py::arg("tones"), py::arg("kappa") = 1.0, py::arg("beta") = 0.0);

    m.def("squeeze_params", &squeeze_params, py::arg("lambda_1"));
    m.def("quadrature_stats", &quadrature_stats, py::arg("moments"));
    m.def("closed_form_moments",
          [](double delta_kappa, double t, double kappa) {
              const DerivedRates r{delta_kappa, kappa - delta_kappa, delta_kappa / (kappa - delta_kappa),
                                   complex{std::sqrt(delta_kappa / kappa) * kappa / (kappa - delta_kappa), 0.0}};
              return closed_form_moments(r, t);
          },
          py::arg("delta_kappa"), py::arg("t"), py::arg("kappa") = 1.0,
          "Moments for a real single tone of strength delta_kappa at twice the frame frequency");

    m.def("integrate_moments",
          [](const std::vector<std::pair<complex, double>>& tones, double t_end, double tol, std::size_t count,
             double omega_r, double kappa, double beta, double chi, const std::string& qubit,
             const std::string& frame, std::optional<double> drive_photons) {
              const SystemParams sys = system_from(omega_r, kappa, beta, chi);
              std::optional<DriveSpec> drive;
              if (drive_photons) {
                  DriveSpec d;
                  d.omega_d = omega_r + chi;
                  d.strength = PhotonTarget{*drive_photons};
                  drive = d;
              }
              const EvolutionContext ctx(sys, validate_modulation(tones_from(tones), sys), qubit_from(qubit), drive,
                                         frame_from(frame));
              const MomentTrajectory tr = integrate_moments(ctx, t_end, tol, count);
              return py::make_tuple(tr.times, tr.moments);
          },
          py::arg("tones"), py::arg("t_end"), py::arg("tol") = 1e-10, py::arg("count") = 200,
          py::arg("omega_r") = 1000.0, py::arg("kappa") = 1.0, py::arg("beta") = 0.0, py::arg("chi") = 0.0,
          py::arg("qubit") = "none", py::arg("frame") = "resonator", py::arg("drive_photons") = py::none(),
          "Integrate the moment equations; returns (times, moments)");

    m.def("beta_variance_min",
          [](double beta, double kappa) {
              const BetaOptimum o = beta_variance_min(beta, kappa);
              return py::make_tuple(o.delta_kappa_opt, o.var_x_min);
          },
          py::arg("beta"), py::arg("kappa") = 1.0);
    m.def("beta_variance_curve", &beta_variance_curve, py::arg("delta_kappa"), py::arg("beta"), py::arg("kappa") = 1.0);
    m.def("squeezed_frame_residual", &squeezed_frame_residual, py::arg("moments"), py::arg("params"));

    m.def("marginal_gaussian", &marginal_gaussian, py::arg("moments"), py::arg("phi") = 0.0);
    m.def("overlap_error", &overlap_error, py::arg("m0"), py::arg("m1"));
    m.def("emin_bichromatic", &emin_bichromatic, py::arg("epsilon"), py::arg("kappa"), py::arg("delta_kappa"));
    m.def("wigner_value", &wigner_value, py::arg("moments"), py::arg("alpha"));

    m.def("transfer_phase", &transfer_phase, py::arg("omega"), py::arg("omega_r"), py::arg("gamma"));
    m.def("transfer_deviation",
          [](double omega, double omega_r, double kappa, double lambda_1) {
              const TransferPoint p = transfer_matrices(omega, omega_r, kappa, lambda_1);
              return py::make_tuple(p.phase, p.deviation);
          },
          py::arg("omega"), py::arg("omega_r"), py::arg("kappa"), py::arg("lambda_1"),
          "(phase, max |M^-1(-w) M(w) - e^{i phase} I|)");

    m.def("bessel_j", &bessel_j, py::arg("n"), py::arg("x"));
    m.def("freqmod_stats",
          [](double z, std::vector<double> profile) {
              return freqmod_stats(FreqModSpec::from_z(z), KappaProfile{std::move(profile)});
          },
          py::arg("z"), py::arg("kappa_profile") = std::vector<double>{1.0});

    m.def("calibrate_drive", &calibrate_drive, py::arg("gamma"), py::arg("target_photons"));
    m.def("baseline_error", &baseline_error, py::arg("target_photons"));
    m.def("error_curve",
          [](const std::string& mode, double chi, double photons, std::vector<double> grid, const std::string& engine,
             unsigned jobs) {
              ReadoutScenario sc;
              sc.mode = mode == "bichromatic" ? ReadoutMode::bichromatic : ReadoutMode::mono;
              if (mode != "mono" && mode != "bichromatic") throw std::invalid_argument("mode must be mono or bichromatic");
              sc.chi = chi;
              sc.target_photons = photons;
              sc.delta_kappa_grid = std::move(grid);
              sc.engine = parse_engine(engine);
              sc.jobs = jobs;
              ErrorCurve c;
              {
                  py::gil_scoped_release release;
                  c = scenario_error_curve(sc);
              }
              std::vector<double> dk, err, factor;
              for (const auto& p : c.points) {
                  dk.push_back(p.delta_kappa);
                  err.push_back(p.error);
                  factor.push_back(p.factor);
              }
              py::dict d;
              d["delta_kappa"] = dk;
              d["error"] = err;
              d["factor"] = factor;
              d["optimum"] = c.optimum;
              d["baseline"] = c.baseline;
              return d;
          },
          py::arg("mode") = "mono", py::arg("chi") = 10.0, py::arg("photons") = 10.0,
          py::arg("grid") = std::vector<double>{}, py::arg("engine") = "gaussian", py::arg("jobs") = 0u);

    m.def("fock_steady_moments",
          [](double delta_kappa, std::size_t N, double t_end) {
              SystemParams sys;
              const EvolutionContext ctx(
                  sys, validate_modulation(ModulationSpec{{Tone{std::sqrt(delta_kappa), 2.0 * sys.omega_r}}}, sys));
              const std::vector<double> times{t_end};
              FockTrajectory tr;
              {
                  py::gil_scoped_release release;
                  tr = integrate_rho(ctx, N, times);
              }
              return moments_from_rho(tr.states.back());
          },
          py::arg("delta_kappa"), py::arg("N") = 40, py::arg("t_end") = 20.0,
          "Fock-oracle moments of a single resonant tone after t_end");

    m.def("run_experiment",
          [](const std::string& name, const std::string& out_dir, const std::string& config_text,
             const std::string& format) {
              ExperimentOptions opts;
              opts.experiment = name;
              opts.config = parse_config(config_text);
              opts.out_dir = out_dir;
              opts.format = parse_format(format);
              ExperimentResult r;
              {
                  py::gil_scoped_release release;
                  r = run_experiment(opts);
              }
              const auto files = write_tables(r, opts.out_dir, opts.format);
              write_manifest(r, opts, files, 0.0, opts.out_dir);
              return files;
          },
          py::arg("name"), py::arg("out_dir"), py::arg("config") = "", py::arg("format") = "csv",
          "Run a named experiment and return the written file names");

    m.def("experiment_names", &experiment_names);
}
