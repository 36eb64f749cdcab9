#include "dampsq/readout.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dampsq/csv.hpp"

namespace dampsq {

void ReadoutScenario::validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("readout: kappa must be positive");
    if (!(chi >= 0.0)) throw std::invalid_argument("readout: chi must be non-negative");
    if (!(omega_r > 2.0 * chi)) throw std::invalid_argument("readout: omega_r must exceed 2 chi");
    if (!(target_photons >= 0.0)) throw std::invalid_argument("readout: target_photons must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("readout: tol must be positive");
    if (strobe_samples == 0) throw std::invalid_argument("readout: strobe_samples must be positive");
    for (double dk : grid()) {
        if (!(dk > 0.0) || !(dk < kappa)) {
            std::ostringstream os;
            os << "readout: grid point delta_kappa = " << dk << " outside (0, kappa)";
            throw std::invalid_argument(os.str());
        }
    }
}

std::vector<double> ReadoutScenario::grid() const {
    if (!delta_kappa_grid.empty()) return delta_kappa_grid;
    std::vector<double> g;
    for (int i = 1; i <= 90; ++i) g.push_back(kappa * i / 100.0);
    return g;
}

std::optional<std::string> ReadoutScenario::warning() const { return dispersive_regime_warning(chi, kappa); }

ModulationSpec readout_modulation(const ReadoutScenario& sc, double delta_kappa) {
    ModulationSpec mod;
    if (delta_kappa == 0.0) return mod;
    if (sc.mode == ReadoutMode::mono) {
        mod.tones.push_back({std::sqrt(delta_kappa / sc.kappa), 2.0 * (sc.omega_r + sc.chi)});
    } else {
        const double amp = std::sqrt(delta_kappa / (2.0 * sc.kappa));
        mod.tones.push_back({amp, 2.0 * (sc.omega_r - sc.chi)});
        mod.tones.push_back({amp, 2.0 * (sc.omega_r + sc.chi)});
    }
    return mod;
}

DriveSpec readout_drive(const ReadoutScenario& sc) {
    DriveSpec d;
    d.omega_d = sc.omega_r + sc.chi;
    d.strength = PhotonTarget{sc.target_photons};
    return d;
}

EvolutionContext branch_context(const ReadoutScenario& sc, double delta_kappa, QubitState q) {
    SystemParams sys;
    sys.omega_r = sc.omega_r;
    sys.kappa = sc.kappa;
    sys.chi = sc.chi;
    const ValidatedModulation mod = validate_modulation(readout_modulation(sc, delta_kappa), sys);
    return EvolutionContext(sys, mod, q, readout_drive(sc), FrameChoice::drive);
}

double baseline_error(double target_photons) { return 0.5 * std::erfc(std::sqrt(target_photons / 2.0)); }

namespace {

double pair_error(const BranchPair& p, double phi) {
    return overlap_error(marginal_gaussian(p.ground, phi), marginal_gaussian(p.excited, phi)).error;
}

std::vector<double> strobe_times(double start, double period, std::size_t samples) {
    std::vector<double> t(samples);
    for (std::size_t k = 0; k < samples; ++k) t[k] = start + period * static_cast<double>(k) / static_cast<double>(samples);
    return t;
}

std::vector<BranchPair> leading_order_pairs(const ReadoutScenario& sc, double dk) {
    BichromaticParams p;
    p.lambda_0 = p.lambda_1 = std::sqrt(dk / (2.0 * sc.kappa));
    p.chi = sc.chi;
    p.kappa = sc.kappa;
    p.omega_r = sc.omega_r;
    p.epsilon = calibrate_drive(sc.kappa - dk, sc.target_photons);
    const double period = 2.0 * pi / (4.0 * sc.chi);
    std::vector<BranchPair> out;
    for (double t : strobe_times(0.0, period, sc.strobe_samples)) {
        out.push_back({t, bichromatic_approx_moments(p, QubitState::ground, t),
                       bichromatic_approx_moments(p, QubitState::excited, t)});
    }
    return out;
}

std::vector<BranchPair> thermal_mono_pairs(const ReadoutScenario& sc, double dk) {
    SystemParams sys;
    sys.omega_r = sc.omega_r;
    sys.kappa = sc.kappa;
    sys.chi = sc.chi;
    const DerivedRates rates = derived_rates(validate_modulation(readout_modulation(sc, dk), sys), sys);
    const double frame = sc.omega_r + sc.chi;
    BranchPair p;
    p.excited = GaussianMoments{complex{std::sqrt(sc.target_photons), 0.0}, rates.n_bar,
                                -std::conj(rates.m.value_or(complex{})), frame};
    p.ground = GaussianMoments{complex{}, rates.n_bar, complex{}, frame};
    return {p};
}

// Settled moments of one branch at the common strobe times.
std::vector<GaussianMoments> ode_branch(const EvolutionContext& ctx, double start, std::span<const double> times,
                                        double tol) {
    const SettledState settled = settle(ctx, tol);
    IntegrationOptions opts;
    opts.tol = tol;
    opts.t0 = settled.time;
    opts.initial = settled.moments;
    std::vector<double> shifted(times.begin(), times.end());
    for (double& t : shifted) t += settled.time - start;
    return integrate_moments(ctx, shifted, opts).moments;
}

double common_period(const ReadoutScenario& sc) {
    return sc.mode == ReadoutMode::bichromatic ? 2.0 * pi / (4.0 * sc.chi) : 0.0;
}

std::vector<BranchPair> ode_pairs(const ReadoutScenario& sc, double dk) {
    const EvolutionContext g = branch_context(sc, dk, QubitState::ground);
    const EvolutionContext e = branch_context(sc, dk, QubitState::excited);
    const double period = common_period(sc);
    const std::vector<double> times =
        period > 0.0 ? strobe_times(0.0, period, sc.strobe_samples) : std::vector<double>{0.0};
    const auto gm = ode_branch(g, 0.0, times, sc.tol);
    const auto em = ode_branch(e, 0.0, times, sc.tol);
    std::vector<BranchPair> out;
    for (std::size_t k = 0; k < times.size(); ++k) out.push_back({times[k], gm[k], em[k]});
    return out;
}

struct FockBranches {
    std::vector<FockState> ground;
    std::vector<FockState> excited;
    std::vector<double> times;
    StateDiagnostics worst;
};

FockTrajectory fock_branch(const ReadoutScenario& sc, const EvolutionContext& ctx,
                           std::span<const double> times) {
    FockOptions opts;
    if (sc.fock_truncation > 0) return integrate_rho(ctx, sc.fock_truncation, times, opts);
    return integrate_rho_adaptive(ctx, times, opts);
}

FockBranches fock_pairs(const ReadoutScenario& sc, double dk) {
    const EvolutionContext g = branch_context(sc, dk, QubitState::ground);
    const EvolutionContext e = branch_context(sc, dk, QubitState::excited);
    const double gamma = sc.kappa - dk;
    const double period = common_period(sc);
    double start = 20.0 / gamma;
    std::vector<double> times{start};
    if (period > 0.0) {
        start = std::ceil(start / period) * period;
        times = strobe_times(start, period, sc.strobe_samples);
    }
    FockBranches out;
    out.times = times;
    const FockTrajectory tg = fock_branch(sc, g, times);
    const FockTrajectory te = fock_branch(sc, e, times);
    out.ground = tg.states;
    out.excited = te.states;
    for (const auto& d : tg.diagnostics) out.worst = worst_of(out.worst, d);
    for (const auto& d : te.diagnostics) out.worst = worst_of(out.worst, d);
    return out;
}

double fock_error(const FockState& g, const FockState& e, double phi) {
    const MarginalStats mg = marginal_gaussian(moments_from_rho(g), phi);
    const MarginalStats me = marginal_gaussian(moments_from_rho(e), phi);
    const auto grid = overlap_grid(mg, me, 2048);
    return overlap_error_numeric(marginal_from_rho(g, phi, grid), marginal_from_rho(e, phi, grid)).error;
}

PointResult select(const ReadoutScenario& sc, double dk, const std::vector<BranchPair>& pairs,
                   const std::vector<double>& errors) {
    PointResult r;
    r.delta_kappa = dk;
    const auto best = std::min_element(errors.begin(), errors.end()) - errors.begin();
    r.strobe_index = static_cast<std::size_t>(best);
    r.at_optimum = pairs[r.strobe_index];
    if (sc.stroboscopic || errors.size() == 1) {
        r.error = errors[r.strobe_index];
    } else {
        r.error = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    }
    return r;
}

}  // namespace

std::vector<BranchPair> settled_branches(const ReadoutScenario& sc, double delta_kappa) {
    if (sc.engine == Engine::fock) {
        const FockBranches f = fock_pairs(sc, delta_kappa);
        std::vector<BranchPair> out;
        for (std::size_t k = 0; k < f.times.size(); ++k) {
            out.push_back({f.times[k], moments_from_rho(f.ground[k]), moments_from_rho(f.excited[k])});
        }
        return out;
    }
    if (sc.mode == ReadoutMode::mono) {
        if (sc.ground == GroundTreatment::thermal) return thermal_mono_pairs(sc, delta_kappa);
        return ode_pairs(sc, delta_kappa);
    }
    if (sc.bichromatic_source == BichromaticSource::leading_order) return leading_order_pairs(sc, delta_kappa);
    return ode_pairs(sc, delta_kappa);
}

PointResult evaluate_point(const ReadoutScenario& sc, double delta_kappa) {
    if (sc.engine == Engine::fock) {
        const FockBranches f = fock_pairs(sc, delta_kappa);
        std::vector<BranchPair> pairs;
        std::vector<double> errors;
        for (std::size_t k = 0; k < f.times.size(); ++k) {
            pairs.push_back({f.times[k], moments_from_rho(f.ground[k]), moments_from_rho(f.excited[k])});
            errors.push_back(fock_error(f.ground[k], f.excited[k], sc.phi));
        }
        PointResult r = select(sc, delta_kappa, pairs, errors);
        r.oracle = f.worst;
        return r;
    }
    const auto pairs = settled_branches(sc, delta_kappa);
    std::vector<double> errors;
    errors.reserve(pairs.size());
    for (const auto& p : pairs) errors.push_back(pair_error(p, sc.phi));
    return select(sc, delta_kappa, pairs, errors);
}

Optimum parabolic_optimum(std::span<const ErrorPoint> points, double baseline) {
    if (points.empty()) throw std::invalid_argument("parabolic_optimum: no points");
    std::size_t i = 0;
    for (std::size_t k = 1; k < points.size(); ++k)
        if (points[k].error < points[i].error) i = k;
    Optimum o{points[i].delta_kappa, points[i].error, baseline / points[i].error};
    if (i == 0 || i + 1 == points.size()) return o;

    const double x0 = points[i - 1].delta_kappa, x1 = points[i].delta_kappa, x2 = points[i + 1].delta_kappa;
    const double y0 = points[i - 1].error, y1 = points[i].error, y2 = points[i + 1].error;
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double a = (d12 - d01) / (x2 - x0);
    if (!(a > 0.0)) return o;
    const double b = d01 - a * (x0 + x1);
    const double xv = std::clamp(-b / (2.0 * a), x0, x2);
    // y(x) = y0 + d01 (x - x0) + a (x - x0)(x - x1)
    const double y = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1);
    o.delta_kappa = xv;
    o.error = std::min(y, y1);
    o.factor = baseline / o.error;
    return o;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(jobs, count);
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ErrorCurve scenario_error_curve(const ReadoutScenario& sc) {
    sc.validate();
    ErrorCurve curve;
    if (auto w = sc.warning()) curve.warnings.push_back(*w);
    curve.baseline = baseline_error(sc.target_photons);
    const std::vector<double> grid = sc.grid();
    curve.details.resize(grid.size());
    parallel_for(grid.size(), sc.jobs, [&](std::size_t i) { curve.details[i] = evaluate_point(sc, grid[i]); });
    for (const auto& d : curve.details) {
        curve.points.push_back({d.delta_kappa, d.error, curve.baseline / d.error});
    }
    curve.optimum = parabolic_optimum(curve.points, curve.baseline);
    return curve;
}

double peak_spacing_frequency(std::span<const double> t, std::span<const double> y, double t_from) {
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (t[i] < t_from) continue;
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
            double shift = 0.0;
            if (denom != 0.0) shift = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            const double h = 0.5 * (t[i + 1] - t[i - 1]);
            peaks.push_back(t[i] + shift * h);
        }
    }
    if (peaks.size() < 2) return 0.0;
    const double spacing = (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
    return 2.0 * pi / spacing;
}

ErrorTrace error_vs_time(const ReadoutScenario& sc, double delta_kappa, std::span<const double> times) {
    if (sc.mode != ReadoutMode::bichromatic) throw std::invalid_argument("error_vs_time: requires the two-tone mode");
    if (times.empty()) throw std::invalid_argument("error_vs_time: empty time grid");
    const EvolutionContext g = branch_context(sc, delta_kappa, QubitState::ground);
    const EvolutionContext e = branch_context(sc, delta_kappa, QubitState::excited);
    IntegrationOptions opts;
    opts.tol = sc.tol;
    const auto gm = integrate_moments(g, times, opts).moments;
    const auto em = integrate_moments(e, times, opts).moments;

    ErrorTrace tr;
    tr.times.assign(times.begin(), times.end());
    tr.period = 2.0 * pi / (4.0 * sc.chi);
    for (std::size_t k = 0; k < times.size(); ++k) {
        tr.error.push_back(pair_error(BranchPair{times[k], gm[k], em[k]}, sc.phi));
    }
    const double t_end = times.back();
    tr.last_period_min = 1.0;
    tr.last_period_max = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_end - tr.period) continue;
        tr.last_period_min = std::min(tr.last_period_min, tr.error[k]);
        tr.last_period_max = std::max(tr.last_period_max, tr.error[k]);
    }
    const double transient = std::min(10.0 / (sc.kappa - delta_kappa), 0.5 * t_end);
    tr.peak_frequency = peak_spacing_frequency(tr.times, tr.error, transient);
    return tr;
}

void write_error_curve_csv(std::ostream& os, const ErrorCurve& curve) {
    CsvWriter csv(os);
    csv.header({"delta_kappa", "E", "factor"});
    for (const auto& p : curve.points) csv.row({p.delta_kappa, p.error, p.factor});
}

void write_trace_csv(std::ostream& os, const ErrorTrace& trace) {
    CsvWriter csv(os);
    csv.header({"t", "E"});
    for (std::size_t k = 0; k < trace.times.size(); ++k) csv.row({trace.times[k], trace.error[k]});
}

}  // namespace dampsq
