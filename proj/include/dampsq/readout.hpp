// readout.hpp - qubit-state-dependent squeezing and the resulting readout
// error: error-versus-modulation curves for one- and two-tone modulation and
// the time-resolved error trace.
//
// Conventions: the qubit pulls the cavity to omega_r + chi sigma_z, the
// resonator is driven at omega_r + chi (resonant with the excited branch), and
// all moments are expressed in that drive frame. The homodyne axis is phi.

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dampsq/fock.hpp"
#include "dampsq/gaussian.hpp"
#include "dampsq/measurement.hpp"

namespace dampsq {

enum class ReadoutMode { mono, bichromatic };
enum class Engine { gaussian, fock };
// Mono ground branch: full moment equations, or the thermal approximation
// (n = n_bar, s = 0, <a> = 0).
enum class GroundTreatment { exact, thermal };
// Two-tone moments: leading-order long-time form, or integrated equations.
enum class BichromaticSource { leading_order, ode };

struct ReadoutScenario {
    ReadoutMode mode{ReadoutMode::mono};
    double chi{10.0};
    double kappa{1.0};
    double omega_r{1000.0};
    double target_photons{10.0};
    std::vector<double> delta_kappa_grid;  // empty selects 0.01, 0.02, ..., 0.90 (times kappa)
    Engine engine{Engine::gaussian};
    bool stroboscopic{true};
    GroundTreatment ground{GroundTreatment::thermal};
    BichromaticSource bichromatic_source{BichromaticSource::leading_order};
    double phi{0.0};
    std::size_t strobe_samples{64};
    double tol{1e-10};
    std::size_t fock_truncation{0};  // 0 selects suggest_truncation
    unsigned jobs{0};                // 0 selects the hardware concurrency

    // Throws std::invalid_argument for grid points outside (0, kappa) or
    // non-positive rates.
    void validate() const;
    std::vector<double> grid() const;
    // Text of the weak-dispersion warning, if chi < 5 kappa.
    std::optional<std::string> warning() const;
};

// Tones for a modulation of total strength delta_kappa: one tone
// sqrt(dk / kappa) at 2 (omega_r + chi), or two tones sqrt(dk / 2 kappa) at
// 2 (omega_r -/+ chi).
ModulationSpec readout_modulation(const ReadoutScenario& sc, double delta_kappa);

// Drive at omega_r + chi calibrated to the target photon number of the
// excited branch.
DriveSpec readout_drive(const ReadoutScenario& sc);

EvolutionContext branch_context(const ReadoutScenario& sc, double delta_kappa, QubitState q);

struct BranchPair {
    double time{0.0};
    GaussianMoments ground;
    GaussianMoments excited;
};

struct PointResult {
    double delta_kappa{0.0};
    double error{0.5};
    BranchPair at_optimum;  // moments at the strobe time that gave the error
    std::size_t strobe_index{0};
    std::optional<StateDiagnostics> oracle;  // worst Fock diagnostics, fock engine only
};

// Error of one grid point. With periodic forcing the error is minimized over
// the strobe samples when the scenario is stroboscopic and averaged over them
// otherwise.
PointResult evaluate_point(const ReadoutScenario& sc, double delta_kappa);

// Settled moments of both branches at strobe_samples equally spaced times
// over one forcing period (a single sample for static steady states).
std::vector<BranchPair> settled_branches(const ReadoutScenario& sc, double delta_kappa);

// 1/2 erfc(sqrt(target / 2)): equal sigma = 1/2 marginals separated by
// sqrt(target).
double baseline_error(double target_photons);

struct ErrorPoint {
    double delta_kappa{0.0};
    double error{0.5};
    double factor{1.0};  // baseline / error
};

struct Optimum {
    double delta_kappa{0.0};
    double error{0.5};
    double factor{1.0};
};

struct ErrorCurve {
    std::vector<ErrorPoint> points;
    std::vector<PointResult> details;
    Optimum optimum;
    double baseline{0.5};
    std::vector<std::string> warnings;
};

// Three-point parabolic refinement around the smallest error.
Optimum parabolic_optimum(std::span<const ErrorPoint> points, double baseline);

// Evaluates the grid with sc.jobs worker threads; results are merged in grid
// order.
ErrorCurve scenario_error_curve(const ReadoutScenario& sc);

struct ErrorTrace {
    std::vector<double> times;
    std::vector<double> error;
    double period{0.0};          // 2 pi / (4 chi)
    double last_period_min{0.0};
    double last_period_max{0.0};
    double peak_frequency{0.0};  // angular frequency from the mean peak spacing
};

// E(t) of the two-tone readout from vacuum with the drive switched on at t = 0.
ErrorTrace error_vs_time(const ReadoutScenario& sc, double delta_kappa, std::span<const double> times);

// Angular frequency 2 pi / <spacing> of the local maxima of y(t) at t >=
// t_from, with parabolic peak interpolation. Returns 0 with fewer than two
// peaks.
double peak_spacing_frequency(std::span<const double> t, std::span<const double> y, double t_from);

// Runs fn(i) for i in [0, count) on up to jobs threads. The first exception
// by index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

void write_error_curve_csv(std::ostream& os, const ErrorCurve& curve);
void write_trace_csv(std::ostream& os, const ErrorTrace& trace);

}  // namespace dampsq
