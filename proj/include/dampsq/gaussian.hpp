// gaussian.hpp - Gaussian-state dynamics of the damping-modulated resonator.
//
// A Gaussian field state is carried by its mean <a> and the centered moments
// n = <b^dag b>, s = <b^2> with b = a - <a>. Quadratures follow the
// convention where the vacuum variance is 1.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dampsq/model.hpp"

namespace dampsq {

struct GaussianMoments {
    complex mean{0.0, 0.0};
    double n{0.0};
    complex s{0.0, 0.0};
    double frame{0.0};  // rotating-frame frequency these moments are expressed in

    static GaussianMoments vacuum(double frame = 0.0) { return GaussianMoments{{}, 0.0, {}, frame}; }
};

struct QuadratureStats {
    double var_x{1.0};  // squeezed-axis variance, vacuum = 1
    double var_y{1.0};
    double theta{0.0};  // pi + arg(s); 0 when s = 0
};

QuadratureStats quadrature_stats(const GaussianMoments& m);

// Symmetrized covariance of (Re alpha, Im alpha) in the Wigner plane, row-major
// {xx, xy, yx, yy}. The vacuum gives diag(1/4, 1/4).
std::array<double, 4> quadrature_covariance(const GaussianMoments& m);

// Frame the moments are expressed in.
enum class FrameChoice {
    resonator,     // omega_r
    excited_pull,  // omega_r + chi
    drive,         // omega_d
};

// Everything one integration needs. Immutable after construction.
class EvolutionContext {
public:
    EvolutionContext(SystemParams sys, ValidatedModulation mod,
                     std::optional<QubitState> qubit = std::nullopt,
                     std::optional<DriveSpec> drive = std::nullopt,
                     FrameChoice frame = FrameChoice::resonator);

    const SystemParams& sys() const noexcept { return sys_; }
    const ValidatedModulation& modulation() const noexcept { return mod_; }
    const std::optional<QubitState>& qubit() const noexcept { return qubit_; }
    const std::optional<DriveSpec>& drive() const noexcept { return drive_; }
    FrameChoice frame() const noexcept { return frame_; }
    const DerivedRates& rates() const noexcept { return rates_; }

    double frame_frequency() const noexcept { return frame_frequency_; }
    // omega_r + chi sigma_z, or omega_r without a qubit.
    double cavity_frequency() const noexcept { return cavity_frequency_; }
    // Delta = omega_c - omega_f
    double detuning() const noexcept { return cavity_frequency_ - frame_frequency_; }
    // Resolved drive amplitude (0 without a drive).
    double epsilon() const noexcept { return epsilon_; }

    // lambda(t) e^{-2 i omega t} for an arbitrary frame omega.
    complex squeeze_coefficient(double frame_frequency, double t) const;
    // Drive amplitude eta(t) in H = eta a^dag + eta^* a, frame omega.
    complex drive_coefficient(double frame_frequency, double t) const;
    // kappa (1 + (beta - 1)|lambda(t)|^2)
    double gamma_at(double t) const;

    // Smallest positive period of the forcing seen in the context's frame,
    // or 0 when the equations of motion are autonomous.
    double forcing_period() const;

    // Frequencies (relative to frame omega) that appear in the coefficients.
    std::vector<double> forcing_frequencies(double frame_frequency) const;

private:
    SystemParams sys_;
    ValidatedModulation mod_;
    std::optional<QubitState> qubit_;
    std::optional<DriveSpec> drive_;
    FrameChoice frame_;
    DerivedRates rates_;
    double frame_frequency_{0.0};
    double cavity_frequency_{0.0};
    double epsilon_{0.0};
};

// n(t) = (1 - e^{-Gamma t}) n_bar, s(t) = -(1 - e^{-Gamma t}) m^*, <a> = 0.
// Requires a single-tone rate set (rates.m present); throws
// std::invalid_argument otherwise.
GaussianMoments closed_form_moments(const DerivedRates& rates, double t, double frame = 0.0);

struct IntegrationOptions {
    double tol{1e-10};
    double t0{0.0};
    std::optional<GaussianMoments> initial;  // vacuum by default
};

struct MomentTrajectory {
    std::vector<double> times;
    std::vector<GaussianMoments> moments;
};

// Integrates the moment equations in the context's frame with an adaptive
// Dormand-Prince 5(4) stepper and returns the moments at sample_times
// (non-decreasing, all >= options.t0).
//
// Throws StepFailure when the step controller cannot meet tol, and
// PhysicalityViolation when |s| exceeds sqrt(n (n + 1)) (1 + 10 tol) after a
// step.
MomentTrajectory integrate_moments(const EvolutionContext& ctx, std::span<const double> sample_times,
                                   const IntegrationOptions& options = {});

// Convenience overload sampling count + 1 equally spaced times on [0, t_end].
MomentTrajectory integrate_moments(const EvolutionContext& ctx, double t_end, double tol,
                                   std::size_t count = 200);

// Right-hand side of the moment equations; exposed for tests.
struct MomentDerivative {
    complex mean;
    double n;
    complex s;
};
MomentDerivative moment_derivative(const EvolutionContext& ctx, const GaussianMoments& m, double t);

struct SettledState {
    GaussianMoments moments;
    double time{0.0};
    double period{0.0};  // forcing period, 0 for a static steady state
    bool converged{false};
};

// Runs from vacuum until the state stops changing: for autonomous equations
// max(|d<a>/dt|, |dn/dt|, |ds/dt|) / Gamma < 1e-9; for periodic forcing the
// same test is applied to the change between stroboscopic samples one period
// apart. Gives up (converged = false) at t = 50 / Gamma.
SettledState settle(const EvolutionContext& ctx, double tol = 1e-10);

// Leading-order long-time moments for the symmetric two-tone modulation at
// 2(omega_r -/+ chi), in the frame omega_r + chi, valid for chi >> kappa.
struct BichromaticParams {
    complex lambda_0;  // tone at 2(omega_r - chi)
    complex lambda_1;  // tone at 2(omega_r + chi)
    double chi{10.0};
    double kappa{1.0};
    double omega_r{1000.0};
    double epsilon{0.0};  // resonant drive at omega_r + chi, phase pi/2

    // lambda_0 = lambda_1 = lambda / sqrt(2), i.e. delta_kappa = lambda^2 kappa.
    static BichromaticParams symmetric(double lambda, double chi, double kappa = 1.0);
};

// n = lambda^2 / (1 - lambda^2); s_1 = -m_1^*, s_0 = -m_0^* e^{4 i chi t};
// <a>_1 = 2 epsilon / Gamma, <a>_0 = 0. Throws std::invalid_argument for
// unequal tone magnitudes.
GaussianMoments bichromatic_approx_moments(const BichromaticParams& p, QubitState q, double t);

// Warning text when chi is too small for the leading-order picture.
std::optional<std::string> dispersive_regime_warning(double chi, double kappa);

struct BetaOptimum {
    double delta_kappa_opt{0.0};  // kappa / (1 + sqrt(beta))^2
    double var_x_min{0.0};        // sqrt(beta) / (1 + sqrt(beta))
};

BetaOptimum beta_variance_min(double beta, double kappa = 1.0);

// Steady squeezed variance of a single resonant tone with third-harmonic
// bath ratio beta:
// (kappa + (1 + beta) dk - 2 sqrt(kappa dk)) / (kappa - (1 - beta) dk).
double beta_variance_curve(double delta_kappa, double beta, double kappa = 1.0);

// Maps the covariance of m through the squeeze transform sp (the inverse of
// the squeezing that produces a vacuum squeezed state with parameters sp) and
// returns max |V' - V_vacuum|.
double squeezed_frame_residual(const GaussianMoments& m, const SqueezeParams& sp);

}  // namespace dampsq
