// model.hpp - system parameters, damping-modulation tone lists and the
// effective rates they induce.
//
// Units: every rate and frequency is expressed in units of the bare damping
// rate kappa (kappa = 1 by default). Absolute frequencies only enter through
// differences against a rotating frame.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "dampsq/errors.hpp"

namespace dampsq {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

struct SystemParams {
    double omega_r{1000.0};  // resonator frequency
    double kappa{1.0};       // bare damping rate
    double beta{0.0};        // kappa(3 omega_r) / kappa
    double chi{0.0};         // dispersive pull

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct Tone {
    complex amplitude;  // lambda_n, dimensionless
    double frequency;   // omega_n
};

// lambda(t) = sum_n lambda_n exp(i omega_n t). The constant "1" of the
// coupling envelope 1 + lambda(t) is implicit and never listed.
struct ModulationSpec {
    std::vector<Tone> tones;
};

inline constexpr std::size_t max_tones = 8;

// A tone list that passed validate_modulation(). Immutable.
class ValidatedModulation {
public:
    const std::vector<Tone>& tones() const noexcept { return tones_; }
    std::size_t size() const noexcept { return tones_.size(); }
    bool empty() const noexcept { return tones_.empty(); }

    // sum_n |lambda_n|^2
    double sum_sq() const noexcept { return sum_sq_; }

    // Amplitude of the only tone, if there is exactly one.
    std::optional<complex> single_amplitude() const;

    const ModulationSpec& spec() const noexcept { return spec_; }

private:
    friend ValidatedModulation validate_modulation(const ModulationSpec&, const SystemParams&);

    ModulationSpec spec_;
    std::vector<Tone> tones_;
    double sum_sq_{0.0};
};

// Rejects zero-frequency or duplicated tones, more than max_tones tones, and
// modulations whose average relaxation rate kappa (1 + (beta - 1) sum|lambda|^2)
// is not strictly positive.
ValidatedModulation validate_modulation(const ModulationSpec& mod, const SystemParams& sys);

// Laboratory-frame modulation lambda(t).
complex lambda_at(const ModulationSpec& mod, double t);
complex lambda_at(const ValidatedModulation& mod, double t);

// Coefficient multiplying the squeezing superoperator S[a] in a frame rotating
// at frame_frequency, divided by kappa: lambda(t) exp(-2 i omega_f t). Only
// the detunings omega_n - 2 omega_f are formed, so large absolute frequencies
// do not accumulate phase error.
complex lambda_in_frame(const ValidatedModulation& mod, double frame_frequency, double t);

struct DerivedRates {
    double delta_kappa{0.0};  // sum|lambda_n|^2 kappa
    double gamma{0.0};        // kappa - (1 - beta) delta_kappa
    double n_bar{0.0};        // delta_kappa / gamma
    std::optional<complex> m;  // lambda_1 kappa / gamma, single-tone specs only
};

DerivedRates derived_rates(const ValidatedModulation& mod, const SystemParams& sys);

// Average relaxation rate for a total modulation power sum|lambda|^2.
double effective_gamma(double sum_sq, const SystemParams& sys);

struct SqueezeParams {
    double r{0.0};      // arctanh |lambda_1|
    double theta{0.0};  // -arg lambda_1
};

// Throws DomainError for |lambda_1| >= 1.
SqueezeParams squeeze_params(complex lambda_1);

enum class QubitState { ground, excited };

constexpr int sigma_z(QubitState q) noexcept { return q == QubitState::excited ? 1 : -1; }

// omega_r + chi sigma_z
double pulled_frequency(const SystemParams& sys, QubitState q);

struct DriveAmplitude {
    double epsilon{0.0};
};

// Requested steady |<a>|^2 of a resonantly driven branch.
struct PhotonTarget {
    double photons{0.0};
};

// Coherent drive H_d = epsilon (e^{i phase} a^dag + e^{-i phase} a) at omega_d.
// The default phase pi/2 makes the resonant steady displacement real and
// positive, <a> = 2 epsilon / Gamma.
struct DriveSpec {
    double omega_d{0.0};
    std::variant<DriveAmplitude, PhotonTarget> strength{DriveAmplitude{}};
    double phase{pi / 2};

    // Resolved amplitude; a photon target is converted with calibrate_drive.
    double epsilon(double gamma) const;
    void validate() const;
};

// epsilon = Gamma sqrt(target_photons) / 2, so that |<a>|^2 = target_photons
// for a resonantly driven branch relaxing at Gamma.
double calibrate_drive(double gamma, double target_photons);

}  // namespace dampsq
