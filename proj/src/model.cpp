#include "dampsq/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dampsq {

void SystemParams::validate() const {
    if (!(omega_r > 0.0) || !std::isfinite(omega_r)) {
        throw std::invalid_argument("SystemParams: omega_r must be positive");
    }
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("SystemParams: kappa must be positive");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("SystemParams: beta must be non-negative");
    }
    if (!(chi >= 0.0) || !std::isfinite(chi)) {
        throw std::invalid_argument("SystemParams: chi must be non-negative");
    }
}

std::optional<complex> ValidatedModulation::single_amplitude() const {
    if (tones_.size() != 1) return std::nullopt;
    return tones_.front().amplitude;
}

double effective_gamma(double sum_sq, const SystemParams& sys) {
    return sys.kappa * (1.0 + (sys.beta - 1.0) * sum_sq);
}

ValidatedModulation validate_modulation(const ModulationSpec& mod, const SystemParams& sys) {
    sys.validate();
    if (mod.tones.size() > max_tones) {
        std::ostringstream os;
        os << "modulation has " << mod.tones.size() << " tones, at most " << max_tones
           << " are supported";
        throw ModulationError(ModulationErrorKind::too_many_tones, os.str());
    }
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < mod.tones.size(); ++i) {
        const Tone& tone = mod.tones[i];
        if (!std::isfinite(tone.frequency) || !std::isfinite(tone.amplitude.real()) ||
            !std::isfinite(tone.amplitude.imag())) {
            throw std::invalid_argument("modulation tone has a non-finite field");
        }
        if (tone.frequency == 0.0) {
            throw ModulationError(ModulationErrorKind::zero_frequency_tone,
                                  "tone " + std::to_string(i) + " has zero frequency");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const double scale = std::max(1.0, std::abs(tone.frequency));
            if (std::abs(mod.tones[j].frequency - tone.frequency) <= 1e-12 * scale) {
                throw ModulationError(ModulationErrorKind::duplicate_tone,
                                      "tones " + std::to_string(j) + " and " + std::to_string(i) +
                                          " share the same frequency");
            }
        }
        sum_sq += std::norm(tone.amplitude);
    }
    if (!(effective_gamma(sum_sq, sys) > 0.0)) {
        std::ostringstream os;
        os << "modulation is overdriven: sum |lambda_n|^2 = " << sum_sq
           << " leaves no positive relaxation rate";
        throw ModulationError(ModulationErrorKind::overdriven, os.str());
    }

    ValidatedModulation out;
    out.spec_ = mod;
    out.tones_ = mod.tones;
    out.sum_sq_ = sum_sq;
    return out;
}

complex lambda_at(const ModulationSpec& mod, double t) {
    complex sum{0.0, 0.0};
    for (const Tone& tone : mod.tones) {
        sum += tone.amplitude * std::polar(1.0, tone.frequency * t);
    }
    return sum;
}

complex lambda_at(const ValidatedModulation& mod, double t) { return lambda_at(mod.spec(), t); }

complex lambda_in_frame(const ValidatedModulation& mod, double frame_frequency, double t) {
    complex sum{0.0, 0.0};
    for (const Tone& tone : mod.tones()) {
        const double detuning = tone.frequency - 2.0 * frame_frequency;
        sum += tone.amplitude * std::polar(1.0, detuning * t);
    }
    return sum;
}

DerivedRates derived_rates(const ValidatedModulation& mod, const SystemParams& sys) {
    DerivedRates rates;
    rates.delta_kappa = mod.sum_sq() * sys.kappa;
    rates.gamma = sys.kappa - (1.0 - sys.beta) * rates.delta_kappa;
    if (!(rates.gamma > 0.0)) {
        throw ModulationError(ModulationErrorKind::overdriven,
                              "effective relaxation rate is not positive");
    }
    rates.n_bar = rates.delta_kappa / rates.gamma;
    if (auto lambda_1 = mod.single_amplitude()) {
        rates.m = *lambda_1 * sys.kappa / rates.gamma;
    } else if (mod.empty()) {
        rates.m = complex{0.0, 0.0};
    }
    return rates;
}

SqueezeParams squeeze_params(complex lambda_1) {
    const double mag = std::abs(lambda_1);
    if (!(mag < 1.0)) {
        throw DomainError("squeeze_params: |lambda_1| must be below 1");
    }
    SqueezeParams sp;
    sp.r = std::atanh(mag);
    sp.theta = mag == 0.0 ? 0.0 : -std::arg(lambda_1);
    return sp;
}

double pulled_frequency(const SystemParams& sys, QubitState q) {
    return sys.omega_r + sys.chi * sigma_z(q);
}

double calibrate_drive(double gamma, double target_photons) {
    if (!(gamma > 0.0)) throw std::invalid_argument("calibrate_drive: gamma must be positive");
    if (!(target_photons >= 0.0)) {
        throw std::invalid_argument("calibrate_drive: target_photons must be non-negative");
    }
    return gamma * std::sqrt(target_photons) / 2.0;
}

double DriveSpec::epsilon(double gamma) const {
    if (const auto* amp = std::get_if<DriveAmplitude>(&strength)) return amp->epsilon;
    return calibrate_drive(gamma, std::get<PhotonTarget>(strength).photons);
}

void DriveSpec::validate() const {
    if (!std::isfinite(omega_d) || !std::isfinite(phase)) {
        throw std::invalid_argument("DriveSpec: non-finite frequency or phase");
    }
    if (const auto* amp = std::get_if<DriveAmplitude>(&strength)) {
        if (!(amp->epsilon >= 0.0)) throw std::invalid_argument("DriveSpec: epsilon must be >= 0");
    } else if (!(std::get<PhotonTarget>(strength).photons >= 0.0)) {
        throw std::invalid_argument("DriveSpec: target_photons must be >= 0");
    }
}

}  // namespace dampsq
