// freqmod.hpp - squeezing from a modulated resonator frequency
// H = [omega_r + delta_omega_r cos(omega_m t)] a^dag a, expressed through
// Bessel sums, and its damping-modulation equivalent.

#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "dampsq/model.hpp"

namespace dampsq {

// J_n(x) for 0 <= n <= 20, |x| <= 10, by the ascending series in extended
// precision, checked against Miller's downward recurrence. Throws DomainError
// outside that range and NumericError if the two evaluations disagree.
double bessel_j(int n, double x);

// Miller's downward recurrence alone, exposed for tests.
double bessel_j_recurrence(int n, double x);

inline constexpr double first_bessel_zero = 2.404825557695773;

struct FreqModSpec {
    double delta_omega_r{0.0};
    double omega_m{2000.0};

    double z() const { return delta_omega_r / omega_m; }
    // Throws DomainError unless 0 <= z < first zero of J_0 and omega_m > 0.
    void validate() const;

    // omega_m = 2 omega_r, delta_omega_r = 2 omega_r z.
    static FreqModSpec from_z(double z, double omega_r = 1000.0);
};

// kappa[(2k + 1) omega_r] for k = 0, 1, ...; missing entries are 0.
struct KappaProfile {
    std::vector<double> rates{1.0};

    static KappaProfile single(double kappa = 1.0) { return KappaProfile{{kappa}}; }
    bool single_kappa() const;
};

struct FreqModStats {
    double gamma{0.0};
    double n_bar{0.0};
    double m{0.0};
    double var_x{1.0};
    double var_y{1.0};
    double equiv_delta_kappa{0.0};  // kappa (J_1 / J_0)^2 with kappa = rates[0]
    std::size_t terms{0};
};

// Throws DomainError when the Bessel sums give a non-positive relaxation rate
// (J_1 > J_0 for a single kappa, z > 1.435).
FreqModStats freqmod_stats(const FreqModSpec& spec, const KappaProfile& profile = KappaProfile::single());

// kappa (J_1(z) / J_0(z))^2 for 0 <= z < first zero of J_0.
double equivalent_delta_kappa(double z, double kappa = 1.0);

struct FreqModCurvePoint {
    double z;
    double rel_amplitude;  // delta_omega_r / omega_r
    FreqModStats stats;
};

std::vector<FreqModCurvePoint> freqmod_curve(std::span<const double> rel_amplitudes, double omega_r,
                                             const KappaProfile& profile = KappaProfile::single());

// Columns delta_omega_r_over_omega_r, delta_omega_r_over_omega_m, var_x,
// var_y, equiv_delta_kappa.
void write_freqmod_csv(std::ostream& os, std::span<const FreqModCurvePoint> curve);

}  // namespace dampsq
