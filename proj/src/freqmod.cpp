#include "dampsq/freqmod.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dampsq/csv.hpp"

namespace dampsq {

namespace {

void check_domain(int n, double x) {
    if (n < 0 || n > 20 || !(std::abs(x) <= 10.0)) {
        std::ostringstream os;
        os << "bessel_j: (n, x) = (" << n << ", " << x << ") outside 0 <= n <= 20, |x| <= 10";
        throw DomainError(os.str());
    }
}

long double series(int n, long double x) {
    const long double half = x / 2.0L;
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= half / static_cast<long double>(k);
    long double sum = term;
    const long double h2 = half * half;
    for (int k = 1; k < 200; ++k) {
        term *= -h2 / (static_cast<long double>(k) * static_cast<long double>(k + n));
        sum += term;
        if (std::abs(term) < 1e-22L * std::max(std::abs(sum), 1e-300L) && k > static_cast<int>(half)) break;
    }
    return sum;
}

}  // namespace

double bessel_j_recurrence(int n, double x) {
    check_domain(n, x);
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    const double ax = std::abs(x);
    int start = 2 * ((std::max(n, static_cast<int>(ax)) + 30) / 2);
    long double next = 0.0L;
    long double cur = 1e-30L;
    long double wanted = 0.0L;
    long double norm = 0.0L;
    for (int k = start; k >= 1; --k) {
        const long double prev = 2.0L * k / ax * cur - next;
        next = cur;
        cur = prev;
        if (k - 1 == n) wanted = cur;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0L * cur;
        if (std::abs(cur) > 1e250L) {
            cur *= 1e-250L;
            next *= 1e-250L;
            wanted *= 1e-250L;
            norm *= 1e-250L;
        }
    }
    norm += cur;
    double value = static_cast<double>(wanted / norm);
    if (x < 0.0 && n % 2 == 1) value = -value;
    return value;
}

double bessel_j(int n, double x) {
    check_domain(n, x);
    const double value = static_cast<double>(series(n, static_cast<long double>(x)));
    const double check = bessel_j_recurrence(n, x);
    if (std::abs(value - check) > 1e-11) {
        std::ostringstream os;
        os << "bessel_j: series and recurrence disagree at (" << n << ", " << x << ")";
        throw NumericError(os.str());
    }
    return value;
}

void FreqModSpec::validate() const {
    if (!(omega_m > 0.0)) throw DomainError("FreqModSpec: omega_m must be positive");
    const double arg = z();
    if (!(arg >= 0.0) || !(arg < first_bessel_zero)) {
        throw DomainError("FreqModSpec: z must satisfy 0 <= z < 2.405");
    }
}

FreqModSpec FreqModSpec::from_z(double z, double omega_r) {
    return FreqModSpec{2.0 * omega_r * z, 2.0 * omega_r};
}

bool KappaProfile::single_kappa() const {
    for (std::size_t k = 1; k < rates.size(); ++k)
        if (rates[k] != 0.0) return false;
    return true;
}

FreqModStats freqmod_stats(const FreqModSpec& spec, const KappaProfile& profile) {
    spec.validate();
    if (profile.rates.empty() || !(profile.rates[0] > 0.0)) {
        throw std::invalid_argument("freqmod_stats: kappa(omega_r) must be positive");
    }
    const double z = spec.z();
    const int max_n = 19;  // keeps J_{n+1} within the supported order
    double gamma_sum = 0.0;
    double up_sum = 0.0;
    double m_sum = 0.0;
    std::size_t terms = 0;
    double last = 0.0;
    for (int n = 0; n <= max_n && static_cast<std::size_t>(n) < profile.rates.size(); ++n) {
        const double k = profile.rates[static_cast<std::size_t>(n)];
        if (k < 0.0) throw std::invalid_argument("freqmod_stats: negative kappa in profile");
        const double jn = bessel_j(n, z);
        const double jn1 = bessel_j(n + 1, z);
        gamma_sum += k * (jn * jn - jn1 * jn1);
        up_sum += k * jn1 * jn1;
        m_sum += (n % 2 == 0 ? -1.0 : 1.0) * k * jn * jn1;
        last = k * (jn * jn + jn1 * jn1);
        ++terms;
    }
    if (static_cast<std::size_t>(max_n + 1) < profile.rates.size() && last > 1e-15 * std::abs(gamma_sum)) {
        throw NumericError("freqmod_stats: harmonic sum not converged at |n| = 20");
    }
    if (!(gamma_sum > 0.0)) throw DomainError("freqmod_stats: relaxation rate is not positive");

    FreqModStats s;
    s.terms = terms;
    s.gamma = gamma_sum;
    s.n_bar = up_sum / gamma_sum;
    s.m = m_sum / gamma_sum;
    const double j0 = bessel_j(0, z);
    const double j1 = bessel_j(1, z);
    if (profile.single_kappa()) {
        s.var_x = (j0 - j1) / (j0 + j1);
        s.var_y = (j0 + j1) / (j0 - j1);
    } else {
        s.var_x = 2.0 * s.n_bar + 1.0 - 2.0 * std::abs(s.m);
        s.var_y = 2.0 * s.n_bar + 1.0 + 2.0 * std::abs(s.m);
    }
    s.equiv_delta_kappa = equivalent_delta_kappa(z, profile.rates[0]);
    return s;
}

double equivalent_delta_kappa(double z, double kappa) {
    FreqModSpec{z, 1.0}.validate();
    const double rho = bessel_j(1, z) / bessel_j(0, z);
    return kappa * rho * rho;
}

std::vector<FreqModCurvePoint> freqmod_curve(std::span<const double> rel_amplitudes, double omega_r,
                                             const KappaProfile& profile) {
    std::vector<FreqModCurvePoint> out;
    out.reserve(rel_amplitudes.size());
    for (double a : rel_amplitudes) {
        const FreqModSpec spec{a * omega_r, 2.0 * omega_r};
        out.push_back({spec.z(), a, freqmod_stats(spec, profile)});
    }
    return out;
}

void write_freqmod_csv(std::ostream& os, std::span<const FreqModCurvePoint> curve) {
    CsvWriter csv(os);
    csv.header({"delta_omega_r_over_omega_r", "delta_omega_r_over_omega_m", "var_x", "var_y", "equiv_delta_kappa"});
    for (const auto& p : curve) csv.row({p.rel_amplitude, p.z, p.stats.var_x, p.stats.var_y, p.stats.equiv_delta_kappa});
}

}  // namespace dampsq
