// Shared helpers for the test suite: a seeded generator and reference
// implementations that do not go through the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace testing {

using cplx = std::complex<double>;

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    cplx complex_in_disk(double radius) {
        const double r = radius * std::sqrt(uniform());
        const double a = uniform(0.0, 2.0 * M_PI);
        return std::polar(r, a);
    }

    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

private:
    std::uint64_t state_;
};

// J_n(x) = (1 / 2 pi) integral_0^{2 pi} cos(n t - x sin t) dt; the integrand is
// periodic so the trapezoid rule converges geometrically.
inline double bessel_by_integral(int n, double x, int points = 256) {
    double sum = 0.0;
    for (int k = 0; k < points; ++k) {
        const double t = 2.0 * M_PI * k / points;
        sum += std::cos(n * t - x * std::sin(t));
    }
    return sum / points;
}

inline Eigen::MatrixXcd ladder(std::size_t N) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(N + 1, N + 1);
    for (std::size_t k = 1; k <= N; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

// Master-equation generator assembled from dense operators:
// -i[delta a^dag a + eta a^dag + eta^* a, rho] + gd D[a] + gu D[a^dag]
// + mu S[a] + mu^* S[a^dag].
struct DenseGenerator {
    double delta{0.0};
    cplx eta{0.0, 0.0};
    double gamma_down{1.0};
    double gamma_up{0.0};
    cplx mu{0.0, 0.0};

    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const {
        const std::size_t N = static_cast<std::size_t>(rho.rows()) - 1;
        const Eigen::MatrixXcd a = ladder(N);
        const Eigen::MatrixXcd ad = a.adjoint();
        const cplx i{0.0, 1.0};
        const Eigen::MatrixXcd H = delta * ad * a + eta * ad + std::conj(eta) * a;
        auto D = [&](const Eigen::MatrixXcd& c) -> Eigen::MatrixXcd {
            const Eigen::MatrixXcd cc = c.adjoint() * c;
            return c * rho * c.adjoint() - 0.5 * (cc * rho + rho * cc);
        };
        auto S = [&](const Eigen::MatrixXcd& c) -> Eigen::MatrixXcd {
            const Eigen::MatrixXcd c2 = c * c;
            return c * rho * c - 0.5 * (c2 * rho + rho * c2);
        };
        return -i * (H * rho - rho * H) + gamma_down * D(a) + gamma_up * D(ad) + mu * S(a) +
               std::conj(mu) * S(ad);
    }
};

// Random density matrix supported on levels 0..support of an (N+1)-level space.
inline Eigen::MatrixXcd random_density(SplitMix64& rng, std::size_t N, std::size_t support) {
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N + 1, N + 1);
    for (std::size_t r = 0; r <= support; ++r) {
        for (std::size_t c = 0; c <= support; ++c) G(r, c) = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    Eigen::MatrixXcd rho = G * G.adjoint();
    return rho / rho.trace().real();
}

// Brute-force (1/2) integral min(N(x0, s0), N(x1, s1)) with composite Simpson.
inline double overlap_by_quadrature(double x0, double s0, double x1, double s1, int intervals = 200000) {
    const double lo = std::min(x0 - 12.0 * s0, x1 - 12.0 * s1);
    const double hi = std::max(x0 + 12.0 * s0, x1 + 12.0 * s1);
    auto pdf = [](double x, double m, double s) {
        const double u = (x - m) / s;
        return std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * M_PI));
    };
    auto f = [&](double x) { return std::min(pdf(x, x0, s0), pdf(x, x1, s1)); };
    auto g = [&](double x) { return std::log(pdf(x, x0, s0)) - std::log(pdf(x, x1, s1)); };
    // breakpoints at the sign changes of g, refined by bisection
    std::vector<double> cuts{lo};
    const int scan = 4000;
    for (int k = 0; k < scan; ++k) {
        double a = lo + (hi - lo) * k / scan, b = lo + (hi - lo) * (k + 1) / scan;
        if (g(a) * g(b) >= 0.0) continue;
        for (int it = 0; it < 200 && b - a > 1e-15 * (1 + std::abs(a)); ++it) {
            const double c = 0.5 * (a + b);
            (g(a) * g(c) <= 0.0 ? b : a) = c;
        }
        cuts.push_back(0.5 * (a + b));
    }
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t j = 1; j < cuts.size(); ++j) {
        const int n = std::max(2, 2 * static_cast<int>(intervals * (cuts[j] - cuts[j - 1]) / (hi - lo) / 2));
        const double hh = (cuts[j] - cuts[j - 1]) / n;
        double sum = f(cuts[j - 1]) + f(cuts[j]);
        for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(cuts[j - 1] + k * hh);
        total += sum * hh / 3.0;
    }
    return 0.5 * total;
}

// Expectations of a, a^dag a, a^2 under rho and under a generator output.
struct RawMoments {
    cplx a;
    double ada;
    cplx a2;
};

inline RawMoments raw_moments(const Eigen::MatrixXcd& rho) {
    const std::size_t N = static_cast<std::size_t>(rho.rows()) - 1;
    const Eigen::MatrixXcd a = ladder(N);
    return {(a * rho).trace(), (a.adjoint() * a * rho).trace().real(), (a * a * rho).trace()};
}

}  // namespace testing
