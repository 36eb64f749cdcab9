#include "dampsq/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dampsq/csv.hpp"

namespace dampsq {

namespace {

const double sqrt2 = std::sqrt(2.0);

// Probability mass of N(x, sigma^2) on [lo, hi], using erfc on the side
// where it avoids cancellation.
double gaussian_mass(double lo, double hi, double x, double sigma) {
    const double a = (lo - x) / (sigma * sqrt2);
    const double b = (hi - x) / (sigma * sqrt2);
    if (a >= 0.0) return 0.5 * (std::erfc(a) - std::erfc(b));
    if (b <= 0.0) return 0.5 * (std::erfc(-b) - std::erfc(-a));
    return 1.0 - 0.5 * (std::erfc(-a) + std::erfc(b));
}

// Mass outside [lo, hi].
double gaussian_tails(double lo, double hi, double x, double sigma) {
    return 0.5 * (std::erfc((x - lo) / (sigma * sqrt2)) + std::erfc((hi - x) / (sigma * sqrt2)));
}

std::array<double, 3> principal_axes(const GaussianMoments& m) {
    // eigenvalues of the alpha-plane covariance and the rotation angle
    const double base = (2.0 * m.n + 1.0) / 4.0;
    const double half = std::abs(m.s) / 2.0;
    return {base - half, base + half, 0.5 * std::arg(m.s)};
}

}  // namespace

GridSpec default_wigner_grid(const GaussianMoments& m, double halfwidths, std::size_t n) {
    const auto ax = principal_axes(m);
    const double reach = halfwidths * std::sqrt(ax[1]);
    GridSpec g;
    g.x_min = m.mean.real() - reach;
    g.x_max = m.mean.real() + reach;
    g.y_min = m.mean.imag() - reach;
    g.y_max = m.mean.imag() + reach;
    g.nx = n;
    g.ny = n;
    return g;
}

double wigner_value(const GaussianMoments& m, complex alpha) {
    const auto v = quadrature_covariance(m);
    const double det = v[0] * v[3] - v[1] * v[2];
    const double dx = alpha.real() - m.mean.real();
    const double dy = alpha.imag() - m.mean.imag();
    const double q = (v[3] * dx * dx - 2.0 * v[1] * dx * dy + v[0] * dy * dy) / det;
    return std::exp(-0.5 * q) / (2.0 * pi * std::sqrt(det));
}

WignerGrid wigner_gaussian(const GaussianMoments& m, const GridSpec& grid) {
    if (grid.nx < 2 || grid.ny < 2) throw GridError(GridErrorKind::too_narrow, "wigner grid needs >= 2 points per axis");
    const auto ax = principal_axes(m);
    const double reach = 6.0 * std::sqrt(ax[1]) * (1.0 - 1e-9);
    if (grid.x_min > m.mean.real() - reach || grid.x_max < m.mean.real() + reach ||
        grid.y_min > m.mean.imag() - reach || grid.y_max < m.mean.imag() + reach) {
        std::ostringstream os;
        os << "wigner grid must cover +-" << reach << " around <a> = (" << m.mean.real() << ", "
           << m.mean.imag() << ")";
        throw GridError(GridErrorKind::too_narrow, os.str());
    }
    WignerGrid w;
    w.grid = grid;
    w.x.resize(grid.nx);
    w.y.resize(grid.ny);
    for (std::size_t i = 0; i < grid.nx; ++i)
        w.x[i] = grid.x_min + (grid.x_max - grid.x_min) * static_cast<double>(i) / static_cast<double>(grid.nx - 1);
    for (std::size_t i = 0; i < grid.ny; ++i)
        w.y[i] = grid.y_min + (grid.y_max - grid.y_min) * static_cast<double>(i) / static_cast<double>(grid.ny - 1);
    w.values.resize(grid.nx * grid.ny);
    for (std::size_t iy = 0; iy < grid.ny; ++iy)
        for (std::size_t ix = 0; ix < grid.nx; ++ix)
            w.values[iy * grid.nx + ix] = wigner_value(m, {w.x[ix], w.y[iy]});
    return w;
}

MarginalStats marginal_gaussian(const GaussianMoments& m, double phi) {
    const QuadratureStats q = quadrature_stats(m);
    const double c = std::cos(phi - q.theta / 2.0);
    const double s = std::sin(phi - q.theta / 2.0);
    MarginalStats out;
    out.phi = phi;
    out.x0 = (m.mean * std::polar(1.0, -phi)).real();
    out.sigma = std::sqrt(c * c * q.var_x / 4.0 + s * s * q.var_y / 4.0);
    return out;
}

double marginal_density(const MarginalStats& s, double x) {
    const double z = (x - s.x0) / s.sigma;
    return std::exp(-0.5 * z * z) / (s.sigma * std::sqrt(2.0 * pi));
}

std::vector<double> overlap_grid(const MarginalStats& a, const MarginalStats& b, std::size_t points) {
    if (points < 2) throw std::invalid_argument("overlap_grid: need at least 2 points");
    const double lo = std::min(a.x0 - 8.0 * a.sigma, b.x0 - 8.0 * b.sigma);
    const double hi = std::max(a.x0 + 8.0 * a.sigma, b.x0 + 8.0 * b.sigma);
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

SampledDistribution sample_marginal(const MarginalStats& s, std::span<const double> grid) {
    SampledDistribution out;
    out.x.assign(grid.begin(), grid.end());
    out.p.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out.p[i] = marginal_density(s, grid[i]);
    return out;
}

double integrate(const SampledDistribution& p) {
    double sum = 0.0;
    for (std::size_t i = 1; i < p.x.size(); ++i) sum += 0.5 * (p.p[i] + p.p[i - 1]) * (p.x[i] - p.x[i - 1]);
    return sum;
}

ErrorReport overlap_error_numeric(const SampledDistribution& p0, const SampledDistribution& p1) {
    if (p0.x.size() != p1.x.size() || p0.p.size() != p0.x.size() || p1.p.size() != p1.x.size()) {
        throw GridError(GridErrorKind::mismatch, "overlap_error_numeric: grids differ in size");
    }
    for (std::size_t i = 0; i < p0.x.size(); ++i) {
        if (std::abs(p0.x[i] - p1.x[i]) > 1e-12 * std::max(1.0, std::abs(p0.x[i]))) {
            throw GridError(GridErrorKind::mismatch, "overlap_error_numeric: grids differ at index " + std::to_string(i));
        }
    }
    const auto& x = p0.x;
    const std::size_t n = x.size();
    auto side = [&](std::size_t i) { return p0.p[i] - p1.p[i] < 0.0; };
    double sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double h = x[i] - x[i - 1];
        if (side(i - 1) == side(i) || n < 4) {
            sum += 0.5 * (std::min(p0.p[i - 1], p1.p[i - 1]) + std::min(p0.p[i], p1.p[i])) * h;
            continue;
        }
        // kinked cell: cubic interpolants on both sides of the crossing,
        // plus the trapezoid end corrections of the neighbouring segments
        const std::size_t j0 = std::min(i > 1 ? i - 2 : 0, n - 4);
        auto cubic = [&](const std::vector<double>& y, double t) {
            double v = 0.0;
            for (std::size_t a = j0; a < j0 + 4; ++a) {
                double w = 1.0;
                for (std::size_t b = j0; b < j0 + 4; ++b) {
                    if (b != a) w *= (t - x[b]) / (x[a] - x[b]);
                }
                v += w * y[a];
            }
            return v;
        };
        const std::vector<double>& left = side(i - 1) ? p0.p : p1.p;
        const std::vector<double>& right = side(i) ? p0.p : p1.p;
        double a = x[i - 1], b = x[i];
        const bool neg_at_a = cubic(p0.p, a) - cubic(p1.p, a) < 0.0;
        for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
            const double c = 0.5 * (a + b);
            ((cubic(p0.p, c) - cubic(p1.p, c) < 0.0) == neg_at_a ? a : b) = c;
        }
        const double c = 0.5 * (a + b);
        auto gauss3 = [&](const std::vector<double>& y, double lo, double hi) {
            static const double g = std::sqrt(0.6);
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            return half * (5.0 * cubic(y, mid - g * half) + 8.0 * cubic(y, mid) + 5.0 * cubic(y, mid + g * half)) / 9.0;
        };
        sum += gauss3(left, x[i - 1], c) + gauss3(right, c, x[i]);
        auto slope = [&](const std::vector<double>& y, std::size_t k) {
            if (k == 0) return (y[1] - y[0]) / (x[1] - x[0]);
            if (k + 1 == n) return (y[k] - y[k - 1]) / (x[k] - x[k - 1]);
            return (y[k + 1] - y[k - 1]) / (x[k + 1] - x[k - 1]);
        };
        sum -= h * h / 12.0 * (slope(left, i - 1) - slope(right, i));
    }
    ErrorReport r;
    r.error = 0.5 * sum;
    r.method = OverlapMethod::numeric;
    return r;
}

ErrorReport overlap_error(const MarginalStats& m0, const MarginalStats& m1) {
    const double s0 = m0.sigma;
    const double s1 = m1.sigma;
    if (!(s0 > 0.0) || !(s1 > 0.0)) throw std::invalid_argument("overlap_error: sigma must be positive");

    ErrorReport r;
    if (std::abs(s0 - s1) <= 1e-12 * std::max(s0, s1)) {
        const double sigma = 0.5 * (s0 + s1);
        r.error = 0.5 * std::erfc(std::abs(m1.x0 - m0.x0) / (2.0 * sqrt2 * sigma));
        return r;
    }

    const double A = 1.0 / (s0 * s0) - 1.0 / (s1 * s1);
    const double B = m0.x0 / (s0 * s0) - m1.x0 / (s1 * s1);
    const double C = m0.x0 * m0.x0 / (s0 * s0) - m1.x0 * m1.x0 / (s1 * s1) - 2.0 * std::log(s1 / s0);
    const double disc = B * B - A * C;
    if (disc < 1e-14 * (B * B + std::abs(A * C)) || B * B + std::abs(A * C) == 0.0) {
        const auto grid = overlap_grid(m0, m1);
        return overlap_error_numeric(sample_marginal(m0, grid), sample_marginal(m1, grid));
    }
    const double q = B + std::copysign(std::sqrt(disc), B == 0.0 ? 1.0 : B);
    double z1 = q / A;
    double z2 = C / q;
    if (z1 > z2) std::swap(z1, z2);

    const MarginalStats& narrow = s0 < s1 ? m0 : m1;
    const MarginalStats& wide = s0 < s1 ? m1 : m0;
    const double outside = gaussian_tails(z1, z2, narrow.x0, narrow.sigma);
    const double inside = gaussian_mass(z1, z2, wide.x0, wide.sigma);
    r.error = 0.5 * (outside + inside);
    r.intersections = std::make_pair(z1, z2);
    return r;
}

double bichromatic_strobe_variance(double kappa, double delta_kappa) {
    if (!(delta_kappa >= 0.0) || !(delta_kappa < kappa)) {
        throw DomainError("bichromatic_strobe_variance: need 0 <= delta_kappa < kappa");
    }
    return (kappa + delta_kappa - std::sqrt(2.0 * kappa * delta_kappa)) / (kappa - delta_kappa);
}

double emin_bichromatic(double epsilon, double kappa, double delta_kappa) {
    if (!(delta_kappa >= 0.0) || !(delta_kappa < kappa)) {
        throw DomainError("emin_bichromatic: need 0 <= delta_kappa < kappa");
    }
    const double gamma = kappa - delta_kappa;
    const double v = kappa + delta_kappa - std::sqrt(2.0 * kappa * delta_kappa);
    return 0.5 * std::erfc(2.0 * epsilon / std::sqrt(2.0 * gamma * v));
}

void write_wigner_csv(std::ostream& os, const WignerGrid& w) {
    CsvWriter csv(os);
    csv.header({"x", "y", "W"});
    for (std::size_t iy = 0; iy < w.y.size(); ++iy)
        for (std::size_t ix = 0; ix < w.x.size(); ++ix) csv.row({w.x[ix], w.y[iy], w.at(ix, iy)});
}

void write_marginal_csv(std::ostream& os, const SampledDistribution& p) {
    CsvWriter csv(os);
    csv.header({"x", "P"});
    for (std::size_t i = 0; i < p.x.size(); ++i) csv.row({p.x[i], p.p[i]});
}

}  // namespace dampsq
