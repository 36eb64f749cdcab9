// measurement.hpp - Gaussian Wigner functions, homodyne marginals and the
// two-distribution overlap error used as the readout error.
//
// Phase-space coordinates are those of the Wigner alpha-plane: the marginal
// coordinate along angle phi is Re(alpha e^{-i phi}), so the vacuum has
// sigma = 1/2 and a displacement <a> moves the center by Re(<a> e^{-i phi}).

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dampsq/gaussian.hpp"

namespace dampsq {

struct MarginalStats {
    double x0{0.0};
    double sigma{0.5};
    double phi{0.0};
};

enum class OverlapMethod { analytic, numeric };

struct ErrorReport {
    double error{0.5};
    std::optional<std::pair<double, double>> intersections;  // z_-, z_+ for unequal widths
    OverlapMethod method{OverlapMethod::analytic};
};

// Probability density sampled on a uniform grid.
struct SampledDistribution {
    std::vector<double> x;
    std::vector<double> p;
};

struct GridSpec {
    double x_min{-1.0};
    double x_max{1.0};
    double y_min{-1.0};
    double y_max{1.0};
    std::size_t nx{201};
    std::size_t ny{201};
};

struct WignerGrid {
    GridSpec grid;
    std::vector<double> x;       // nx abscissae
    std::vector<double> y;       // ny ordinates
    std::vector<double> values;  // row-major, values[iy * nx + ix]
    double at(std::size_t ix, std::size_t iy) const { return values[iy * x.size() + ix]; }
};

// Grid centered on <a> covering `halfwidths` times the larger principal
// standard deviation in each direction.
GridSpec default_wigner_grid(const GaussianMoments& m, double halfwidths = 6.0, std::size_t n = 201);

// W(alpha) of the Gaussian state. Throws GridError(too_narrow) when the grid
// does not cover +-6 max(sigma_x, sigma_y) around <a>.
WignerGrid wigner_gaussian(const GaussianMoments& m, const GridSpec& grid);

// Wigner density at a single point.
double wigner_value(const GaussianMoments& m, complex alpha);

MarginalStats marginal_gaussian(const GaussianMoments& m, double phi);

// Density of a marginal at x.
double marginal_density(const MarginalStats& s, double x);

// 4096-point grid spanning the union of the +-8 sigma intervals.
std::vector<double> overlap_grid(const MarginalStats& a, const MarginalStats& b,
                                 std::size_t points = 4096);

SampledDistribution sample_marginal(const MarginalStats& s, std::span<const double> grid);

// E = (1/2) integral min(P_0, P_1) dx for two Gaussian marginals.
ErrorReport overlap_error(const MarginalStats& m0, const MarginalStats& m1);

// Trapezoidal (1/2) integral min(P_0, P_1) on a shared grid. Throws
// GridError(mismatch) when the abscissae differ.
ErrorReport overlap_error_numeric(const SampledDistribution& p0, const SampledDistribution& p1);

// Trapezoidal integral of a sampled density.
double integrate(const SampledDistribution& p);

// Strobed error of the symmetric two-tone readout,
// 1/2 - 1/2 erf[2 epsilon / sqrt(2 Gamma (kappa + dk - sqrt(2 kappa dk)))].
// Throws DomainError for delta_kappa >= kappa.
double emin_bichromatic(double epsilon, double kappa, double delta_kappa);

// Strobed squeezed variance (kappa + dk - sqrt(2 kappa dk)) / (kappa - dk).
double bichromatic_strobe_variance(double kappa, double delta_kappa);

void write_wigner_csv(std::ostream& os, const WignerGrid& w);
void write_marginal_csv(std::ostream& os, const SampledDistribution& p);

}  // namespace dampsq
