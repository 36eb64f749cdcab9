#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "dampsq/measurement.hpp"
#include "support.hpp"

using namespace dampsq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GaussianMoments steady(complex lambda) {
    SystemParams sys;
    const auto mod = validate_modulation({{Tone{lambda, 2.0 * sys.omega_r}}}, sys);
    return closed_form_moments(derived_rates(mod, sys), 1e4);
}

}  // namespace

TEST_CASE("Gaussian Wigner function", "[measurement]") {
    const GaussianMoments vac = GaussianMoments::vacuum();
    CHECK_THAT(wigner_value(vac, 0.0), WithinAbs(2.0 / pi, 1e-15));

    const WignerGrid w = wigner_gaussian(vac, default_wigner_grid(vac));
    const double dx = w.x[1] - w.x[0], dy = w.y[1] - w.y[0];
    double sum = 0.0;
    for (double v : w.values) {
        CHECK(v > 0.0);
        sum += v;
    }
    CHECK_THAT(sum * dx * dy, WithinAbs(1.0, 1e-6));

    const GaussianMoments sq = steady(0.5);
    const double peak = wigner_value(sq, 0.0);
    double along_x = 0.0, along_y = 0.0;
    for (double r = 0.0; r < 3.0; r += 1e-5) {
        if (along_x == 0.0 && wigner_value(sq, complex{r, 0}) < peak / 2) along_x = r;
        if (along_y == 0.0 && wigner_value(sq, complex{0, r}) < peak / 2) along_y = r;
    }
    CHECK_THAT(along_y / along_x, WithinRel(3.0, 1e-4));

    GaussianMoments shifted = vac;
    shifted.mean = std::sqrt(10.0);
    testing::SplitMix64 rng(41);
    for (int k = 0; k < 50; ++k) {
        const complex a = rng.complex_in_disk(2.0);
        CHECK_THAT(wigner_value(shifted, a + std::sqrt(10.0)), WithinAbs(wigner_value(vac, a), 1e-14));
    }

    GridSpec tight = default_wigner_grid(sq);
    tight.x_max = 0.5;
    CHECK_THROWS_AS(wigner_gaussian(sq, tight), GridError);
}

TEST_CASE("Wigner grid normalizes for squeezed displaced states", "[measurement][property]") {
    testing::SplitMix64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        GaussianMoments m = steady(rng.complex_in_disk(0.8));
        m.mean = rng.complex_in_disk(3.0);
        const WignerGrid w = wigner_gaussian(m, default_wigner_grid(m, 7.0, 301));
        double sum = 0.0;
        for (double v : w.values) sum += v;
        CHECK_THAT(sum * (w.x[1] - w.x[0]) * (w.y[1] - w.y[0]), WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("marginal parameters", "[measurement]") {
    for (double phi : {0.0, 0.4, 2.0}) {
        const MarginalStats v = marginal_gaussian(GaussianMoments::vacuum(), phi);
        CHECK(v.x0 == 0.0);
        CHECK_THAT(v.sigma, WithinAbs(0.5, 1e-15));
    }
    CHECK_THAT(marginal_gaussian(steady(0.5), 0.0).sigma, WithinAbs(0.288675134594813, 1e-12));

    GaussianMoments thermal;
    thermal.n = 0.149425;
    for (double phi : {0.0, 1.0, 2.5}) {
        const MarginalStats s = marginal_gaussian(thermal, phi);
        CHECK_THAT(s.sigma * s.sigma, WithinAbs(0.324713, 1e-6));
    }

    GaussianMoments disp;
    disp.mean = complex{1.0, 2.0};
    CHECK_THAT(marginal_gaussian(disp, pi / 2).x0, WithinAbs(2.0, 1e-15));
}

TEST_CASE("marginal width is pi-periodic with extremes on the squeeze axes", "[measurement][property]") {
    testing::SplitMix64 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const GaussianMoments m = steady(rng.complex_in_disk(0.9));
        const QuadratureStats q = quadrature_stats(m);
        const double phi = rng.uniform(-pi, pi);
        CHECK_THAT(marginal_gaussian(m, phi + pi).sigma, WithinAbs(marginal_gaussian(m, phi).sigma, 1e-13));
        CHECK_THAT(marginal_gaussian(m, q.theta / 2).sigma, WithinAbs(std::sqrt(q.var_x) / 2, 1e-12));
        CHECK_THAT(marginal_gaussian(m, q.theta / 2 + pi / 2).sigma, WithinAbs(std::sqrt(q.var_y) / 2, 1e-12));
        const double s = marginal_gaussian(m, phi).sigma;
        CHECK(s >= std::sqrt(q.var_x) / 2 - 1e-13);
        CHECK(s <= std::sqrt(q.var_y) / 2 + 1e-13);
    }
}

TEST_CASE("overlap error examples", "[measurement]") {
    const MarginalStats a{0.0, 0.5, 0.0};
    CHECK_THAT(overlap_error(a, a).error, WithinAbs(0.5, 1e-15));

    const MarginalStats b{std::sqrt(10.0), 0.5, 0.0};
    const ErrorReport r = overlap_error(a, b);
    CHECK_THAT(r.error, WithinAbs(0.5 * std::erfc(std::sqrt(5.0)), 1e-18));
    CHECK_THAT(r.error, WithinRel(7.827e-4, 1e-3));
    CHECK(r.method == OverlapMethod::analytic);
    CHECK_FALSE(r.intersections.has_value());

    const MarginalStats c{2.0 * std::sqrt(2.0) * 0.3, 0.3, 0.0};
    CHECK_THAT(overlap_error(MarginalStats{0.0, 0.3, 0.0}, c).error, WithinAbs(0.078649603525143, 1e-12));

    const MarginalStats far{100.0, 0.5, 0.0};
    CHECK(overlap_error(a, far).error <= 1e-12);
    const auto g = overlap_grid(a, far);
    CHECK(overlap_error_numeric(sample_marginal(a, g), sample_marginal(far, g)).error <= 1e-12);
}

TEST_CASE("analytic overlap agrees with quadrature", "[measurement][property]") {
    testing::SplitMix64 rng(44);
    for (int trial = 0; trial < 60; ++trial) {
        const double s0 = rng.uniform(0.1, 1.0);
        const double s1 = trial % 4 == 0 ? s0 : rng.uniform(0.1, 1.0);
        const MarginalStats m0{rng.uniform(-2, 2), s0, 0.0};
        const MarginalStats m1{rng.uniform(-2, 2), s1, 0.0};
        const ErrorReport an = overlap_error(m0, m1);
        CHECK(std::abs(an.error - testing::overlap_by_quadrature(m0.x0, s0, m1.x0, s1)) <= 1e-9);
        if (s0 != s1) {
            REQUIRE(an.intersections.has_value());
            const auto [zm, zp] = *an.intersections;
            CHECK_THAT(marginal_density(m0, zm), WithinRel(marginal_density(m1, zm), 1e-9));
            CHECK_THAT(marginal_density(m0, zp), WithinRel(marginal_density(m1, zp), 1e-9));
        }
        const auto g = overlap_grid(m0, m1);
        const ErrorReport nu = overlap_error_numeric(sample_marginal(m0, g), sample_marginal(m1, g));
        CHECK(nu.method == OverlapMethod::numeric);
        CHECK(std::abs(an.error - nu.error) <= 1e-6);
    }
}

TEST_CASE("overlap symmetries", "[measurement][property]") {
    testing::SplitMix64 rng(45);
    for (int trial = 0; trial < 200; ++trial) {
        const MarginalStats a{rng.uniform(-3, 3), rng.uniform(0.1, 1.0), 0.0};
        const MarginalStats b{rng.uniform(-3, 3), rng.uniform(0.1, 1.0), 0.0};
        const double e = overlap_error(a, b).error;
        CHECK(e >= 0.0);
        CHECK(e <= 0.5);
        CHECK_THAT(overlap_error(b, a).error, WithinAbs(e, 1e-14));
        const double shift = rng.uniform(-10, 10);
        CHECK_THAT(overlap_error({a.x0 + shift, a.sigma, 0}, {b.x0 + shift, b.sigma, 0}).error, WithinAbs(e, 1e-12));
        const double k = rng.uniform(0.2, 5.0);
        CHECK_THAT(overlap_error({a.x0 * k, a.sigma * k, 0}, {b.x0 * k, b.sigma * k, 0}).error, WithinAbs(e, 1e-12));
    }
}

TEST_CASE("overlap decreases with separation", "[measurement][property]") {
    testing::SplitMix64 rng(46);
    for (int trial = 0; trial < 20; ++trial) {
        const double s0 = rng.uniform(0.2, 0.8), s1 = rng.uniform(0.2, 0.8);
        double last = 1.0;
        for (int k = 0; k <= 100; ++k) {
            const double e = overlap_error({0, s0, 0}, {0.05 * k, s1, 0}).error;
            CHECK(e <= last + 1e-15);
            last = e;
        }
    }
}

TEST_CASE("numeric overlap checks its inputs", "[measurement]") {
    const MarginalStats a{0.0, 0.5, 0.0}, b{1.0, 0.4, 0.0};
    const auto g = overlap_grid(a, b);
    CHECK(g.size() == 4096);
    auto pa = sample_marginal(a, g);
    auto pb = sample_marginal(b, g);
    CHECK_THAT(integrate(pa), WithinAbs(1.0, 1e-6));
    pb.x[10] += 1e-6;
    try {
        overlap_error_numeric(pa, pb);
        FAIL("mismatched grids accepted");
    } catch (const GridError& e) {
        CHECK(e.kind() == GridErrorKind::mismatch);
    }
}

TEST_CASE("bichromatic closed form", "[measurement]") {
    for (double eps : {0.3, 1.0, 2.0}) {
        CHECK_THAT(emin_bichromatic(eps, 1.0, 0.0), WithinAbs(0.5 * std::erfc(std::sqrt(2.0) * eps), 1e-16));
    }
    const double eps = 0.83 * std::sqrt(10.0) / 2;
    const double arg = 2 * eps / std::sqrt(2 * 0.83 * (1.17 - std::sqrt(0.34)));
    CHECK_THAT(arg, WithinAbs(2.659, 1e-3));
    CHECK_THAT(emin_bichromatic(eps, 1.0, 0.17), WithinRel(0.5 * std::erfc(arg), 1e-13));
    CHECK_THROWS_AS(emin_bichromatic(1.0, 1.0, 1.0), DomainError);

    testing::SplitMix64 rng(47);
    for (int trial = 0; trial < 300; ++trial) {
        const double dk = rng.uniform(0.0, 0.95);
        const double e = rng.uniform(0.01, 3.0);
        const double g = 1.0 - dk;
        const double sigma = std::sqrt(bichromatic_strobe_variance(1.0, dk)) / 2;
        const double ref = overlap_error({0.0, sigma, 0}, {2 * e / g, sigma, 0}).error;
        CHECK(std::abs(emin_bichromatic(e, 1.0, dk) - ref) <= 1e-12);
    }
}

TEST_CASE("CSV emission of grids and marginals", "[measurement]") {
    const GaussianMoments vac = GaussianMoments::vacuum();
    GridSpec spec = default_wigner_grid(vac, 6.0, 3);
    std::ostringstream os;
    write_wigner_csv(os, wigner_gaussian(vac, spec));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "x,y,W");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 9);

    std::ostringstream ms;
    const std::vector<double> grid{-1.0, 0.0, 1.0};
    write_marginal_csv(ms, sample_marginal({0, 0.5, 0}, grid));
    CHECK(ms.str().rfind("x,P\n", 0) == 0);
    CHECK(ms.str().find('\r') == std::string::npos);
}
