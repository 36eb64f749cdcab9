#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <cstring>
#include <sstream>

#include "dampsq/readout.hpp"
#include "support.hpp"

using namespace dampsq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ReadoutScenario scenario(ReadoutMode mode) {
    ReadoutScenario sc;
    sc.mode = mode;
    sc.jobs = 1;
    return sc;
}

}  // namespace

TEST_CASE("drive calibration round trip", "[readout]") {
    for (double dk : {0.0, 0.13, 0.5}) {
        SystemParams sys;
        sys.chi = 10.0;
        ModulationSpec spec;
        if (dk > 0) spec.tones.push_back(Tone{std::sqrt(dk), 2 * (sys.omega_r + sys.chi)});
        DriveSpec drive;
        drive.omega_d = sys.omega_r + sys.chi;
        drive.strength = PhotonTarget{10.0};
        const EvolutionContext ctx(sys, validate_modulation(spec, sys), QubitState::excited, drive, FrameChoice::drive);
        const MomentTrajectory tr = integrate_moments(ctx, 60.0 / ctx.rates().gamma, 1e-12, 1);
        const complex mean = tr.moments.back().mean;
        CHECK_THAT(std::norm(mean), WithinAbs(10.0, 1e-9));
        CHECK(std::abs(mean.imag()) <= 1e-9);
        CHECK(mean.real() > 0);
        CHECK_THAT(std::norm(settle(ctx).moments.mean), WithinAbs(10.0, 1e-7));
    }
}

TEST_CASE("baseline error", "[readout]") {
    for (double n : {3.0, 10.0, 20.0}) {
        const double ref = overlap_error({0.0, 0.5, 0.0}, {std::sqrt(n), 0.5, 0.0}).error;
        CHECK_THAT(baseline_error(n), WithinRel(ref, 1e-13));
    }
    CHECK(baseline_error(0.0) == 0.5);
}

TEST_CASE("weak modulation recovers the baseline", "[readout]") {
    for (ReadoutMode mode : {ReadoutMode::mono, ReadoutMode::bichromatic}) {
        ReadoutScenario sc = scenario(mode);
        sc.delta_kappa_grid = {1e-14, 1e-12};
        const ErrorCurve c = scenario_error_curve(sc);
        for (const auto& p : c.points) {
            CHECK(std::abs(p.error - c.baseline) <= 1e-6);
            CHECK_THAT(p.factor, WithinAbs(1.0, 1e-3));
        }
    }
}

TEST_CASE("single-tone readout curve", "[readout]") {
    const ErrorCurve c = scenario_error_curve(scenario(ReadoutMode::mono));
    REQUIRE(c.points.size() == 90);
    CHECK_THAT(c.optimum.delta_kappa, WithinAbs(0.13, 0.02));
    CHECK_THAT(c.optimum.factor, WithinRel(3.1, 0.15));
    for (const auto& p : c.points) CHECK(p.factor >= 0.0);
    CHECK(c.warnings.empty());

    ReadoutScenario exact = scenario(ReadoutMode::mono);
    exact.ground = GroundTreatment::exact;
    const ErrorCurve t = scenario_error_curve(exact);
    CHECK_THAT(t.optimum.delta_kappa, WithinAbs(c.optimum.delta_kappa, 0.01));
}

TEST_CASE("ground branch squeezing is suppressed by the detuning", "[readout]") {
    for (double chi : {5.0, 10.0, 20.0}) {
        ReadoutScenario sc = scenario(ReadoutMode::mono);
        sc.ground = GroundTreatment::exact;
        sc.chi = chi;
        for (double dk : {0.1, 0.4, 0.8}) {
            const auto pairs = settled_branches(sc, dk);
            REQUIRE(pairs.size() == 1);
            CHECK(std::abs(pairs[0].ground.s) <= 1.5 * std::sqrt(dk) / (4 * chi));
        }
    }
}

TEST_CASE("two-tone readout curve follows the closed form", "[readout]") {
    ReadoutScenario sc = scenario(ReadoutMode::bichromatic);
    const ErrorCurve c = scenario_error_curve(sc);
    CHECK_THAT(c.optimum.delta_kappa, WithinAbs(0.17, 0.02));
    CHECK_THAT(c.optimum.factor, WithinRel(9.3, 0.15));
    for (const auto& p : c.points) {
        const double closed = emin_bichromatic(calibrate_drive(1.0 - p.delta_kappa, 10.0), 1.0, p.delta_kappa);
        CHECK_THAT(p.error, WithinRel(closed, 0.02));
    }

    ReadoutScenario ode = sc;
    ode.bichromatic_source = BichromaticSource::ode;
    ode.delta_kappa_grid = {0.1, 0.17, 0.3};
    const ErrorCurve co = scenario_error_curve(ode);
    for (const auto& p : co.points) {
        const double closed = emin_bichromatic(calibrate_drive(1.0 - p.delta_kappa, 10.0), 1.0, p.delta_kappa);
        CHECK_THAT(p.error, WithinRel(closed, 0.02));
    }

    ReadoutScenario averaged = sc;
    averaged.stroboscopic = false;
    averaged.delta_kappa_grid = {0.17};
    CHECK(scenario_error_curve(averaged).points[0].error > c.optimum.error);
}

TEST_CASE("sweeps are independent of the worker count", "[readout][property]") {
    ReadoutScenario sc = scenario(ReadoutMode::mono);
    sc.delta_kappa_grid = {0.05, 0.1, 0.13, 0.2, 0.3, 0.5, 0.7};
    const ErrorCurve one = scenario_error_curve(sc);
    sc.jobs = 4;
    const ErrorCurve four = scenario_error_curve(sc);
    REQUIRE(one.points.size() == four.points.size());
    for (std::size_t i = 0; i < one.points.size(); ++i) {
        CHECK(std::memcmp(&one.points[i].error, &four.points[i].error, sizeof(double)) == 0);
    }
}

TEST_CASE("scenario validation and warnings", "[readout]") {
    ReadoutScenario sc = scenario(ReadoutMode::mono);
    sc.delta_kappa_grid = {0.5, 1.0};
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc.delta_kappa_grid = {0.0};
    CHECK_THROWS_AS(scenario_error_curve(sc), std::invalid_argument);
    sc.delta_kappa_grid = {0.2};
    sc.chi = 2.0;
    CHECK(sc.warning().has_value());
    CHECK(scenario_error_curve(sc).warnings.size() == 1);
}

TEST_CASE("readout tone layout", "[readout]") {
    ReadoutScenario sc = scenario(ReadoutMode::mono);
    const ModulationSpec m = readout_modulation(sc, 0.2);
    REQUIRE(m.tones.size() == 1);
    CHECK_THAT(std::abs(m.tones[0].amplitude), WithinAbs(std::sqrt(0.2), 1e-15));
    CHECK(m.tones[0].frequency == 2 * (sc.omega_r + sc.chi));

    sc.mode = ReadoutMode::bichromatic;
    const ModulationSpec b = readout_modulation(sc, 0.2);
    REQUIRE(b.tones.size() == 2);
    for (const auto& t : b.tones) CHECK_THAT(std::abs(t.amplitude), WithinAbs(std::sqrt(0.1), 1e-15));

    const DriveSpec d = readout_drive(sc);
    CHECK(d.omega_d == sc.omega_r + sc.chi);
}

TEST_CASE("error trace", "[readout]") {
    ReadoutScenario sc = scenario(ReadoutMode::bichromatic);
    const double dk = 0.17;
    std::vector<double> times;
    for (int k = 0; k <= 24000; ++k) times.push_back(0.001 * k);
    const ErrorTrace tr = error_vs_time(sc, dk, times);
    CHECK_THAT(tr.error.front(), WithinAbs(0.5, 1e-15));
    CHECK_THAT(tr.period, WithinRel(2 * pi / 40, 1e-14));
    CHECK_THAT(tr.peak_frequency, WithinRel(40.0, 0.01));
    const double closed = emin_bichromatic(calibrate_drive(1 - dk, 10.0), 1.0, dk);
    CHECK_THAT(tr.last_period_min, WithinRel(closed, 0.02));
    const double n = dk / (1 - dk), s = std::sqrt(dk / 2) / (1 - dk);
    const double worst = overlap_error({0.0, std::sqrt(2 * n + 1 + 2 * s) / 2, 0},
                                       {std::sqrt(10.0), std::sqrt(2 * n + 1 - 2 * s) / 2, 0})
                             .error;
    CHECK_THAT(tr.last_period_max, WithinRel(worst, 0.05));

    CHECK_THROWS_AS(error_vs_time(scenario(ReadoutMode::mono), dk, times), std::invalid_argument);
}

TEST_CASE("parabolic refinement and peak spacing", "[readout]") {
    std::vector<ErrorPoint> pts;
    for (int k = 0; k < 10; ++k) {
        const double x = 0.1 * k;
        pts.push_back({x, 2.0 + 3.0 * (x - 0.437) * (x - 0.437), 1.0});
    }
    const Optimum o = parabolic_optimum(pts, 4.0);
    CHECK_THAT(o.delta_kappa, WithinAbs(0.437, 1e-12));
    CHECK_THAT(o.error, WithinAbs(2.0, 1e-12));
    CHECK_THAT(o.factor, WithinAbs(2.0, 1e-12));

    std::vector<double> t, y;
    for (int k = 0; k < 5000; ++k) {
        t.push_back(0.001 * k);
        y.push_back(std::sin(37.0 * t.back() + 0.3));
    }
    CHECK_THAT(peak_spacing_frequency(t, y, 0.0), WithinRel(37.0, 1e-4));
    CHECK(peak_spacing_frequency(std::span(t).first(10), std::span(y).first(10), 0.0) == 0.0);
}

TEST_CASE("parallel_for covers every index and rethrows the first failure", "[readout]") {
    for (unsigned jobs : {1u, 3u, 8u}) {
        std::vector<std::atomic<int>> hits(50);
        parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
        for (auto& h : hits) CHECK(h == 1);

        try {
            parallel_for(20, jobs, [](std::size_t i) {
                if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
            });
            FAIL("no exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "7");
        }
    }
}

TEST_CASE("oracle engine agrees at the single-tone optimum", "[readout][fock]") {
    ReadoutScenario sc = scenario(ReadoutMode::mono);
    const double g = evaluate_point(sc, 0.13).error;
    sc.engine = Engine::fock;
    const PointResult f = evaluate_point(sc, 0.13);
    CHECK(std::abs(g - f.error) <= 2e-3);
    REQUIRE(f.oracle.has_value());
    CHECK(f.oracle->ok());
}

TEST_CASE("curve and trace CSV", "[readout]") {
    ReadoutScenario sc = scenario(ReadoutMode::mono);
    sc.delta_kappa_grid = {0.1, 0.2};
    std::ostringstream os;
    write_error_curve_csv(os, scenario_error_curve(sc));
    CHECK(os.str().rfind("delta_kappa,E,factor\n", 0) == 0);
    ErrorTrace tr;
    tr.times = {0.0, 1.0};
    tr.error = {0.5, 0.25};
    std::ostringstream ts;
    write_trace_csv(ts, tr);
    CHECK(ts.str() == "t,E\n0,0.5\n1,0.25\n");
}
