#include "dampsq/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace dampsq {

namespace odeint = boost::numeric::odeint;

QuadratureStats quadrature_stats(const GaussianMoments& m) {
    const double base = 2.0 * m.n + 1.0;
    const double mag = std::abs(m.s);
    QuadratureStats q;
    q.var_x = base - 2.0 * mag;
    q.var_y = base + 2.0 * mag;
    q.theta = mag == 0.0 ? 0.0 : pi + std::arg(m.s);
    return q;
}

std::array<double, 4> quadrature_covariance(const GaussianMoments& m) {
    const double base = 2.0 * m.n + 1.0;
    const double xx = (base + 2.0 * m.s.real()) / 4.0;
    const double yy = (base - 2.0 * m.s.real()) / 4.0;
    const double xy = m.s.imag() / 2.0;
    return {xx, xy, xy, yy};
}

// ---------------------------------------------------------------------------
// EvolutionContext

EvolutionContext::EvolutionContext(SystemParams sys, ValidatedModulation mod,
                                   std::optional<QubitState> qubit,
                                   std::optional<DriveSpec> drive, FrameChoice frame)
    : sys_(sys), mod_(std::move(mod)), qubit_(qubit), drive_(std::move(drive)), frame_(frame) {
    sys_.validate();
    rates_ = derived_rates(mod_, sys_);
    cavity_frequency_ = qubit_ ? pulled_frequency(sys_, *qubit_) : sys_.omega_r;

    switch (frame_) {
        case FrameChoice::resonator: frame_frequency_ = sys_.omega_r; break;
        case FrameChoice::excited_pull: frame_frequency_ = sys_.omega_r + sys_.chi; break;
        case FrameChoice::drive:
            if (!drive_) throw std::invalid_argument("EvolutionContext: drive frame without a drive");
            frame_frequency_ = drive_->omega_d;
            break;
    }
    if (drive_) {
        drive_->validate();
        const double scale = std::max(1.0, std::abs(frame_frequency_));
        if (std::abs(drive_->omega_d - frame_frequency_) > 1e-12 * scale) {
            throw std::invalid_argument(
                "EvolutionContext: a drive requires the rotating frame at the drive frequency");
        }
        epsilon_ = drive_->epsilon(rates_.gamma);
    }
}

complex EvolutionContext::squeeze_coefficient(double frame_frequency, double t) const {
    return lambda_in_frame(mod_, frame_frequency, t);
}

complex EvolutionContext::drive_coefficient(double frame_frequency, double t) const {
    if (!drive_ || epsilon_ == 0.0) return {0.0, 0.0};
    const double detuning = drive_->omega_d - frame_frequency;
    return std::polar(epsilon_, drive_->phase - detuning * t);
}

double EvolutionContext::gamma_at(double t) const {
    const double power = std::norm(lambda_in_frame(mod_, frame_frequency_, t));
    return sys_.kappa * (1.0 + (sys_.beta - 1.0) * power);
}

std::vector<double> EvolutionContext::forcing_frequencies(double frame_frequency) const {
    std::vector<double> out;
    const auto& tones = mod_.tones();
    for (std::size_t i = 0; i < tones.size(); ++i) {
        out.push_back(tones[i].frequency - 2.0 * frame_frequency);
        for (std::size_t j = 0; j < i; ++j) out.push_back(tones[i].frequency - tones[j].frequency);
    }
    if (drive_ && epsilon_ != 0.0) out.push_back(drive_->omega_d - frame_frequency);
    return out;
}

double EvolutionContext::forcing_period() const {
    double smallest = 0.0;
    for (double f : forcing_frequencies(frame_frequency_)) {
        const double a = std::abs(f);
        if (a < 1e-12 * std::max(1.0, sys_.omega_r)) continue;
        if (smallest == 0.0 || a < smallest) smallest = a;
    }
    return smallest == 0.0 ? 0.0 : 2.0 * pi / smallest;
}

// ---------------------------------------------------------------------------
// Closed forms

GaussianMoments closed_form_moments(const DerivedRates& rates, double t, double frame) {
    if (!rates.m) {
        throw std::invalid_argument("closed_form_moments: requires a single-tone modulation");
    }
    const double fill = -std::expm1(-rates.gamma * t);
    GaussianMoments m;
    m.n = fill * rates.n_bar;
    m.s = -fill * std::conj(*rates.m);
    m.frame = frame;
    return m;
}

// ---------------------------------------------------------------------------
// Moment integration

namespace {

using State = std::array<double, 5>;

State pack(const GaussianMoments& m) {
    return {m.mean.real(), m.mean.imag(), m.n, m.s.real(), m.s.imag()};
}

GaussianMoments unpack(const State& x, double frame) {
    return GaussianMoments{{x[0], x[1]}, x[2], {x[3], x[4]}, frame};
}

class MomentIntegrator {
public:
    MomentIntegrator(const EvolutionContext& ctx, double tol, double t0, const GaussianMoments& initial)
        : ctx_(ctx), tol_(tol),
          stepper_(odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>())) {
        double dt0 = 0.01 / ctx.sys().kappa;
        if (const double period = ctx.forcing_period(); period > 0.0) dt0 = std::min(dt0, period / 50.0);
        stepper_.initialize(pack(initial), t0, dt0);
    }

    double time() const { return stepper_.current_time(); }

    // State at t >= time of the last completed step's start.
    GaussianMoments at(double t) {
        advance_to(t);
        if (t == stepper_.current_time()) return unpack(stepper_.current_state(), ctx_.frame_frequency());
        State x{};
        stepper_.calc_state(t, x);
        return unpack(x, ctx_.frame_frequency());
    }

private:
    void advance_to(double t) {
        auto rhs = [this](const State& x, State& dxdt, double time) {
            const MomentDerivative d = moment_derivative(ctx_, unpack(x, 0.0), time);
            dxdt = {d.mean.real(), d.mean.imag(), d.n, d.s.real(), d.s.imag()};
        };
        while (stepper_.current_time() < t) {
            try {
                stepper_.do_step(rhs);
            } catch (const odeint::odeint_error& e) {
                throw StepFailure(std::string("moment integration: ") + e.what());
            }
            const double now = stepper_.current_time();
            const double dt = stepper_.current_time_step();
            if (!(dt > 1e-14 * std::max(1.0, std::abs(now)))) {
                std::ostringstream os;
                os << "moment integration: step size collapsed at t = " << now;
                throw StepFailure(os.str());
            }
            check(stepper_.current_state(), now);
        }
    }

    void check(const State& x, double t) const {
        for (double v : x) {
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "moment integration: non-finite state at t = " << t;
                throw StepFailure(os.str());
            }
        }
        const double n = x[2];
        const double s = std::hypot(x[3], x[4]);
        const double bound = std::sqrt(std::max(n, 0.0) * (n + 1.0)) * (1.0 + 10.0 * tol_);
        if (n < -10.0 * tol_ || s > bound + 10.0 * tol_) {
            std::ostringstream os;
            os << "moment integration: unphysical moments at t = " << t << " (n = " << n
               << ", |s| = " << s << ")";
            throw PhysicalityViolation(os.str());
        }
    }

    using Dense = decltype(odeint::make_dense_output(1.0, 1.0, odeint::runge_kutta_dopri5<State>()));

    const EvolutionContext& ctx_;
    double tol_;
    Dense stepper_;
};

}  // namespace

MomentDerivative moment_derivative(const EvolutionContext& ctx, const GaussianMoments& m, double t) {
    const double frame = ctx.frame_frequency();
    const double kappa = ctx.sys().kappa;
    const complex lam = ctx.squeeze_coefficient(frame, t);
    const double power = std::norm(lam);
    const double gamma = kappa * (1.0 + (ctx.sys().beta - 1.0) * power);
    const double delta = ctx.detuning();
    const complex i{0.0, 1.0};

    MomentDerivative d;
    d.mean = (-i * delta - gamma / 2.0) * m.mean - i * ctx.drive_coefficient(frame, t);
    d.n = -gamma * m.n + kappa * power;
    d.s = -(2.0 * i * delta + gamma) * m.s - kappa * std::conj(lam);
    return d;
}

MomentTrajectory integrate_moments(const EvolutionContext& ctx, std::span<const double> sample_times,
                                   const IntegrationOptions& options) {
    if (!(options.tol > 0.0)) throw std::invalid_argument("integrate_moments: tol must be positive");
    const GaussianMoments initial =
        options.initial.value_or(GaussianMoments::vacuum(ctx.frame_frequency()));

    MomentTrajectory out;
    out.times.reserve(sample_times.size());
    out.moments.reserve(sample_times.size());

    MomentIntegrator integrator(ctx, options.tol, options.t0, initial);
    double previous = options.t0;
    for (double t : sample_times) {
        if (t < previous) {
            throw std::invalid_argument("integrate_moments: sample times must be non-decreasing");
        }
        previous = t;
        GaussianMoments m = t == options.t0 ? initial : integrator.at(t);
        m.frame = ctx.frame_frequency();
        out.times.push_back(t);
        out.moments.push_back(m);
    }
    return out;
}

MomentTrajectory integrate_moments(const EvolutionContext& ctx, double t_end, double tol,
                                   std::size_t count) {
    if (count == 0) count = 1;
    std::vector<double> times(count + 1);
    for (std::size_t k = 0; k <= count; ++k) times[k] = t_end * static_cast<double>(k) / count;
    IntegrationOptions opts;
    opts.tol = tol;
    return integrate_moments(ctx, times, opts);
}

SettledState settle(const EvolutionContext& ctx, double tol) {
    const double gamma = ctx.rates().gamma;
    const double t_max = 50.0 / gamma;
    const double period = ctx.forcing_period();
    MomentIntegrator integrator(ctx, tol, 0.0, GaussianMoments::vacuum(ctx.frame_frequency()));

    SettledState out;
    out.period = period;
    if (period == 0.0) {
        const double chunk = 1.0 / gamma;
        for (double t = chunk;; t += chunk) {
            const double now = std::min(t, t_max);
            const GaussianMoments m = integrator.at(now);
            const MomentDerivative d = moment_derivative(ctx, m, now);
            const double rate = std::max({std::abs(d.mean), std::abs(d.n), std::abs(d.s)});
            out.moments = m;
            out.time = now;
            if (rate / gamma < 1e-9) {
                out.converged = true;
                return out;
            }
            if (now >= t_max) return out;
        }
    }

    GaussianMoments prev = GaussianMoments::vacuum(ctx.frame_frequency());
    for (long k = 1;; ++k) {
        const double now = static_cast<double>(k) * period;
        const GaussianMoments m = integrator.at(now);
        const double change = std::max({std::abs(m.mean - prev.mean), std::abs(m.n - prev.n),
                                        std::abs(m.s - prev.s)});
        out.moments = m;
        out.time = now;
        if (change / (gamma * period) < 1e-9) {
            out.converged = true;
            return out;
        }
        if (now >= t_max) return out;
        prev = m;
    }
}

// ---------------------------------------------------------------------------
// Bichromatic leading order

BichromaticParams BichromaticParams::symmetric(double lambda, double chi, double kappa) {
    BichromaticParams p;
    const double half = lambda / std::sqrt(2.0);
    p.lambda_0 = half;
    p.lambda_1 = half;
    p.chi = chi;
    p.kappa = kappa;
    return p;
}

GaussianMoments bichromatic_approx_moments(const BichromaticParams& p, QubitState q, double t) {
    const double a0 = std::abs(p.lambda_0);
    const double a1 = std::abs(p.lambda_1);
    if (std::abs(a0 - a1) > 1e-12 * std::max({1.0, a0, a1})) {
        throw std::invalid_argument("bichromatic_approx_moments: tone magnitudes must be equal");
    }
    const double power = a0 * a0 + a1 * a1;
    const double gamma = p.kappa * (1.0 - power);
    if (!(gamma > 0.0)) {
        throw ModulationError(ModulationErrorKind::overdriven,
                              "bichromatic modulation leaves no positive relaxation rate");
    }
    GaussianMoments m;
    m.frame = p.omega_r + p.chi;
    m.n = power * p.kappa / gamma;
    if (q == QubitState::excited) {
        m.s = -std::conj(p.lambda_1 * p.kappa / gamma);
        m.mean = 2.0 * p.epsilon / gamma;
    } else {
        m.s = -std::conj(p.lambda_0 * p.kappa / gamma) * std::polar(1.0, 4.0 * p.chi * t);
    }
    return m;
}

std::optional<std::string> dispersive_regime_warning(double chi, double kappa) {
    if (chi >= 5.0 * kappa) return std::nullopt;
    std::ostringstream os;
    os << "chi = " << chi << " is below 5 kappa; the leading-order dispersive picture is "
       << "not accurate";
    return os.str();
}

// ---------------------------------------------------------------------------
// Third-harmonic limited squeezing

BetaOptimum beta_variance_min(double beta, double kappa) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta_variance_min: beta must be >= 0");
    const double root = std::sqrt(beta);
    return BetaOptimum{kappa / ((1.0 + root) * (1.0 + root)), root / (1.0 + root)};
}

double beta_variance_curve(double delta_kappa, double beta, double kappa) {
    const double gamma = kappa - (1.0 - beta) * delta_kappa;
    if (!(gamma > 0.0)) throw DomainError("beta_variance_curve: relaxation rate is not positive");
    return (kappa + (1.0 + beta) * delta_kappa - 2.0 * std::sqrt(kappa * delta_kappa)) / gamma;
}

// ---------------------------------------------------------------------------
// Squeezed frame

double squeezed_frame_residual(const GaussianMoments& m, const SqueezeParams& sp) {
    // a' = cosh r a + e^{i theta} sinh r a^dag, written on (x, y) = (Re a, Im a).
    const double c = std::cosh(sp.r);
    const double s = std::sinh(sp.r);
    const double cs = std::cos(sp.theta);
    const double sn = std::sin(sp.theta);
    const std::array<double, 4> t{c + s * cs, s * sn, s * sn, c - s * cs};
    const std::array<double, 4> v = quadrature_covariance(m);

    // V' = T V T^T
    std::array<double, 4> tv{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            tv[2 * i + j] = t[2 * i] * v[j] + t[2 * i + 1] * v[2 + j];
    double residual = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double vp = tv[2 * i] * t[2 * j] + tv[2 * i + 1] * t[2 * j + 1];
            const double target = i == j ? 0.25 : 0.0;
            residual = std::max(residual, std::abs(vp - target));
        }
    }
    return residual;
}

}  // namespace dampsq
