#include "dampsq/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dampsq {

FockState FockState::vacuum(std::size_t N, double frame) { return number(N, 0, frame); }

FockState FockState::number(std::size_t N, std::size_t k, double frame) {
    if (k > N) throw std::invalid_argument("FockState::number: level above truncation");
    FockState s;
    s.rho = Eigen::MatrixXcd::Zero(N + 1, N + 1);
    s.rho(k, k) = 1.0;
    s.frame = frame;
    return s;
}

FockState FockState::coherent(std::size_t N, complex alpha, double frame) {
    Eigen::VectorXcd c(N + 1);
    c(0) = 1.0;
    for (std::size_t k = 1; k <= N; ++k) c(k) = c(k - 1) * alpha / std::sqrt(static_cast<double>(k));
    c /= c.norm();
    FockState s;
    s.rho = c * c.adjoint();
    s.frame = frame;
    return s;
}

StateDiagnostics validate_state(const FockState& state, const DiagnosticTolerances& tol) {
    const auto& rho = state.rho;
    const Eigen::Index d = rho.rows();
    StateDiagnostics out;
    out.trace_error = std::abs(rho.trace() - 1.0);
    out.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    out.tail = rho(d - 1, d - 1).real();
    if (d >= 2) out.tail = std::max(out.tail, rho(d - 2, d - 2).real());
    out.trace_ok = out.trace_error <= tol.trace;
    out.hermitian_ok = out.hermiticity <= tol.hermiticity;
    out.positive_ok = out.min_eigenvalue >= tol.min_eigenvalue;
    out.tail_ok = out.tail <= tol.tail;
    return out;
}

StateDiagnostics worst_of(const StateDiagnostics& a, const StateDiagnostics& b) {
    StateDiagnostics w;
    w.trace_error = std::max(a.trace_error, b.trace_error);
    w.hermiticity = std::max(a.hermiticity, b.hermiticity);
    w.min_eigenvalue = std::min(a.min_eigenvalue, b.min_eigenvalue);
    w.tail = std::max(a.tail, b.tail);
    w.trace_ok = a.trace_ok && b.trace_ok;
    w.hermitian_ok = a.hermitian_ok && b.hermitian_ok;
    w.positive_ok = a.positive_ok && b.positive_ok;
    w.tail_ok = a.tail_ok && b.tail_ok;
    return w;
}

GaussianMoments moments_from_rho(const FockState& state) {
    const auto& rho = state.rho;
    const Eigen::Index d = rho.rows();
    complex a{0.0, 0.0};
    complex a2{0.0, 0.0};
    double num = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        num += static_cast<double>(k) * rho(k, k).real();
        if (k + 1 < d) a += std::sqrt(static_cast<double>(k + 1)) * rho(k + 1, k);
        if (k + 2 < d) {
            a2 += std::sqrt(static_cast<double>((k + 1) * (k + 2))) * rho(k + 2, k);
        }
    }
    GaussianMoments m;
    m.mean = a;
    m.n = num - std::norm(a);
    m.s = a2 - a * a;
    m.frame = state.frame;
    return m;
}

namespace {

// Normalized oscillator eigenfunctions in the alpha-plane coordinate,
// psi~_k(x) = 2^{1/4} psi_k(sqrt(2) x), for k = 0..N.
void hermite_functions(double x, std::size_t N, std::vector<double>& out) {
    out.assign(N + 1, 0.0);
    const double q = std::sqrt(2.0) * x;
    const double scale = std::pow(2.0, 0.25);
    out[0] = scale * std::pow(pi, -0.25) * std::exp(-0.5 * q * q);
    if (N >= 1) out[1] = std::sqrt(2.0) * q * out[0];
    for (std::size_t k = 1; k < N; ++k) {
        const double kk = static_cast<double>(k);
        out[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * q * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
    }
}

}  // namespace

SampledDistribution marginal_from_rho(const FockState& state, double phi, std::span<const double> grid) {
    const MarginalStats stats = marginal_gaussian(moments_from_rho(state), phi);
    if (grid.size() < 2 || grid.front() > stats.x0 - 4.0 * stats.sigma ||
        grid.back() < stats.x0 + 4.0 * stats.sigma) {
        std::ostringstream os;
        os << "marginal_from_rho: grid must cover +-4 sigma around " << stats.x0 << " (sigma = "
           << stats.sigma << ")";
        throw GridError(GridErrorKind::too_narrow, os.str());
    }
    const Eigen::Index d = state.rho.rows();
    Eigen::MatrixXcd rotated = state.rho;
    for (Eigen::Index m = 0; m < d; ++m)
        for (Eigen::Index n = 0; n < d; ++n)
            rotated(m, n) *= std::polar(1.0, -phi * static_cast<double>(m - n));

    SampledDistribution out;
    out.x.assign(grid.begin(), grid.end());
    out.p.resize(grid.size());
    std::vector<double> psi;
    Eigen::VectorXd v(d);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        hermite_functions(grid[i], static_cast<std::size_t>(d - 1), psi);
        for (Eigen::Index k = 0; k < d; ++k) v(k) = psi[static_cast<std::size_t>(k)];
        out.p[i] = (v.transpose() * rotated.real() * v).value();
    }
    return out;
}

std::vector<double> default_marginal_grid(const FockState& state, double phi, std::size_t points) {
    const MarginalStats stats = marginal_gaussian(moments_from_rho(state), phi);
    std::vector<double> grid(points);
    const double lo = stats.x0 - 8.0 * stats.sigma;
    const double hi = stats.x0 + 8.0 * stats.sigma;
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

// Banded Lindblad kernel on a zero-padded (N + 5)^2 array in the cavity frame.
class Kernel {
public:
    Kernel(const EvolutionContext& ctx, std::size_t N)
        : ctx_(ctx), D_(N + 1), P_(N + 5), sq_(N + 7, 0.0), up_(N + 1, 0.0) {
        for (std::size_t k = 0; k <= N + 2; ++k) sq_[k + 2] = std::sqrt(static_cast<double>(k));
        for (std::size_t k = 0; k < N; ++k) up_[k] = static_cast<double>(k + 1);
    }

    std::size_t size() const { return P_ * P_; }

    // Only entries with m + n even are evolved; valid without a drive when the
    // state starts in that sector.
    void set_even_sector(bool on) { even_ = on; }
    std::size_t index(std::size_t m, std::size_t n) const { return (m + 2) * P_ + (n + 2); }

    void load(const Eigen::MatrixXcd& rho, std::vector<complex>& buf) const {
        buf.assign(size(), complex{0.0, 0.0});
        for (std::size_t m = 0; m < D_; ++m)
            for (std::size_t n = 0; n < D_; ++n)
                buf[index(m, n)] = rho(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    }

    Eigen::MatrixXcd store(const std::vector<complex>& buf) const {
        Eigen::MatrixXcd rho(D_, D_);
        for (std::size_t m = 0; m < D_; ++m)
            for (std::size_t n = 0; n < D_; ++n)
                rho(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = buf[index(m, n)];
        return rho;
    }

    void rhs(const std::vector<complex>& r, std::vector<complex>& out, double t) const {
        const double wc = ctx_.cavity_frequency();
        const double kappa = ctx_.sys().kappa;
        const complex lam = ctx_.squeeze_coefficient(wc, t);
        const double power = std::norm(lam);
        const double gd = kappa * (1.0 + ctx_.sys().beta * power);
        const double gu = kappa * power;
        const complex mu = kappa * lam;
        const complex muc = std::conj(mu);
        const complex eta = ctx_.drive_coefficient(wc, t);
        const complex ieta = complex{0.0, -1.0} * eta;
        const complex ietac = complex{0.0, -1.0} * std::conj(eta);
        const bool driven = eta != complex{0.0, 0.0};
        const double* sq = sq_.data() + 2;
        const std::size_t stride = even_ ? 2 : 1;

        for (std::size_t m = 0; m < D_; ++m) {
            const double sm = sq[m], sm1 = sq[m + 1], sm2 = sq[m + 2];
            const double smm = m >= 1 ? sq[m - 1] : 0.0;
            const complex* row = r.data() + (m + 2) * P_ + 2;
            const complex* up1 = row + P_;
            const complex* up2 = row + 2 * P_;
            const complex* dn1 = row - P_;
            const complex* dn2 = row - 2 * P_;
            complex* o = out.data() + (m + 2) * P_ + 2;
            for (std::size_t n = m; n < D_; n += stride) {
                const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(n);
                const double sn = sq[n], sn1 = sq[n + 1], sn2 = sq[n + 2];
                const double snm = n >= 1 ? sq[n - 1] : 0.0;
                const complex rmn = row[j];
                complex v = gd * (sm1 * sn1 * up1[j + 1] - 0.5 * static_cast<double>(m + n) * rmn);
                v += gu * (sm * sn * dn1[j - 1] - 0.5 * (up_[m] + up_[n]) * rmn);
                v += mu * (sm1 * sn * up1[j - 1] - 0.5 * (sm1 * sm2 * up2[j] + snm * sn * row[j - 2]));
                v += muc * (sm * sn1 * dn1[j + 1] - 0.5 * (smm * sm * dn2[j] + sn1 * sn2 * row[j + 2]));
                if (driven) {
                    v += ieta * (sm * dn1[j] - sn1 * row[j + 1]);
                    v += ietac * (sm1 * up1[j] - sn * row[j - 1]);
                }
                o[j] = v;
            }
            o[m] = complex{o[m].real(), 0.0};
        }
        for (std::size_t m = 0; m < D_; ++m)
            for (std::size_t n = m + stride; n < D_; n += stride) out[index(n, m)] = std::conj(out[index(m, n)]);
    }

private:
    const EvolutionContext& ctx_;
    std::size_t D_;
    std::size_t P_;
    std::vector<double> sq_;  // sqrt(k) at k + 2, zero for k < 0
    std::vector<double> up_;  // diagonal of the truncated a a^dag
    bool even_{false};
};

bool in_even_sector(const Eigen::MatrixXcd& rho) {
    for (Eigen::Index m = 0; m < rho.rows(); ++m)
        for (Eigen::Index n = (m + 1) % 2; n < rho.cols(); n += 2)
            if (rho(m, n) != complex{0.0, 0.0}) return false;
    return true;
}

complex trace_of(const std::vector<complex>& buf, const Kernel& k, std::size_t D) {
    complex t{0.0, 0.0};
    for (std::size_t i = 0; i < D; ++i) t += buf[k.index(i, i)];
    return t;
}

// rho_f,mn = rho_c,mn e^{-i Delta t (m - n)} with Delta = omega_c - omega_f.
void rotate_frame(Eigen::MatrixXcd& rho, double delta, double t) {
    if (delta == 0.0 || t == 0.0) return;
    const Eigen::Index d = rho.rows();
    for (Eigen::Index m = 0; m < d; ++m)
        for (Eigen::Index n = 0; n < d; ++n)
            if (m != n) rho(m, n) *= std::polar(1.0, -delta * t * static_cast<double>(m - n));
}

void write_snapshot(std::ofstream& os, const Eigen::MatrixXcd& rho, double t) {
    auto put_u64 = [&os](std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
        os.write(reinterpret_cast<const char*>(b), 8);
    };
    auto put_f64 = [&put_u64](double v) { put_u64(std::bit_cast<std::uint64_t>(v)); };
    put_u64(static_cast<std::uint64_t>(rho.rows()));
    put_f64(t);
    for (Eigen::Index m = 0; m < rho.rows(); ++m) {
        for (Eigen::Index n = 0; n < rho.cols(); ++n) {
            put_f64(rho(m, n).real());
            put_f64(rho(m, n).imag());
        }
    }
}

}  // namespace

std::size_t suggest_truncation(const EvolutionContext& ctx) {
    const DerivedRates& r = ctx.rates();
    double amp = 0.0;
    for (const Tone& tone : ctx.modulation().tones()) amp += std::abs(tone.amplitude);
    const double m = amp * ctx.sys().kappa / r.gamma;
    const double mean = 2.0 * ctx.epsilon() / r.gamma;
    const auto N = static_cast<std::size_t>(std::ceil(10.0 * (r.n_bar + m + mean * mean) + 20.0));
    return N + N % 2;
}

double default_fock_step(const EvolutionContext& ctx, std::size_t N) {
    const double kappa = ctx.sys().kappa;
    double dt = 0.01 / kappa;
    double fmax = 0.0;
    for (double f : ctx.forcing_frequencies(ctx.cavity_frequency())) fmax = std::max(fmax, std::abs(f));
    if (fmax > 0.0) dt = std::min(dt, 2.0 * pi / (20.0 * fmax));

    double amp = 0.0;
    for (const Tone& tone : ctx.modulation().tones()) amp += std::abs(tone.amplitude);
    const double nn = static_cast<double>(N) + 1.0;
    const double rate = 2.0 * kappa * nn * ((1.0 + amp) * (1.0 + amp) + ctx.sys().beta * amp * amp) +
                        2.0 * ctx.epsilon() * std::sqrt(nn);
    return std::min(dt, 2.7 / rate);
}

FockTrajectory integrate_rho(const EvolutionContext& ctx, std::size_t N, std::span<const double> sample_times,
                             const FockOptions& options) {
    if (N < 4) throw std::invalid_argument("integrate_rho: truncation N must be at least 4");
    const double dt = options.dt > 0.0 ? options.dt : default_fock_step(ctx, N);
    const double delta = ctx.detuning();
    const double frame = ctx.frame_frequency();

    Kernel kernel(ctx, N);
    const std::size_t D = N + 1;
    Eigen::MatrixXcd rho0 = options.initial ? options.initial->rho : FockState::vacuum(N).rho;
    if (static_cast<std::size_t>(rho0.rows()) != D || rho0.cols() != rho0.rows()) {
        throw std::invalid_argument("integrate_rho: initial state has the wrong dimension");
    }
    rotate_frame(rho0, -delta, options.t0);
    kernel.set_even_sector(ctx.epsilon() == 0.0 && in_even_sector(rho0));

    std::vector<complex> y, k1, k2, k3, k4, tmp;
    kernel.load(rho0, y);
    for (auto* v : {&k1, &k2, &k3, &k4, &tmp}) v->assign(kernel.size(), complex{0.0, 0.0});

    std::optional<std::ofstream> dump;
    if (options.dump_path) {
        dump.emplace(*options.dump_path, std::ios::binary | std::ios::trunc);
        if (!*dump) throw std::runtime_error("integrate_rho: cannot open " + *options.dump_path);
    }

    FockTrajectory out;
    out.dt = dt;
    double t = options.t0;
    complex trace = trace_of(y, kernel, D);
    const std::size_t total = kernel.size();

    auto step = [&](double h) {
        kernel.rhs(y, k1, t);
        for (std::size_t i = 0; i < total; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        kernel.rhs(tmp, k2, t + 0.5 * h);
        for (std::size_t i = 0; i < total; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        kernel.rhs(tmp, k3, t + 0.5 * h);
        for (std::size_t i = 0; i < total; ++i) tmp[i] = y[i] + h * k3[i];
        kernel.rhs(tmp, k4, t + h);
        const double w = h / 6.0;
        for (std::size_t i = 0; i < total; ++i) y[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        t += h;
        ++out.steps;
        const complex next = trace_of(y, kernel, D);
        out.max_step_trace_change = std::max(out.max_step_trace_change, std::abs(next - trace));
        trace = next;
    };

    for (double ts : sample_times) {
        if (ts < t - 1e-12 * std::max(1.0, std::abs(t))) {
            throw std::invalid_argument("integrate_rho: sample times must be non-decreasing and >= t0");
        }
        const double span = ts - t;
        if (span > 0.0) {
            const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
            const double h = span / static_cast<double>(count);
            for (std::size_t i = 0; i < count; ++i) step(h);
            t = ts;
        }
        for (const complex& v : y) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                std::ostringstream os;
                os << "integrate_rho: state diverged before t = " << ts << " (dt = " << dt << ")";
                throw StepFailure(os.str());
            }
        }

        FockState state;
        state.rho = kernel.store(y);
        rotate_frame(state.rho, delta, ts);
        state.frame = frame;
        StateDiagnostics diag = validate_state(state, options.tolerances);
        if (options.check_tail && !diag.tail_ok) {
            std::ostringstream os;
            os << "integrate_rho: tail occupation " << diag.tail << " exceeds "
               << options.tolerances.tail << " at t = " << ts << " with N = " << N;
            throw TruncationError(os.str());
        }
        if (options.check_positivity && !diag.positive_ok) {
            std::ostringstream os;
            os << "integrate_rho: smallest eigenvalue " << diag.min_eigenvalue << " at t = " << ts;
            throw PositivityError(os.str());
        }
        if (dump) write_snapshot(*dump, state.rho, ts);
        out.times.push_back(ts);
        out.states.push_back(std::move(state));
        out.diagnostics.push_back(diag);
    }
    return out;
}

FockTrajectory integrate_rho(const EvolutionContext& ctx, std::size_t N, double t_end, double dt,
                             std::size_t count) {
    if (count == 0) count = 1;
    std::vector<double> times(count + 1);
    for (std::size_t k = 0; k <= count; ++k) times[k] = t_end * static_cast<double>(k) / count;
    FockOptions opts;
    opts.dt = dt;
    return integrate_rho(ctx, N, times, opts);
}

FockTrajectory integrate_rho_adaptive(const EvolutionContext& ctx, std::span<const double> sample_times,
                                      FockOptions options, std::size_t max_N) {
    std::size_t N = std::max<std::size_t>(suggest_truncation(ctx), 4);
    const bool fixed_dt = options.dt > 0.0;
    for (;;) {
        try {
            if (!fixed_dt) options.dt = 0.0;
            return integrate_rho(ctx, N, sample_times, options);
        } catch (const TruncationError&) {
            if (N >= max_N) throw;
            N = static_cast<std::size_t>(std::ceil(1.25 * static_cast<double>(N)));
            N = std::min(max_N, N + N % 2);
        }
    }
}

Eigen::MatrixXcd lowering_operator(std::size_t N) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(N + 1, N + 1);
    for (std::size_t k = 0; k < N; ++k) {
        a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k + 1)) = std::sqrt(static_cast<double>(k + 1));
    }
    return a;
}

Eigen::MatrixXcd dissipator(const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& rho) {
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    return c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
}

Eigen::MatrixXcd squeeze_superoperator(const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& rho) {
    const Eigen::MatrixXcd c2 = c * c;
    return c * rho * c - 0.5 * (c2 * rho + rho * c2);
}

Eigen::MatrixXcd fock_derivative(const EvolutionContext& ctx, const Eigen::MatrixXcd& rho, double t) {
    const std::size_t N = static_cast<std::size_t>(rho.rows()) - 1;
    Kernel kernel(ctx, N);
    std::vector<complex> in, out(kernel.size(), complex{0.0, 0.0});
    kernel.load(rho, in);
    kernel.rhs(in, out, t);
    return kernel.store(out);
}

}  // namespace dampsq
