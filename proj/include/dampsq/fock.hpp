// fock.hpp - truncated number-basis master-equation solver used as the
// reference for the Gaussian engine.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dampsq/gaussian.hpp"
#include "dampsq/measurement.hpp"

namespace dampsq {

// Density matrix on the levels 0..N (dim = N + 1).
struct FockState {
    Eigen::MatrixXcd rho;
    double frame{0.0};

    std::size_t dim() const noexcept { return static_cast<std::size_t>(rho.rows()); }
    std::size_t truncation() const noexcept { return dim() - 1; }

    static FockState vacuum(std::size_t N, double frame = 0.0);
    static FockState number(std::size_t N, std::size_t k, double frame = 0.0);
    // Truncated and renormalized |alpha><alpha|.
    static FockState coherent(std::size_t N, complex alpha, double frame = 0.0);
};

struct DiagnosticTolerances {
    double trace{1e-9};
    double hermiticity{1e-10};
    double min_eigenvalue{-1e-8};
    double tail{1e-6};
};

struct StateDiagnostics {
    double trace_error{0.0};     // |tr rho - 1|
    double hermiticity{0.0};     // max |rho - rho^dag|
    double min_eigenvalue{0.0};
    double tail{0.0};            // max(rho_NN, rho_{N-1,N-1})
    bool trace_ok{true};
    bool hermitian_ok{true};
    bool positive_ok{true};
    bool tail_ok{true};

    bool ok() const noexcept { return trace_ok && hermitian_ok && positive_ok && tail_ok; }
};

// Element-wise worst of two diagnostics.
StateDiagnostics worst_of(const StateDiagnostics& a, const StateDiagnostics& b);

// Reports the four state invariants; never throws on a violation.
StateDiagnostics validate_state(const FockState& state, const DiagnosticTolerances& tol = {});

GaussianMoments moments_from_rho(const FockState& state);

// Homodyne marginal along phi on the given grid. Throws GridError(too_narrow)
// when the grid does not span +-4 standard deviations of the state's marginal.
SampledDistribution marginal_from_rho(const FockState& state, double phi, std::span<const double> grid);

// 1024 points over +-8 sigma around the marginal center.
std::vector<double> default_marginal_grid(const FockState& state, double phi, std::size_t points = 1024);

struct FockOptions {
    double dt{0.0};  // 0 selects default_fock_step
    double t0{0.0};
    std::optional<FockState> initial;  // vacuum by default
    DiagnosticTolerances tolerances{};
    bool check_tail{true};
    bool check_positivity{true};
    std::optional<std::string> dump_path;  // binary rho snapshots at sample times
};

struct FockTrajectory {
    std::vector<double> times;
    std::vector<FockState> states;
    std::vector<StateDiagnostics> diagnostics;
    std::size_t steps{0};
    double dt{0.0};
    double max_step_trace_change{0.0};
};

// ceil(10 (n_bar + |m| + |<a>|^2) + 20) rounded up to even, with |m| and |<a>|
// bounded by their resonant values for multi-tone or detuned contexts.
std::size_t suggest_truncation(const EvolutionContext& ctx);

// Largest step satisfying dt <= 0.01 / kappa, dt <= 2 pi / (20 f_max) over the
// forcing frequencies seen by the cavity, and the RK4 stability bound of the
// truncated generator.
double default_fock_step(const EvolutionContext& ctx, std::size_t N);

// Fixed-step RK4 evolution of the master equation on levels 0..N, returning the
// states at sample_times in the context's frame.
//
// Throws TruncationError when the tail occupation exceeds the tolerance at a
// sample time, PositivityError when the smallest eigenvalue drops below it.
FockTrajectory integrate_rho(const EvolutionContext& ctx, std::size_t N,
                             std::span<const double> sample_times, const FockOptions& options = {});

// count + 1 equally spaced samples on [0, t_end].
FockTrajectory integrate_rho(const EvolutionContext& ctx, std::size_t N, double t_end, double dt,
                             std::size_t count = 100);

// Repeats integrate_rho with N grown by 25% (rounded up to even) after each
// TruncationError, up to max_N.
FockTrajectory integrate_rho_adaptive(const EvolutionContext& ctx, std::span<const double> sample_times,
                                      FockOptions options = {}, std::size_t max_N = 400);

// Generator pieces as dense matrices, for tests: D[c] rho and S[a] rho with
// truncated ladder operators on levels 0..N.
Eigen::MatrixXcd lowering_operator(std::size_t N);
Eigen::MatrixXcd dissipator(const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd squeeze_superoperator(const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& rho);

// Lindblad right-hand side evaluated with the banded kernel used by the
// integrator, in the cavity frame of the context at time t.
Eigen::MatrixXcd fock_derivative(const EvolutionContext& ctx, const Eigen::MatrixXcd& rho, double t);

}  // namespace dampsq
