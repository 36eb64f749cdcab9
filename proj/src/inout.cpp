#include "dampsq/inout.hpp"

#include <cmath>
#include <stdexcept>

#include "dampsq/csv.hpp"

namespace dampsq {

namespace {

void check_args(double kappa, double lambda_1) {
    if (!(kappa > 0.0)) throw std::invalid_argument("transfer matrices: kappa must be positive");
    if (!(lambda_1 >= 0.0) || !(lambda_1 < 1.0)) {
        throw std::invalid_argument("transfer matrices: lambda_1 must lie in [0, 1)");
    }
}

Matrix2c mixing(double sign, double lambda) {
    Matrix2c m;
    m << 1.0, sign * lambda, sign * lambda, 1.0;
    return m;
}

}  // namespace

Matrix2c intracavity_matrix(double omega, double omega_r, double kappa, double lambda_1) {
    check_args(kappa, lambda_1);
    const double gamma = (1.0 - lambda_1 * lambda_1) * kappa;
    const complex pref = std::sqrt(kappa) / complex{gamma / 2.0, -(omega - omega_r)};
    return pref * mixing(-1.0, lambda_1);
}

Matrix2c mirrored_inverse_closed_form(double omega, double omega_r, double kappa, double lambda_1) {
    check_args(kappa, lambda_1);
    const double gamma = (1.0 - lambda_1 * lambda_1) * kappa;
    const complex pref = complex{gamma / 2.0, omega - omega_r} /
                         (std::sqrt(kappa) * (1.0 - lambda_1 * lambda_1));
    return pref * mixing(1.0, lambda_1);
}

TransferPoint transfer_matrices(double omega, double omega_r, double kappa, double lambda_1) {
    TransferPoint p;
    p.omega = omega;
    p.M = intracavity_matrix(omega, omega_r, kappa, lambda_1);
    p.M_inv_mirror = intracavity_matrix(2.0 * omega_r - omega, omega_r, kappa, lambda_1).inverse();
    p.product = p.M_inv_mirror * p.M;
    p.phase = std::arg(p.product(0, 0));
    const Matrix2c target = std::polar(1.0, p.phase) * Matrix2c::Identity();
    p.deviation = (p.product - target).cwiseAbs().maxCoeff();
    return p;
}

double transfer_phase(double omega, double omega_r, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("transfer_phase: gamma must be positive");
    return 2.0 * std::atan(2.0 * (omega - omega_r) / gamma);
}

std::vector<TransferPoint> transfer_sweep(std::span<const double> omegas, double omega_r, double kappa,
                                          double lambda_1) {
    std::vector<TransferPoint> out;
    out.reserve(omegas.size());
    for (double w : omegas) out.push_back(transfer_matrices(w, omega_r, kappa, lambda_1));
    return out;
}

void write_transfer_csv(std::ostream& os, std::span<const TransferPoint> sweep) {
    CsvWriter csv(os);
    csv.header({"omega", "phi", "deviation"});
    for (const auto& p : sweep) csv.row({p.omega, p.phase, p.deviation});
}

}  // namespace dampsq
