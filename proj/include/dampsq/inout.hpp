// inout.hpp - input-output transfer matrices of the modulated resonator
// (real lambda_1, beta = 0).

#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dampsq/model.hpp"

namespace dampsq {

using Matrix2c = Eigen::Matrix2cd;

struct TransferPoint {
    double omega{0.0};
    Matrix2c M;            // (a_in, a_in^dag) -> (a, a^dag) at omega
    Matrix2c M_inv_mirror;  // inverse of M at the mirrored frequency 2 omega_r - omega
    Matrix2c product;      // M_inv_mirror * M
    double phase{0.0};     // arg of product(0, 0)
    double deviation{0.0};  // max |product - e^{i phase} I|
};

// sqrt(kappa) / (Gamma/2 - i (omega - omega_r)) [[1, -lambda], [-lambda, 1]],
// Gamma = (1 - lambda^2) kappa.
Matrix2c intracavity_matrix(double omega, double omega_r, double kappa, double lambda_1);

// (Gamma/2 + i delta) / (sqrt(kappa) (1 - lambda^2)) [[1, lambda], [lambda, 1]]
Matrix2c mirrored_inverse_closed_form(double omega, double omega_r, double kappa, double lambda_1);

// Throws std::invalid_argument unless 0 <= lambda_1 < 1 and kappa > 0.
TransferPoint transfer_matrices(double omega, double omega_r, double kappa, double lambda_1);

// 2 arctan(2 (omega - omega_r) / gamma)
double transfer_phase(double omega, double omega_r, double gamma);

std::vector<TransferPoint> transfer_sweep(std::span<const double> omegas, double omega_r, double kappa,
                                          double lambda_1);

// Columns omega, phi, deviation.
void write_transfer_csv(std::ostream& os, std::span<const TransferPoint> sweep);

}  // namespace dampsq
