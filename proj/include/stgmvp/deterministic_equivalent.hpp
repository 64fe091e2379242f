#pragma once

#include <Eigen/Dense>

namespace stgmvp {

/// Spectrum of a population covariance together with the aspect ratio c = N/n.
struct SpectralModel {
    Eigen::VectorXd eigenvalues;  // ascending, strictly positive
    double c = 0.0;
    double kappa = 0.0;           // eigenvalue mean

    static SpectralModel from_eigenvalues(Eigen::VectorXd eigenvalues, double c);
    static SpectralModel from_covariance(const Eigen::MatrixXd& cov, double c);
};

/// Unique positive root of (1/N) sum_i l_i / (g rho + (1 - rho) l_i) = 1.
///
/// Bisection on g / kappa over [1e-6, 1e6] to 1e-13 absolute; the left side is
/// strictly decreasing in g, and the sign change across the bracket is checked.
double solve_gamma(const SpectralModel& model, double rho);

/// (1/N) sum_i c g^2 l_i^2 / (g rho + (1 - rho) l_i)^2.
double beta_coeff(const SpectralModel& model, double rho, double gamma);

/// Large-dimensional limit of the realized GMVP risk obtained with the
/// shrinkage-Tyler estimate at intensity rho, for population covariance `cov`
/// and aspect ratio c:
///
///   g^2 / (g^2 - b (1-rho)^2) * 1^T A^{-1} C A^{-1} 1 / (1^T A^{-1} 1)^2,
///   A = (1-rho)/g C + rho I.
///
/// Throws NumericError when g^2 <= b (1-rho)^2.
double risk_deterministic_equivalent(const Eigen::MatrixXd& cov, double rho, double c);

}  // namespace stgmvp
