#include "stgmvp/deterministic_equivalent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "stgmvp/errors.hpp"

namespace stgmvp {

namespace {

void check_rho(double rho, double c, const char* context) {
    const double lo = std::max(0.0, 1.0 - 1.0 / c);
    if (!(rho > lo && rho <= 1.0))
        throw ValidationError(std::string(context) + ": rho=" + std::to_string(rho) +
                              " outside (" + std::to_string(lo) + ", 1]");
}

// (1/N) sum l / (g rho + (1-rho) l) - 1, strictly decreasing in g.
double gamma_equation(const Eigen::VectorXd& lambda, double rho, double gamma) {
    return (lambda.array() / (gamma * rho + (1.0 - rho) * lambda.array())).mean() - 1.0;
}

}  // namespace

SpectralModel SpectralModel::from_eigenvalues(Eigen::VectorXd eigenvalues, double c) {
    if (eigenvalues.size() < 1) throw ValidationError("SpectralModel: empty spectrum");
    if (!(c > 0.0)) throw ValidationError("SpectralModel: aspect ratio must be positive");
    std::sort(eigenvalues.begin(), eigenvalues.end());
    if (!(eigenvalues(0) > 0.0) || !eigenvalues.allFinite())
        throw ValidationError("SpectralModel: eigenvalues must be positive and finite");
    SpectralModel m;
    m.kappa = eigenvalues.mean();
    m.eigenvalues = std::move(eigenvalues);
    m.c = c;
    return m;
}

SpectralModel SpectralModel::from_covariance(const Eigen::MatrixXd& cov, double c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericError("SpectralModel: eigensolver failed");
    return from_eigenvalues(eig.eigenvalues(), c);
}

double solve_gamma(const SpectralModel& model, double rho) {
    check_rho(rho, model.c, "solve_gamma");
    const Eigen::VectorXd scaled = model.eigenvalues / model.kappa;
    double lo = 1e-6;
    double hi = 1e6;
    if (!(gamma_equation(scaled, rho, lo) > 0.0) || !(gamma_equation(scaled, rho, hi) < 0.0))
        throw NumericError("solve_gamma: no sign change across [1e-6, 1e6] kappa");
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f = gamma_equation(scaled, rho, mid);
        if (f == 0.0) {
            lo = hi = mid;
            break;
        }
        (f > 0.0 ? lo : hi) = mid;
    }
    // Newton polish inside the final bracket; removes the last bisection ulps.
    double g = 0.5 * (lo + hi);
    for (int k = 0; k < 2; ++k) {
        const auto denom = g * rho + (1.0 - rho) * scaled.array();
        const double slope = -(rho * scaled.array() / denom.square()).mean();
        if (!(slope < 0.0)) break;
        const double step = g - gamma_equation(scaled, rho, g) / slope;
        if (!(step >= lo - 1e-13 && step <= hi + 1e-13)) break;
        g = step;
    }
    return g * model.kappa;
}

double beta_coeff(const SpectralModel& model, double rho, double gamma) {
    const auto& l = model.eigenvalues.array();
    const auto denom = gamma * rho + (1.0 - rho) * l;
    return (model.c * gamma * gamma * l.square() / denom.square()).mean();
}

double risk_deterministic_equivalent(const Eigen::MatrixXd& cov, double rho, double c) {
    if (cov.rows() != cov.cols() || cov.rows() < 1)
        throw ValidationError("risk_deterministic_equivalent: covariance must be square");
    check_rho(rho, c, "risk_deterministic_equivalent");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NumericError("risk_deterministic_equivalent: eigensolver failed");
    const auto model = SpectralModel::from_eigenvalues(eig.eigenvalues(), c);
    const double gamma = solve_gamma(model, rho);
    const double beta = beta_coeff(model, rho, gamma);
    const double g2 = gamma * gamma;
    const double gap = g2 - beta * (1.0 - rho) * (1.0 - rho);
    if (!(gap > 0.0))
        throw NumericError("risk_deterministic_equivalent: gamma^2 <= beta (1-rho)^2 at rho=" +
                           std::to_string(rho));

    // In the eigenbasis A = (1-rho)/g C + rho I is diagonal.
    const Eigen::ArrayXd lambda = eig.eigenvalues().array();
    const Eigen::ArrayXd a_inv = 1.0 / ((1.0 - rho) / gamma * lambda + rho);
    const Eigen::ArrayXd ones_rot = eig.eigenvectors().transpose() * Eigen::VectorXd::Ones(cov.rows());
    const double numer = (ones_rot.square() * a_inv.square() * lambda).sum();
    const double denom = (ones_rot.square() * a_inv).sum();
    return g2 / gap * numer / (denom * denom);
}

}  // namespace stgmvp
