#include "stgmvp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "stgmvp/errors.hpp"
#include "stgmvp/spd.hpp"

namespace stgmvp {

void validate(const SolverOptions& opts) {
    if (!(opts.tolerance >= 1e-14 && opts.tolerance <= 1e-2))
        throw ValidationError("solver tolerance must lie in [1e-14, 1e-2], got " +
                              std::to_string(opts.tolerance));
    if (opts.max_iterations < 1) throw ValidationError("solver max_iterations must be >= 1");
}

Eigen::MatrixXd sample_covariance(const ReturnPanel& panel) {
    validate(panel);
    const Eigen::MatrixXd x = centered_samples(panel);
    const auto n_assets = x.rows();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n_assets, n_assets);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(x.cols()));
    return cov.selfadjointView<Eigen::Lower>();
}

Eigen::VectorXd normalized_quadratic_forms(const Eigen::MatrixXd& centered,
                                           const Eigen::MatrixXd& cov) {
    const auto llt = factor_spd(cov, "quadratic forms");
    const Eigen::MatrixXd whitened = llt.matrixL().solve(centered);
    return whitened.colwise().squaredNorm().transpose() / static_cast<double>(centered.rows());
}

ShrinkageEstimate tyler_shrinkage(const ReturnPanel& panel, double rho, const SolverOptions& opts) {
    validate(panel);
    return tyler_shrinkage_centered(centered_samples(panel), rho, opts);
}

ShrinkageEstimate tyler_shrinkage_centered(const Eigen::MatrixXd& x, double rho,
                                           const SolverOptions& opts) {
    validate(opts);
    const auto n_assets = x.rows();
    const auto n = x.cols();
    if (n_assets < 1 || n < 2) throw ValidationError("tyler_shrinkage: need N >= 1 and n >= 2");
    const double dim = static_cast<double>(n_assets);
    const double count = static_cast<double>(n);

    // centred samples span at most n - 1 directions
    const double open_lo = std::max(0.0, 1.0 - (count - 1.0) / dim);
    if (!(rho > open_lo && rho <= 1.0))
        throw ValidationError("tyler_shrinkage: rho=" + std::to_string(rho) +
                              " outside admissible range (" + std::to_string(open_lo) + ", 1]");

    const Eigen::VectorXd norms2 = x.colwise().squaredNorm().transpose();
    const double max_norm2 = norms2.maxCoeff();
    for (Eigen::Index t = 0; t < n; ++t) {
        if (!(norms2(t) > 1e-28 * max_norm2) || !(max_norm2 > 0.0))
            throw DegenerateDataError("tyler_shrinkage: centred sample " + std::to_string(t) +
                                      " is the zero vector");
    }

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n_assets, n_assets);
    Eigen::MatrixXd cov;
    if (opts.initializer == Initializer::scaled_scm && rho < 1.0) {
        Eigen::MatrixXd scm = Eigen::MatrixXd::Zero(n_assets, n_assets);
        scm.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / count);
        scm = scm.selfadjointView<Eigen::Lower>();
        cov = (1.0 - rho) * scm / (scm.trace() / dim) + rho * eye;
    } else {
        cov = eye;
    }

    Eigen::MatrixXd next(n_assets, n_assets);
    Eigen::MatrixXd weighted(n_assets, n);
    double defect = 0.0;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const Eigen::VectorXd q = normalized_quadratic_forms(x, cov);
        for (Eigen::Index t = 0; t < n; ++t) {
            if (!(q(t) >= 1e-14 * norms2(t) / dim))
                throw DegenerateDataError("tyler_shrinkage: quadratic form of sample " +
                                          std::to_string(t) + " vanished");
            weighted.col(t) = x.col(t) * std::sqrt((1.0 - rho) / (count * q(t)));
        }
        next.setZero();
        next.selfadjointView<Eigen::Lower>().rankUpdate(weighted);
        next.diagonal().array() += rho;
        next.triangularView<Eigen::StrictlyUpper>() = next.transpose();

        defect = (next - cov).norm() / cov.norm();
        if (defect <= opts.tolerance) {
            ShrinkageEstimate est;
            est.matrix = std::move(cov);
            est.rho = rho;
            est.iterations = iter;
            est.residual = defect;
            est.tolerance = opts.tolerance;
            est.num_assets = n_assets;
            est.num_samples = n;
            return est;
        }
        cov.swap(next);
    }
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "tyler_shrinkage: no convergence at rho=%g after %d iterations, residual %.3e", rho,
                  opts.max_iterations, defect);
    throw SolverError(msg,
                      defect, opts.max_iterations);
}

}  // namespace stgmvp
