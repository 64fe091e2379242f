#pragma once

#include <Eigen/Dense>

#include "stgmvp/data_model.hpp"

namespace stgmvp {

enum class Initializer { identity, scaled_scm };

struct SolverOptions {
    double tolerance = 1e-10;  // relative Frobenius fixed-point defect
    int max_iterations = 100000;
    Initializer initializer = Initializer::identity;
};

/// Throws ValidationError unless tolerance is in [1e-14, 1e-2] and max_iterations >= 1.
void validate(const SolverOptions& opts);

/// Converged shrinkage-Tyler scatter matrix with its solver diagnostics.
struct ShrinkageEstimate {
    Eigen::MatrixXd matrix;     // N x N, symmetric, spectrum bounded below by rho
    double rho = 1.0;
    int iterations = 0;         // fixed-point map evaluations performed
    double residual = 0.0;      // ||C - F(C)||_F / ||C||_F of `matrix`
    double tolerance = 0.0;     // tolerance the solve was run with
    Eigen::Index num_assets = 0;
    Eigen::Index num_samples = 0;
};

/// (1/n) sum_t x~_t x~_t^T, with centring done internally.
Eigen::MatrixXd sample_covariance(const ReturnPanel& panel);

/// Solves the regularized Tyler fixed point
///
///   C = (1 - rho) (1/n) sum_t x~_t x~_t^T / ((1/N) x~_t^T C^{-1} x~_t) + rho I
///
/// by Picard iteration. The returned matrix is the last iterate whose own
/// defect was measured, so `residual` is exactly the defect of `matrix`.
/// At rho = 1 the identity start is already the fixed point and is returned
/// unchanged.
///
/// rho must lie in (max(0, 1 - (n-1)/N), 1]. Throws DegenerateDataError for a
/// zero centred sample or a vanishing quadratic form, SolverError when
/// max_iterations is exhausted.
ShrinkageEstimate tyler_shrinkage(const ReturnPanel& panel, double rho,
                                  const SolverOptions& opts = {});

/// Same solve on already-centred samples (columns are x~_t).
ShrinkageEstimate tyler_shrinkage_centered(const Eigen::MatrixXd& centered, double rho,
                                           const SolverOptions& opts = {});

/// Per-sample normalized quadratic forms (1/N) x~_t^T C^{-1} x~_t.
Eigen::VectorXd normalized_quadratic_forms(const Eigen::MatrixXd& centered,
                                           const Eigen::MatrixXd& cov);

}  // namespace stgmvp
