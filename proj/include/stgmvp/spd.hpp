#pragma once

#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "stgmvp/errors.hpp"

namespace stgmvp {

/// Cholesky factor of a symmetric positive-definite matrix. Never falls back
/// to a pseudo-inverse: a failed factorization is a NumericError.
inline Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& a, const std::string& context) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw ValidationError(context + ": matrix must be square and non-empty");
    if (!a.allFinite()) throw NumericError(context + ": matrix has non-finite entries");
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw NumericError(context + ": matrix is not symmetric positive definite");
    const auto diag = llt.matrixLLT().diagonal();
    if (!(diag.minCoeff() > 0.0) || !diag.allFinite())
        throw NumericError(context + ": matrix is not symmetric positive definite");
    return llt;
}

}  // namespace stgmvp
