#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stgmvp {

/// Fully invested weight vector; short positions allowed.
struct Portfolio {
    Eigen::VectorXd weights;
    std::vector<std::string> asset_ids;
};

/// C^{-1} 1 / (1^T C^{-1} 1). Throws NumericError if `cov` is not SPD.
Portfolio gmvp_weights(const Eigen::MatrixXd& cov, std::vector<std::string> asset_ids = {});

/// 1 / N weights.
Portfolio uniform_portfolio(Eigen::Index num_assets, std::vector<std::string> asset_ids = {});

/// Minimum attainable variance 1 / (1^T C^{-1} 1).
double theoretical_risk(const Eigen::MatrixXd& cov);

/// Out-of-sample variance h^T C_true h.
double realized_risk(const Portfolio& h, const Eigen::MatrixXd& cov_true);

}  // namespace stgmvp
