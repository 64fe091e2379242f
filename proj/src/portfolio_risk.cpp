#include "stgmvp/portfolio_risk.hpp"

#include "stgmvp/errors.hpp"
#include "stgmvp/spd.hpp"

namespace stgmvp {

Portfolio gmvp_weights(const Eigen::MatrixXd& cov, std::vector<std::string> asset_ids) {
    const auto llt = factor_spd(cov, "gmvp_weights");
    const Eigen::VectorXd v = llt.solve(Eigen::VectorXd::Ones(cov.rows()));
    const double denom = v.sum();
    if (!(denom > 0.0)) throw NumericError("gmvp_weights: 1^T C^{-1} 1 is not positive");
    if (!asset_ids.empty() && static_cast<Eigen::Index>(asset_ids.size()) != cov.rows())
        throw ValidationError("gmvp_weights: asset_ids length does not match covariance");
    return {v / denom, std::move(asset_ids)};
}

Portfolio uniform_portfolio(Eigen::Index num_assets, std::vector<std::string> asset_ids) {
    if (num_assets < 1) throw ValidationError("uniform_portfolio: need at least one asset");
    return {Eigen::VectorXd::Constant(num_assets, 1.0 / static_cast<double>(num_assets)),
            std::move(asset_ids)};
}

double theoretical_risk(const Eigen::MatrixXd& cov) {
    const auto llt = factor_spd(cov, "theoretical_risk");
    const double denom = llt.solve(Eigen::VectorXd::Ones(cov.rows())).sum();
    if (!(denom > 0.0)) throw NumericError("theoretical_risk: 1^T C^{-1} 1 is not positive");
    return 1.0 / denom;
}

double realized_risk(const Portfolio& h, const Eigen::MatrixXd& cov_true) {
    if (cov_true.rows() != cov_true.cols() || h.weights.size() != cov_true.rows())
        throw ValidationError("realized_risk: dimension mismatch");
    return h.weights.dot(cov_true * h.weights);
}

}  // namespace stgmvp
