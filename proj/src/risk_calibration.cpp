#include "stgmvp/risk_calibration.hpp"

#include <cmath>
#include <string>

#include "stgmvp/errors.hpp"
#include "stgmvp/parallel.hpp"
#include "stgmvp/spd.hpp"

namespace stgmvp {

namespace {

void check_match(const Eigen::MatrixXd& x, const ShrinkageEstimate& est, const char* context) {
    if (est.matrix.rows() != x.rows() || est.num_assets != x.rows() || est.num_samples != x.cols())
        throw ValidationError(std::string(context) + ": estimate does not belong to this panel");
}

}  // namespace

ScaledRisk scaled_risk_centered(const Eigen::MatrixXd& x, const ShrinkageEstimate& est) {
    check_match(x, est, "scaled_risk");
    const double dim = static_cast<double>(x.rows());
    const double count = static_cast<double>(x.cols());
    const double rho = est.rho;
    const double c_n = dim / (count - 1.0);  // centring costs one sample
    const double shrink = 1.0 - (1.0 - rho) * c_n;
    if (!(shrink > 0.0))
        throw ValidationError("scaled_risk: rho=" + std::to_string(rho) +
                              " leaves 1 - (1-rho) N/n non-positive");

    const auto llt = factor_spd(est.matrix, "scaled_risk");
    const Eigen::VectorXd norms2 = x.colwise().squaredNorm().transpose();
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        if (!(norms2(t) > 0.0))
            throw DegenerateDataError("scaled_risk: centred sample " + std::to_string(t) +
                                      " is the zero vector");
    }
    const Eigen::MatrixXd whitened = llt.matrixL().solve(x);
    const Eigen::VectorXd quad = whitened.colwise().squaredNorm().transpose();  // x^T C^{-1} x

    const double gamma_sc = (quad.array() / norms2.array()).mean() / shrink;

    const Eigen::VectorXd u = llt.solve(Eigen::VectorXd::Ones(x.rows()));
    const Eigen::ArrayXd proj = (x.transpose() * u).array();
    const double u_m_u = (proj.square() / (quad.array() / dim)).mean();
    const double ones_u = u.sum();
    return {gamma_sc, gamma_sc / shrink * u_m_u / (ones_u * ones_u)};
}

double gamma_hat_sc(const ReturnPanel& panel, const ShrinkageEstimate& est) {
    validate(panel);
    return scaled_risk_centered(centered_samples(panel), est).gamma_sc;
}

double scaled_risk_estimate(const ReturnPanel& panel, const ShrinkageEstimate& est) {
    validate(panel);
    return scaled_risk_centered(centered_samples(panel), est).sigma_sc;
}

std::vector<double> uniform_grid(double lo, double hi, int size) {
    if (size < 2) throw ValidationError("grid size must be >= 2");
    if (!(lo < hi)) throw ValidationError("grid bounds must satisfy lo < hi");
    std::vector<double> grid(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k)
        grid[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (size - 1);
    grid.back() = hi;
    return grid;
}

std::vector<GridPoint> evaluate_grid(const ReturnPanel& panel, const std::vector<double>& grid,
                                     const SolverOptions& opts, unsigned threads) {
    validate(panel);
    validate(opts);
    const Eigen::MatrixXd x = centered_samples(panel);
    SolverOptions from_identity = opts;
    from_identity.initializer = Initializer::identity;

    std::vector<GridPoint> points(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t k) {
        const double rho = grid[k];
        try {
            GridPoint& p = points[k];
            p.rho = rho;
            p.estimate = tyler_shrinkage_centered(x, rho, from_identity);
            const auto risk = scaled_risk_centered(x, p.estimate);
            p.gamma_sc = risk.gamma_sc;
            p.sigma_sc = risk.sigma_sc;
        } catch (...) {
            rethrow_with_context("at rho=" + std::to_string(rho) + ": ");
        }
    });
    return points;
}

std::size_t argmin_first(const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("argmin of an empty sequence");
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] < values[best]) best = k;
    }
    return best;
}

namespace {

RiskCurve curve_from_points(const std::vector<GridPoint>& points, const ReturnPanel& panel,
                            double eps) {
    RiskCurve curve;
    curve.num_assets = panel.num_assets();
    curve.num_samples = panel.num_samples();
    curve.eps = eps;
    for (const auto& p : points) {
        curve.rho_grid.push_back(p.rho);
        curve.sigma_sc.push_back(p.sigma_sc);
        curve.gamma_sc.push_back(p.gamma_sc);
    }
    curve.star_index = argmin_first(curve.sigma_sc);
    curve.rho_star = curve.rho_grid[curve.star_index];
    curve.gamma_sc_at_star = curve.gamma_sc[curve.star_index];
    return curve;
}

}  // namespace

RiskCurve optimize_rho(const ReturnPanel& panel, int grid_size, double eps,
                       const SolverOptions& opts, unsigned threads) {
    const auto range = admissible_rho_range(panel.num_assets(), panel.num_samples(), eps);
    const auto grid = uniform_grid(range.lo, range.hi, grid_size);
    return curve_from_points(evaluate_grid(panel, grid, opts, threads), panel, eps);
}

OptimizedPortfolio portfolio_at_rho(const ReturnPanel& panel, double rho, const SolverOptions& opts) {
    OptimizedPortfolio out;
    out.estimate = tyler_shrinkage(panel, rho, opts);
    out.portfolio = gmvp_weights(out.estimate.matrix, panel.asset_ids);
    const auto risk = scaled_risk_centered(centered_samples(panel), out.estimate);
    out.curve.rho_grid = {rho};
    out.curve.sigma_sc = {risk.sigma_sc};
    out.curve.gamma_sc = {risk.gamma_sc};
    out.curve.rho_star = rho;
    out.curve.gamma_sc_at_star = risk.gamma_sc;
    out.curve.num_assets = panel.num_assets();
    out.curve.num_samples = panel.num_samples();
    return out;
}

OptimizedPortfolio build_optimized_portfolio(const ReturnPanel& panel, int grid_size, double eps,
                                             const SolverOptions& opts, unsigned threads) {
    const auto range = admissible_rho_range(panel.num_assets(), panel.num_samples(), eps);
    const auto grid = uniform_grid(range.lo, range.hi, grid_size);
    auto points = evaluate_grid(panel, grid, opts, threads);

    OptimizedPortfolio out;
    out.curve = curve_from_points(points, panel, eps);
    // The grid solve at rho* used the same inputs and identity start, so it is
    // the re-solved estimate.
    out.estimate = std::move(points[out.curve.star_index].estimate);
    out.portfolio = gmvp_weights(out.estimate.matrix, panel.asset_ids);
    return out;
}

}  // namespace stgmvp
