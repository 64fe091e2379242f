#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stgmvp/data_model.hpp"
#include "stgmvp/estimators.hpp"
#include "stgmvp/portfolio_risk.hpp"

namespace stgmvp {

/// Sampled rho -> scaled risk estimate, with the grid minimizer.
struct RiskCurve {
    std::vector<double> rho_grid;   // increasing, inside the admissible interval
    std::vector<double> sigma_sc;   // scaled risk estimate per grid point
    std::vector<double> gamma_sc;   // scaled gamma estimate per grid point
    std::size_t star_index = 0;
    double rho_star = 1.0;
    double gamma_sc_at_star = 1.0;
    Eigen::Index num_assets = 0;
    Eigen::Index num_samples = 0;
    double eps = 0.0;
};

/// One evaluated grid point: the estimate and both scaled estimators.
struct GridPoint {
    double rho = 1.0;
    ShrinkageEstimate estimate;
    double gamma_sc = 1.0;
    double sigma_sc = 0.0;
};

struct ScaledRisk {
    double gamma_sc;
    double sigma_sc;
};

/// Scaled estimate of the Tyler normalization constant:
///
///   1 / (1 - (1-rho) c_N) * (1/n) sum_t x~_t^T C^{-1} x~_t / ||x~_t||^2,
///
/// with c_N = N / (n - 1): the centred samples carry n - 1 degrees of freedom,
/// which puts the pole of 1 / (1 - (1-rho) c_N) on the edge of the rho range.
double gamma_hat_sc(const ReturnPanel& panel, const ShrinkageEstimate& est);

/// Consistent estimate of realized risk divided by the mean population
/// eigenvalue. Evaluated in the form where both (1 - rho) factors cancel:
///
///   gamma_sc / (1 - (1-rho) c_N) * u^T M u / (1^T u)^2,
///   u = C^{-1} 1,  M = (1/n) sum_t x~_t x~_t^T / ((1/N) x~_t^T C^{-1} x~_t),
///
/// which stays finite at rho = 1.
double scaled_risk_estimate(const ReturnPanel& panel, const ShrinkageEstimate& est);

/// Both estimators from centred samples, sharing one factorization.
ScaledRisk scaled_risk_centered(const Eigen::MatrixXd& centered, const ShrinkageEstimate& est);

/// `size` evenly spaced points from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, int size);

/// Solves the fixed point at every rho of `grid` from the identity start and
/// evaluates the scaled estimators. Grid points are independent and may be
/// spread over `threads` workers; output order follows `grid`.
std::vector<GridPoint> evaluate_grid(const ReturnPanel& panel, const std::vector<double>& grid,
                                     const SolverOptions& opts = {}, unsigned threads = 1);

/// Grid search of the scaled risk estimate over [eps + max(0, 1 - (n-1)/N), 1].
/// Ties resolve to the smallest rho.
RiskCurve optimize_rho(const ReturnPanel& panel, int grid_size = 50, double eps = 0.01,
                       const SolverOptions& opts = {}, unsigned threads = 1);

/// Index of the first minimum.
std::size_t argmin_first(const std::vector<double>& values);

struct OptimizedPortfolio {
    RiskCurve curve;
    ShrinkageEstimate estimate;
    Portfolio portfolio;
};

/// Fixed point at a given rho and its GMVP weights (steps two and three of the
/// calibrated construction, with rho supplied by the caller).
OptimizedPortfolio portfolio_at_rho(const ReturnPanel& panel, double rho,
                                    const SolverOptions& opts = {});

/// Grid search, re-solve at the selected rho, and GMVP weights from that estimate.
OptimizedPortfolio build_optimized_portfolio(const ReturnPanel& panel, int grid_size = 50,
                                             double eps = 0.01, const SolverOptions& opts = {},
                                             unsigned threads = 1);

}  // namespace stgmvp
