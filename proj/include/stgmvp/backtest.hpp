#pragma once

#include <span>
#include <string>
#include <vector>

#include "stgmvp/data_model.hpp"
#include "stgmvp/estimators.hpp"

namespace stgmvp {

enum class EstimatorKind {
    st_optimized,  // calibrated shrinkage-Tyler (grid search on the scaled risk estimate)
    st_fixed,      // shrinkage-Tyler at a caller-chosen rho
    scm,           // sample covariance plug-in
    identity,      // uniform 1/N weights
};

struct EstimatorChoice {
    EstimatorKind kind = EstimatorKind::st_optimized;
    int grid_size = 50;
    double eps = 0.01;
    double rho = 1.0;  // st_fixed only
    SolverOptions solver;

    /// "st_optimized", "scm", "identity", or "st_fixed(0.25)".
    std::string name() const;
    /// Inverse of name(); throws ValidationError on unknown names.
    static EstimatorChoice parse(const std::string& name);
};

struct BacktestConfig {
    Eigen::Index window = 300;  // training length n
    Eigen::Index hold = 10;     // rebalance stride in periods
    EstimatorChoice estimator;
    int annualization_days = 252;
    unsigned threads = 1;
};

void validate(const BacktestConfig& cfg, Eigen::Index panel_length);

struct BacktestResult {
    std::vector<double> oos_returns;       // one per period after the first window
    std::vector<std::string> oos_dates;
    double realized_risk_annualized = 0.0;
    std::vector<Eigen::Index> rebalance_index;  // period index t of each rebalance
    std::vector<double> per_window_rhos;   // rho used per rebalance (NaN for scm / identity)
    BacktestConfig config;
};

/// Rolling-window out-of-sample evaluation. At t = window, window + hold, ...
/// the covariance is estimated from periods [t - window, t - 1], GMVP weights
/// are formed, and held fixed for the next min(hold, remaining) periods. The
/// final partial block is kept, so the series has length L - window.
BacktestResult rolling_backtest(const ReturnPanel& panel, const BacktestConfig& cfg);

/// Sample standard deviation (divisor m - 1) times sqrt(annualization_days).
double annualized_risk(std::span<const double> returns, int annualization_days = 252);

/// annualized_risk over every length-`window` slice with a one-period step.
std::vector<double> rolling_risk_series(std::span<const double> returns, std::size_t window,
                                        int annualization_days = 252);

}  // namespace stgmvp
