#include "stgmvp/backtest.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "stgmvp/errors.hpp"
#include "stgmvp/parallel.hpp"
#include "stgmvp/portfolio_risk.hpp"
#include "stgmvp/risk_calibration.hpp"

namespace stgmvp {

std::string EstimatorChoice::name() const {
    switch (kind) {
        case EstimatorKind::st_optimized:
            return "st_optimized";
        case EstimatorKind::scm:
            return "scm";
        case EstimatorKind::identity:
            return "identity";
        case EstimatorKind::st_fixed: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "st_fixed(%g)", rho);
            return buf;
        }
    }
    return "unknown";
}

EstimatorChoice EstimatorChoice::parse(const std::string& name) {
    EstimatorChoice choice;
    if (name == "st_optimized") {
        choice.kind = EstimatorKind::st_optimized;
    } else if (name == "scm") {
        choice.kind = EstimatorKind::scm;
    } else if (name == "identity") {
        choice.kind = EstimatorKind::identity;
    } else if (name.rfind("st_fixed(", 0) == 0 && name.back() == ')') {
        choice.kind = EstimatorKind::st_fixed;
        const std::string inner = name.substr(9, name.size() - 10);
        try {
            std::size_t used = 0;
            choice.rho = std::stod(inner, &used);
            if (used != inner.size()) throw std::invalid_argument(inner);
        } catch (const std::exception&) {
            throw ValidationError("estimator '" + name + "': cannot parse rho");
        }
    } else {
        throw ValidationError("unknown estimator '" + name +
                              "' (expected st_optimized, st_fixed(<rho>), scm, identity)");
    }
    return choice;
}

void validate(const BacktestConfig& cfg, Eigen::Index panel_length) {
    if (cfg.window < 2) throw ValidationError("backtest: window must be >= 2");
    if (cfg.hold < 1) throw ValidationError("backtest: hold must be >= 1");
    if (cfg.window + 1 > panel_length)
        throw ValidationError("backtest: window " + std::to_string(cfg.window) +
                              " leaves no out-of-sample period in a panel of length " +
                              std::to_string(panel_length));
    if (cfg.annualization_days < 1) throw ValidationError("backtest: annualization_days must be >= 1");
    if (cfg.estimator.kind == EstimatorKind::st_optimized && cfg.estimator.grid_size < 2)
        throw ValidationError("backtest: grid_size must be >= 2");
    validate(cfg.estimator.solver);
}

namespace {

ReturnPanel training_slice(const ReturnPanel& panel, Eigen::Index start, Eigen::Index length) {
    ReturnPanel slice;
    slice.returns = panel.returns.middleCols(start, length);
    slice.asset_ids = panel.asset_ids;
    slice.dates.assign(panel.dates.begin() + start, panel.dates.begin() + start + length);
    slice.demeaned = false;
    return slice;
}

struct WindowFit {
    Eigen::VectorXd weights;
    double rho = std::numeric_limits<double>::quiet_NaN();
};

WindowFit fit_window(const ReturnPanel& train, const EstimatorChoice& est) {
    for (Eigen::Index i = 0; i < train.num_assets(); ++i) {
        const auto row = train.returns.row(i);
        if (row.maxCoeff() == row.minCoeff())
            throw DegenerateDataError("asset " + train.asset_ids[static_cast<std::size_t>(i)] +
                                      " has zero variance");
    }
    WindowFit fit;
    switch (est.kind) {
        case EstimatorKind::identity:
            fit.weights = uniform_portfolio(train.num_assets()).weights;
            break;
        case EstimatorKind::scm:
            fit.weights = gmvp_weights(sample_covariance(train)).weights;
            break;
        case EstimatorKind::st_fixed: {
            const auto out = portfolio_at_rho(train, est.rho, est.solver);
            fit.weights = out.portfolio.weights;
            fit.rho = est.rho;
            break;
        }
        case EstimatorKind::st_optimized: {
            const auto out = build_optimized_portfolio(train, est.grid_size, est.eps, est.solver);
            fit.weights = out.portfolio.weights;
            fit.rho = out.curve.rho_star;
            break;
        }
    }
    return fit;
}

}  // namespace

BacktestResult rolling_backtest(const ReturnPanel& panel, const BacktestConfig& cfg) {
    validate(panel);
    if (panel.demeaned) throw UsageError("rolling_backtest: expects raw (not demeaned) returns");
    const Eigen::Index length = panel.num_samples();
    validate(cfg, length);

    std::vector<Eigen::Index> starts;
    for (Eigen::Index t = cfg.window; t < length; t += cfg.hold) starts.push_back(t);

    std::vector<WindowFit> fits(starts.size());
    parallel_for(starts.size(), cfg.threads, [&](std::size_t k) {
        const Eigen::Index t = starts[k];
        try {
            fits[k] = fit_window(training_slice(panel, t - cfg.window, cfg.window), cfg.estimator);
        } catch (...) {
            rethrow_with_context("backtest window " + std::to_string(k) + " (training " +
                                 panel.dates[static_cast<std::size_t>(t - cfg.window)] + " .. " +
                                 panel.dates[static_cast<std::size_t>(t - 1)] + ", estimator " +
                                 cfg.estimator.name() + "): ");
        }
    });

    BacktestResult result;
    result.config = cfg;
    result.rebalance_index = starts;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const Eigen::Index t = starts[k];
        const Eigen::Index days = std::min(cfg.hold, length - t);
        for (Eigen::Index d = t; d < t + days; ++d) {
            result.oos_returns.push_back(fits[k].weights.dot(panel.returns.col(d)));
            result.oos_dates.push_back(panel.dates[static_cast<std::size_t>(d)]);
        }
        result.per_window_rhos.push_back(fits[k].rho);
    }
    result.realized_risk_annualized = annualized_risk(result.oos_returns, cfg.annualization_days);
    return result;
}

double annualized_risk(std::span<const double> returns, int annualization_days) {
    if (returns.size() < 2) throw ValidationError("annualized_risk: need at least 2 returns");
    if (annualization_days < 1) throw ValidationError("annualized_risk: annualization_days must be >= 1");
    // Shift by the first value so a constant series gives exactly zero.
    const double shift = returns.front();
    double mean = 0.0;
    for (double r : returns) mean += r - shift;
    mean /= static_cast<double>(returns.size());
    double ss = 0.0;
    for (double r : returns) ss += (r - shift - mean) * (r - shift - mean);
    const double var = ss / static_cast<double>(returns.size() - 1);
    return std::sqrt(var * static_cast<double>(annualization_days));
}

std::vector<double> rolling_risk_series(std::span<const double> returns, std::size_t window,
                                        int annualization_days) {
    if (window > returns.size())
        throw ValidationError("rolling_risk_series: window " + std::to_string(window) +
                              " exceeds series length " + std::to_string(returns.size()));
    if (window < 2) throw ValidationError("rolling_risk_series: window must be >= 2");
    std::vector<double> out;
    out.reserve(returns.size() - window + 1);
    for (std::size_t s = 0; s + window <= returns.size(); ++s)
        out.push_back(annualized_risk(returns.subspan(s, window), annualization_days));
    return out;
}

}  // namespace stgmvp
