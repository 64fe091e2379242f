#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stgmvp/serialization.hpp"

namespace stgmvp {

/// Where and how a command runs. Relative input paths in a spec resolve
/// against `base_dir` (the directory holding the spec file).
struct RunContext {
    std::filesystem::path out_dir;
    std::filesystem::path base_dir;
    std::optional<std::uint64_t> seed_override;
    unsigned threads = 1;
};

struct RunOutputs {
    std::vector<std::filesystem::path> files;
    Json resolved_spec;
    Json summary;
};

/// Monte-Carlo sweep over n on synthetic elliptical data. Writes
/// risk_vs_n.csv (n, estimator, mean_realized_risk), rho_vs_n.csv
/// (n, mean_rho_star), and simulate_report.json.
RunOutputs run_simulate(const Json& spec, const RunContext& ctx);

/// Calibrated portfolio on a price CSV. Writes risk_curve.csv, risk_curve.json,
/// weights.csv, and calibrate_report.json.
RunOutputs run_calibrate(const Json& spec, const RunContext& ctx);

/// Rolling-window backtest of several estimators on a price CSV, with
/// bootstrap p-values against a reference estimator. Writes table.csv,
/// table_report.json, oos_returns.csv, oos_<estimator>.csv, rolling_risk.csv,
/// rhos.csv, and (for a window sweep) risk_vs_window.csv.
RunOutputs run_backtest(const Json& spec, const RunContext& ctx);

/// Variance-difference bootstrap test between two return-series CSVs. Writes
/// boottest.json and one boottest_b<b>.json per block length.
RunOutputs run_boottest(const Json& spec, const RunContext& ctx);

/// Dispatches on "simulate", "calibrate", "backtest", "boottest". On any error
/// every file written by the run is removed before the exception propagates.
RunOutputs run_command(const std::string& command, const Json& spec, const RunContext& ctx);

}  // namespace stgmvp
