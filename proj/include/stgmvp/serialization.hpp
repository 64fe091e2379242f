#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stgmvp/backtest.hpp"
#include "stgmvp/inference.hpp"
#include "stgmvp/risk_calibration.hpp"

namespace stgmvp {

using Json = nlohmann::ordered_json;

Json to_json(const SolverOptions& opts);
SolverOptions solver_options_from_json(const Json& j);

Json to_json(const RiskCurve& curve);
/// `rho,sigma_sc` rows.
std::string risk_curve_csv(const RiskCurve& curve);

/// Full record; NaN rhos (scm / identity windows) become null.
Json to_json(const BacktestResult& result);

Json to_json(const BootstrapTest& test);

/// Shortest round-trip text for a double.
std::string format_double(double v);

/// Reads one numeric column from a CSV with a header row. Lines starting
/// with '#' are skipped. Uses the column named `column` when present, else
/// the last column. Throws ParseError naming the file, row, and column.
std::vector<double> read_series_csv(const std::filesystem::path& path,
                                    const std::string& column = "return");

}  // namespace stgmvp
