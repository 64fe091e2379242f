#include "stgmvp/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stgmvp/errors.hpp"

namespace stgmvp {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json to_json(const SolverOptions& opts) {
    return Json{{"tolerance", opts.tolerance},
                {"max_iterations", opts.max_iterations},
                {"initializer", opts.initializer == Initializer::identity ? "identity" : "scaled_scm"}};
}

SolverOptions solver_options_from_json(const Json& j) {
    SolverOptions opts;
    if (j.is_null()) return opts;
    opts.tolerance = j.value("tolerance", opts.tolerance);
    opts.max_iterations = j.value("max_iterations", opts.max_iterations);
    const std::string init = j.value("initializer", std::string("identity"));
    if (init == "identity") {
        opts.initializer = Initializer::identity;
    } else if (init == "scaled_scm") {
        opts.initializer = Initializer::scaled_scm;
    } else {
        throw ValidationError("solver.initializer must be identity or scaled_scm, got " + init);
    }
    validate(opts);
    return opts;
}

Json to_json(const RiskCurve& curve) {
    return Json{{"num_assets", curve.num_assets},
                {"num_samples", curve.num_samples},
                {"eps", curve.eps},
                {"rho_star", curve.rho_star},
                {"gamma_sc_at_star", curve.gamma_sc_at_star},
                {"rho", curve.rho_grid},
                {"sigma_sc", curve.sigma_sc},
                {"gamma_sc", curve.gamma_sc}};
}

std::string risk_curve_csv(const RiskCurve& curve) {
    std::ostringstream out;
    out << "rho,sigma_sc\n";
    for (std::size_t k = 0; k < curve.rho_grid.size(); ++k)
        out << format_double(curve.rho_grid[k]) << ',' << format_double(curve.sigma_sc[k]) << '\n';
    return out.str();
}

Json to_json(const BacktestResult& result) {
    Json rhos = Json::array();
    for (double r : result.per_window_rhos) {
        if (std::isnan(r)) {
            rhos.push_back(nullptr);
        } else {
            rhos.push_back(r);
        }
    }
    const auto& cfg = result.config;
    Json config{{"window", cfg.window},
                {"hold", cfg.hold},
                {"estimator", cfg.estimator.name()},
                {"annualization_days", cfg.annualization_days}};
    if (cfg.estimator.kind == EstimatorKind::st_optimized) {
        config["grid_size"] = cfg.estimator.grid_size;
        config["epsilon"] = cfg.estimator.eps;
    }
    if (cfg.estimator.kind == EstimatorKind::st_optimized ||
        cfg.estimator.kind == EstimatorKind::st_fixed)
        config["solver"] = to_json(cfg.estimator.solver);
    return Json{{"config", config},
                {"realized_risk_annualized", result.realized_risk_annualized},
                {"num_oos_returns", result.oos_returns.size()},
                {"rebalance_index", result.rebalance_index},
                {"per_window_rhos", rhos},
                {"oos_dates", result.oos_dates},
                {"oos_returns", result.oos_returns}};
}

Json to_json(const BootstrapTest& test) {
    return Json{{"statistic", test.statistic},
                {"std_error", test.std_error},
                {"p_value", test.p_value},
                {"block_length", test.block_length},
                {"iterations", test.iterations},
                {"seed", test.seed},
                {"length", test.length}};
}

std::vector<double> read_series_csv(const std::filesystem::path& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open series file: " + path.string());
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        for (std::string f; std::getline(fields, f, ',');) header.push_back(f);
        break;
    }
    if (header.empty()) throw ParseError(path.string() + ": no header row");
    std::size_t col = header.size() - 1;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == column) col = k;
    }

    std::vector<double> values;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (fields.size() != header.size())
            throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        const std::string& cell = fields[col];
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
            throw ParseError(path.string() + ": row " + std::to_string(row) + ", column " +
                             std::to_string(col + 1) + " (" + header[col] + "): not a number: '" +
                             cell + "'");
        values.push_back(v);
    }
    return values;
}

}  // namespace stgmvp
