#include "stgmvp/experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stgmvp/deterministic_equivalent.hpp"
#include "stgmvp/errors.hpp"
#include "stgmvp/parallel.hpp"
#include "stgmvp/portfolio_risk.hpp"
#include "stgmvp/synthetic.hpp"

namespace stgmvp {

namespace {

namespace fs = std::filesystem;

// Tracks every file a run writes; removes them unless the run commits.
class OutputSink {
public:
    explicit OutputSink(fs::path dir) : dir_(std::move(dir)) {
        if (dir_.empty()) throw ValidationError("no output directory given");
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
    OutputSink(const OutputSink&) = delete;
    OutputSink& operator=(const OutputSink&) = delete;
    ~OutputSink() {
        if (committed_) return;
        for (const auto& f : files_) {
            std::error_code ec;
            fs::remove(f, ec);
        }
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path path = dir_ / name;
        files_.push_back(path);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
        if (!out) throw Error("failed writing " + path.string());
    }

    void track(const std::string& name) { files_.push_back(dir_ / name); }

    void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

    std::vector<fs::path> commit() {
        committed_ = true;
        return files_;
    }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
    bool committed_ = false;
};

std::string spec_comment(const Json& resolved) { return "# spec: " + resolved.dump() + "\n"; }

fs::path resolve_input(const Json& spec, const char* key, const RunContext& ctx) {
    if (!spec.contains(key) || !spec[key].is_string())
        throw ValidationError(std::string("spec field '") + key + "' (input path) is required");
    fs::path p = spec[key].get<std::string>();
    if (p.is_relative() && !ctx.base_dir.empty()) p = (ctx.base_dir / p).lexically_normal();
    if (!fs::exists(p)) throw ValidationError("input file not found: " + p.string());
    return p;
}

std::uint64_t resolve_seed(const Json& spec, const RunContext& ctx, const char* key = "seed") {
    if (ctx.seed_override) return *ctx.seed_override;
    return spec.value(key, std::uint64_t{0});
}

template <typename T>
T require(const Json& spec, const char* key) {
    if (!spec.contains(key)) throw ValidationError(std::string("spec field '") + key + "' is required");
    try {
        return spec[key].get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("spec field '") + key + "': " + e.what());
    }
}

TauLaw tau_law_from_json(const Json& j) {
    const std::string kind = j.value("kind", std::string("student_t"));
    if (kind == "constant") return TauLaw::constant();
    if (kind == "student_t") {
        const int dof = j.value("dof", 3);
        if (dof < 3) throw ValidationError("tau_law.dof must be >= 3");
        return TauLaw::student_t(dof);
    }
    throw ValidationError("tau_law.kind must be constant or student_t, got " + kind);
}

Json tau_law_json(const TauLaw& law) {
    if (law.kind == TauLaw::Kind::constant) return Json{{"kind", "constant"}};
    return Json{{"kind", "student_t"}, {"dof", law.dof}};
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate

RunOutputs run_simulate(const Json& spec, const RunContext& ctx) {
    const auto num_assets = require<Eigen::Index>(spec, "N");
    const auto n_values = require<std::vector<Eigen::Index>>(spec, "n_values");
    if (num_assets < 2) throw ValidationError("N must be >= 2");
    if (n_values.empty()) throw ValidationError("n_values must not be empty");
    for (auto n : n_values)
        if (n < 2) throw ValidationError("every n in n_values must be >= 2");

    const TauLaw law = tau_law_from_json(spec.value("tau_law", Json::object()));
    const Json cov_spec = spec.value("covariance", Json::object());
    const std::string model = cov_spec.value("model", std::string("one_factor"));
    if (model != "one_factor") throw ValidationError("covariance.model must be one_factor");
    const double sigma = cov_spec.value("sigma", 0.16);
    const double b_lo = cov_spec.value("b_lo", 0.5);
    const double b_hi = cov_spec.value("b_hi", 1.5);
    const double sigma_r = cov_spec.value("sigma_r", 0.2);
    const int reps = spec.value("repetitions", 100);
    if (reps < 1) throw ValidationError("repetitions must be >= 1");
    const int grid_size = spec.value("grid_size", 50);
    const double eps = spec.value("epsilon", 0.01);
    const SolverOptions solver = solver_options_from_json(spec.value("solver", Json()));
    const std::uint64_t seed = resolve_seed(spec, ctx);

    Json resolved{{"command", "simulate"},
                  {"N", num_assets},
                  {"n_values", n_values},
                  {"tau_law", tau_law_json(law)},
                  {"covariance",
                   {{"model", "one_factor"}, {"sigma", sigma}, {"b_lo", b_lo}, {"b_hi", b_hi}, {"sigma_r", sigma_r}}},
                  {"repetitions", reps},
                  {"grid_size", grid_size},
                  {"epsilon", eps},
                  {"solver", to_json(solver)},
                  {"seed", seed},
                  {"rng", rng_description()}};
    for (auto n : n_values) admissible_rho_range(num_assets, n, eps);

    const Eigen::MatrixXd cov = one_factor_covariance(num_assets, sigma, b_lo, b_hi, sigma_r);
    const double bound = theoretical_risk(cov);
    const double identity_risk = realized_risk(uniform_portfolio(num_assets), cov);

    OutputSink sink(ctx.out_dir);

    if (spec.contains("export_panel")) {
        const Json ex = spec["export_panel"];
        const auto length = require<Eigen::Index>(ex, "n");
        const std::string file = ex.value("file", std::string("synthetic_prices.csv"));
        const std::uint64_t ex_seed = derive_seed(seed, {0xE0u});
        resolved["export_panel"] = {{"n", length}, {"file", file}, {"seed", ex_seed}};
        EllipticalSpec es{Eigen::VectorXd(), cov, law, length, ex_seed};
        const auto prices = to_price_panel(sample_elliptical(es, ctx.threads));
        sink.track(file);
        write_price_csv(prices, ctx.out_dir / file);
    }

    std::ostringstream risk_csv, rho_csv;
    risk_csv << spec_comment(resolved) << "n,estimator,mean_realized_risk\n";
    rho_csv << spec_comment(resolved) << "n,mean_rho_star\n";
    Json per_n = Json::array();

    for (const auto n : n_values) {
        const double c = static_cast<double>(num_assets) / static_cast<double>(n);
        const auto range = admissible_rho_range(num_assets, n, eps);
        const auto grid = uniform_grid(range.lo, range.hi, grid_size);
        double de_min = std::numeric_limits<double>::infinity();
        for (double rho : grid) de_min = std::min(de_min, risk_deterministic_equivalent(cov, rho, c));

        std::vector<double> st_risk(static_cast<std::size_t>(reps));
        std::vector<double> scm_risk(static_cast<std::size_t>(reps));
        std::vector<double> rho_star(static_cast<std::size_t>(reps));
        const bool scm_defined = n > num_assets;
        parallel_for(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t r) {
            try {
                EllipticalSpec es{Eigen::VectorXd(), cov, law, n,
                                  derive_seed(seed, {static_cast<std::uint64_t>(n), r})};
                const auto panel = sample_elliptical(es);
                const auto opt = build_optimized_portfolio(panel, grid_size, eps, solver);
                st_risk[r] = realized_risk(opt.portfolio, cov);
                rho_star[r] = opt.curve.rho_star;
                if (scm_defined) scm_risk[r] = realized_risk(gmvp_weights(sample_covariance(panel)), cov);
            } catch (...) {
                rethrow_with_context("simulate n=" + std::to_string(n) + " repetition " +
                                     std::to_string(r) + ": ");
            }
        });

        const double st_mean = mean_of(st_risk);
        risk_csv << n << ",st_optimized," << format_double(st_mean) << '\n';
        if (scm_defined) risk_csv << n << ",scm," << format_double(mean_of(scm_risk)) << '\n';
        risk_csv << n << ",identity," << format_double(identity_risk) << '\n';
        risk_csv << n << ",theoretical_bound," << format_double(bound) << '\n';
        risk_csv << n << ",deterministic_equivalent," << format_double(de_min) << '\n';
        rho_csv << n << ',' << format_double(mean_of(rho_star)) << '\n';

        Json row{{"n", n},
                 {"c", c},
                 {"st_optimized", st_mean},
                 {"identity", identity_risk},
                 {"theoretical_bound", bound},
                 {"deterministic_equivalent", de_min},
                 {"mean_rho_star", mean_of(rho_star)}};
        row["scm"] = scm_defined ? Json(mean_of(scm_risk)) : Json(nullptr);
        per_n.push_back(row);
    }

    sink.write("risk_vs_n.csv", risk_csv.str());
    sink.write("rho_vs_n.csv", rho_csv.str());
    Json report{{"spec", resolved},
                {"notes", "deterministic_equivalent is the grid minimum of the large-dimensional "
                          "risk limit evaluated with c = N/n; scm is omitted when n <= N"},
                {"results", per_n}};
    sink.write_json("simulate_report.json", report);
    return {sink.commit(), resolved, per_n};
}

// ---------------------------------------------------------------------------
// calibrate

RunOutputs run_calibrate(const Json& spec, const RunContext& ctx) {
    const fs::path prices_path = resolve_input(spec, "prices", ctx);
    const int grid_size = spec.value("grid_size", 50);
    const double eps = spec.value("epsilon", 0.01);
    const SolverOptions solver = solver_options_from_json(spec.value("solver", Json()));
    Json resolved{{"command", "calibrate"},
                  {"prices", prices_path.string()},
                  {"grid_size", grid_size},
                  {"epsilon", eps},
                  {"solver", to_json(solver)}};

    const auto panel = log_returns(load_price_csv(prices_path));
    const auto opt = build_optimized_portfolio(panel, grid_size, eps, solver, ctx.threads);

    OutputSink sink(ctx.out_dir);
    sink.write("risk_curve.csv", spec_comment(resolved) + risk_curve_csv(opt.curve));
    sink.write_json("risk_curve.json", Json{{"spec", resolved}, {"curve", to_json(opt.curve)}});

    std::ostringstream weights;
    weights << spec_comment(resolved) << "asset,weight\n";
    for (std::size_t i = 0; i < panel.asset_ids.size(); ++i)
        weights << panel.asset_ids[i] << ','
                << format_double(opt.portfolio.weights(static_cast<Eigen::Index>(i))) << '\n';
    sink.write("weights.csv", weights.str());

    Json summary{{"num_assets", panel.num_assets()},
                 {"num_samples", panel.num_samples()},
                 {"c_N", static_cast<double>(panel.num_assets()) / static_cast<double>(panel.num_samples() - 1)},
                 {"rho_star", opt.curve.rho_star},
                 {"sigma_sc_at_star", opt.curve.sigma_sc[opt.curve.star_index]},
                 {"gamma_sc_at_star", opt.curve.gamma_sc_at_star},
                 {"solver_iterations", opt.estimate.iterations},
                 {"solver_residual", opt.estimate.residual}};
    sink.write_json("calibrate_report.json", Json{{"spec", resolved}, {"result", summary}});
    return {sink.commit(), resolved, summary};
}

// ---------------------------------------------------------------------------
// backtest

RunOutputs run_backtest(const Json& spec, const RunContext& ctx) {
    const fs::path prices_path = resolve_input(spec, "prices", ctx);
    const auto window = spec.value("window", Eigen::Index{300});
    const auto hold = spec.value("hold", Eigen::Index{10});
    const auto names =
        spec.value("estimators", std::vector<std::string>{"st_optimized", "scm", "identity"});
    const std::string reference = spec.value("reference", names.empty() ? std::string() : names.front());
    const int grid_size = spec.value("grid_size", 50);
    const double eps = spec.value("epsilon", 0.01);
    const int annualization = spec.value("annualization_days", 252);
    const auto rolling_window = spec.value("rolling_window", std::size_t{70});
    const auto sweep = spec.value("window_sweep", std::vector<Eigen::Index>{});
    const SolverOptions solver = solver_options_from_json(spec.value("solver", Json()));
    const Json boot = spec.value("bootstrap", Json::object());
    const int block_length = boot.value("block_length", 5);
    const int iterations = boot.value("iterations", 2000);
    const auto extra_blocks = boot.value("extra_block_lengths", std::vector<int>{1, 10});
    const std::uint64_t seed = resolve_seed(spec, ctx);

    if (names.empty()) throw ValidationError("estimators must not be empty");
    std::vector<EstimatorChoice> choices;
    for (const auto& name : names) {
        auto c = EstimatorChoice::parse(name);
        c.grid_size = grid_size;
        c.eps = eps;
        c.solver = solver;
        choices.push_back(c);
    }
    std::size_t ref_index = names.size();
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == reference) ref_index = k;
    if (ref_index == names.size())
        throw ValidationError("reference estimator '" + reference + "' is not in estimators");

    Json resolved{{"command", "backtest"},
                  {"prices", prices_path.string()},
                  {"window", window},
                  {"hold", hold},
                  {"estimators", names},
                  {"reference", reference},
                  {"grid_size", grid_size},
                  {"epsilon", eps},
                  {"annualization_days", annualization},
                  {"rolling_window", rolling_window},
                  {"window_sweep", sweep},
                  {"solver", to_json(solver)},
                  {"bootstrap",
                   {{"block_length", block_length},
                    {"iterations", iterations},
                    {"extra_block_lengths", extra_blocks}}},
                  {"seed", seed}};

    const auto panel = log_returns(load_price_csv(prices_path));

    auto run_one = [&](const EstimatorChoice& choice, Eigen::Index w) {
        BacktestConfig cfg;
        cfg.window = w;
        cfg.hold = hold;
        cfg.estimator = choice;
        cfg.annualization_days = annualization;
        cfg.threads = ctx.threads;
        return rolling_backtest(panel, cfg);
    };

    std::vector<BacktestResult> results;
    for (const auto& c : choices) results.push_back(run_one(c, window));
    const auto& ref = results[ref_index];
    const std::size_t m = ref.oos_returns.size();

    std::vector<std::vector<double>> rolling;
    for (const auto& r : results)
        rolling.push_back(rolling_risk_series(r.oos_returns, rolling_window, annualization));

    OutputSink sink(ctx.out_dir);
    const std::string header = spec_comment(resolved);

    // Table-I shape: risk per estimator with p-values against the reference.
    std::ostringstream table;
    table << header << "estimator,annualized_risk,p_value,significance\n";
    Json rows = Json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
        Json row{{"estimator", names[k]}, {"annualized_risk", results[k].realized_risk_annualized}};
        std::string p_text, stars;
        if (k != ref_index) {
            const auto test = variance_difference_test(ref.oos_returns, results[k].oos_returns,
                                                       block_length, iterations, seed, ctx.threads);
            Json robustness = Json::object();
            for (int b : extra_blocks) {
                const auto extra = variance_difference_test(ref.oos_returns, results[k].oos_returns,
                                                             b, iterations, seed, ctx.threads);
                robustness["b=" + std::to_string(b)] = extra.p_value;
            }
            const bool ref_better = ref.realized_risk_annualized < results[k].realized_risk_annualized;
            if (ref_better && test.p_value < 0.01) {
                stars = "**";
            } else if (ref_better && test.p_value < 0.05) {
                stars = "*";
            }
            p_text = format_double(test.p_value);
            row["test"] = to_json(test);
            row["p_value_by_block_length"] = robustness;
        }
        row["significance"] = stars;
        rows.push_back(row);
        table << names[k] << ',' << format_double(results[k].realized_risk_annualized) << ','
              << p_text << ',' << stars << '\n';
    }
    sink.write("table.csv", table.str());

    std::ostringstream oos;
    oos << header << "date";
    for (const auto& name : names) oos << ',' << name;
    oos << '\n';
    for (std::size_t t = 0; t < m; ++t) {
        oos << ref.oos_dates[t];
        for (const auto& r : results) oos << ',' << format_double(r.oos_returns[t]);
        oos << '\n';
    }
    sink.write("oos_returns.csv", oos.str());

    for (std::size_t k = 0; k < results.size(); ++k) {
        std::ostringstream one;
        one << header << "date,return\n";
        for (std::size_t t = 0; t < m; ++t)
            one << results[k].oos_dates[t] << ',' << format_double(results[k].oos_returns[t]) << '\n';
        sink.write("oos_" + names[k] + ".csv", one.str());
    }

    std::ostringstream roll;
    roll << header << "index,end_date";
    for (const auto& name : names) roll << ',' << name;
    roll << '\n';
    for (std::size_t s = 0; s < rolling[ref_index].size(); ++s) {
        roll << s << ',' << ref.oos_dates[s + rolling_window - 1];
        for (const auto& series : rolling) roll << ',' << format_double(series[s]);
        roll << '\n';
    }
    sink.write("rolling_risk.csv", roll.str());

    std::ostringstream rhos;
    rhos << header << "rebalance_date";
    for (const auto& name : names) rhos << ',' << name;
    rhos << '\n';
    for (std::size_t w = 0; w < ref.rebalance_index.size(); ++w) {
        rhos << panel.dates[static_cast<std::size_t>(ref.rebalance_index[w])];
        for (const auto& r : results) rhos << ',' << format_double(r.per_window_rhos[w]);
        rhos << '\n';
    }
    sink.write("rhos.csv", rhos.str());

    Json sweep_rows = Json::array();
    if (!sweep.empty()) {
        std::ostringstream sw;
        sw << header << "window,estimator,annualized_risk\n";
        for (const auto w : sweep) {
            for (std::size_t k = 0; k < choices.size(); ++k) {
                const double risk = run_one(choices[k], w).realized_risk_annualized;
                sw << w << ',' << names[k] << ',' << format_double(risk) << '\n';
                sweep_rows.push_back({{"window", w}, {"estimator", names[k]}, {"annualized_risk", risk}});
            }
        }
        sink.write("risk_vs_window.csv", sw.str());
    }

    Json per_estimator = Json::object();
    for (std::size_t k = 0; k < results.size(); ++k) per_estimator[names[k]] = to_json(results[k]);
    Json summary{{"num_assets", panel.num_assets()},
                 {"num_returns", panel.num_samples()},
                 {"num_oos_returns", m},
                 {"num_rolling_points", rolling[ref_index].size()},
                 {"table", rows}};
    if (!sweep_rows.empty()) summary["window_sweep"] = sweep_rows;
    sink.write_json("table_report.json",
                    Json{{"spec", resolved}, {"summary", summary}, {"backtests", per_estimator}});
    return {sink.commit(), resolved, summary};
}

// ---------------------------------------------------------------------------
// boottest

RunOutputs run_boottest(const Json& spec, const RunContext& ctx) {
    const fs::path path_a = resolve_input(spec, "a", ctx);
    const fs::path path_b = resolve_input(spec, "b", ctx);
    std::vector<int> blocks;
    if (spec.contains("block_lengths")) {
        blocks = require<std::vector<int>>(spec, "block_lengths");
    } else {
        blocks = {spec.value("block_length", 5)};
    }
    if (blocks.empty()) throw ValidationError("block_lengths must not be empty");
    const int iterations = spec.value("iterations", 2000);
    const std::string column = spec.value("column", std::string("return"));
    const std::uint64_t seed = resolve_seed(spec, ctx);
    Json resolved{{"command", "boottest"},
                  {"a", path_a.string()},
                  {"b", path_b.string()},
                  {"column", column},
                  {"block_lengths", blocks},
                  {"iterations", iterations},
                  {"seed", seed},
                  {"rng", "std::mt19937_64 per replicate, seeded by std::seed_seq{seed_lo, seed_hi, r_lo, r_hi}"}};

    const auto a = read_series_csv(path_a, column);
    const auto b = read_series_csv(path_b, column);

    OutputSink sink(ctx.out_dir);
    Json reports = Json::array();
    for (int blen : blocks) {
        const auto test = variance_difference_test(a, b, blen, iterations, seed, ctx.threads);
        reports.push_back(to_json(test));
        sink.write_json("boottest_b" + std::to_string(blen) + ".json",
                        Json{{"spec", resolved}, {"result", to_json(test)}});
    }
    sink.write_json("boottest.json", Json{{"spec", resolved}, {"results", reports}});
    return {sink.commit(), resolved, reports};
}

RunOutputs run_command(const std::string& command, const Json& spec, const RunContext& ctx) {
    if (!spec.is_object()) throw ValidationError("spec must be a JSON object");
    if (command == "simulate") return run_simulate(spec, ctx);
    if (command == "calibrate") return run_calibrate(spec, ctx);
    if (command == "backtest") return run_backtest(spec, ctx);
    if (command == "boottest") return run_boottest(spec, ctx);
    throw UsageError("unknown command '" + command + "'");
}

}  // namespace stgmvp
