#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stgmvp/errors.hpp"
#include "stgmvp/experiments.hpp"
#include "support.hpp"

using namespace stgmvp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(STGMVP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return status == 0 ? 0 : 1;
}

fs::path write_json(const fs::path& p, const Json& j) {
    std::ofstream(p) << j.dump(2);
    return p;
}

}  // namespace

TEST_CASE("series csv reader") {
    auto dir = testing_support::scratch_dir("series");
    std::ofstream(dir / "s.csv") << "# spec: {}\ndate,x,return\n2020-01-01,9,0.5\n2020-01-02,9,-0.25\n";
    CHECK(read_series_csv(dir / "s.csv") == std::vector<double>{0.5, -0.25});
    CHECK(read_series_csv(dir / "s.csv", "x") == std::vector<double>{9, 9});
    std::ofstream(dir / "bad.csv") << "date,return\n2020-01-01,0.1\n2020-01-02,oops\n";
    try {
        read_series_csv(dir / "bad.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK(std::stod(format_double(0.1)) == 0.1);
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    fs::remove_all(dir);
}

TEST_CASE("backtest command is deterministic across runs and threads") {
    auto dir = testing_support::scratch_dir("cli_bt");
    write_price_csv(to_price_panel(testing_support::student_panel(5, 140, 77)), dir / "prices.csv");
    write_json(dir / "bt.json", {{"prices", "prices.csv"},
                                 {"window", 60},
                                 {"hold", 10},
                                 {"estimators", {"st_optimized", "scm", "identity", "st_fixed(0.5)"}},
                                 {"grid_size", 5},
                                 {"rolling_window", 20},
                                 {"window_sweep", {40, 60}},
                                 {"bootstrap", {{"iterations", 200}, {"extra_block_lengths", {1}}}},
                                 {"seed", 4}});
    const auto spec = (dir / "bt.json").string();
    REQUIRE(run_cli("backtest --spec " + spec + " --out " + (dir / "a").string(), dir / "log") == 0);
    REQUIRE(run_cli("backtest --spec " + spec + " --out " + (dir / "b").string() + " --threads 3",
                    dir / "log") == 0);
    for (const char* f : {"table.csv", "oos_returns.csv", "rolling_risk.csv", "rhos.csv",
                          "risk_vs_window.csv", "table_report.json", "oos_scm.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const std::string table = slurp(dir / "a" / "table.csv");
    CHECK(table.rfind("# spec: ", 0) == 0);
    CHECK(table.find("estimator,annualized_risk,p_value,significance") != std::string::npos);
    CHECK(read_series_csv(dir / "a" / "oos_identity.csv").size() == 80);

    // Same file on both sides of the test: no difference, p = 1.
    write_json(dir / "bb.json", {{"a", "a/oos_scm.csv"}, {"b", "a/oos_scm.csv"},
                                 {"block_lengths", {1, 5}}, {"iterations", 300}});
    REQUIRE(run_cli("boottest --spec " + (dir / "bb.json").string() + " --out " +
                        (dir / "c").string(), dir / "log") == 0);
    const auto report = Json::parse(slurp(dir / "c" / "boottest.json"));
    CHECK(report["results"][0]["p_value"].get<double>() == 1.0);
    CHECK(report["results"][1]["p_value"].get<double>() == 1.0);
    CHECK(fs::exists(dir / "c" / "boottest_b5.json"));

    // --seed overrides the spec seed and changes nothing but the bootstrap draws.
    REQUIRE(run_cli("backtest --spec " + spec + " --out " + (dir / "d").string() + " --seed 5",
                    dir / "log") == 0);
    CHECK(slurp(dir / "a" / "oos_returns.csv") != slurp(dir / "d" / "oos_returns.csv"));  // header differs
    fs::remove_all(dir);
}

TEST_CASE("missing input fails cleanly") {
    auto dir = testing_support::scratch_dir("cli_missing");
    write_json(dir / "bt.json", {{"prices", "nowhere.csv"}});
    CHECK(run_cli("backtest --spec " + (dir / "bt.json").string() + " --out " + (dir / "o").string(),
                  dir / "log") != 0);
    CHECK(slurp(dir / "log").find("nowhere.csv") != std::string::npos);
    CHECK((!fs::exists(dir / "o") || fs::is_empty(dir / "o")));
    CHECK(run_cli("calibrate --spec " + (dir / "absent.json").string(), dir / "log") != 0);
    CHECK(slurp(dir / "log").find("absent.json") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("failed runs remove partial outputs") {
    auto dir = testing_support::scratch_dir("partial");
    // The price export is written before the solver fails with one iteration.
    Json spec{{"N", 4},
              {"n_values", {12}},
              {"repetitions", 1},
              {"grid_size", 3},
              {"solver", {{"max_iterations", 1}}},
              {"export_panel", {{"n", 20}}}};
    RunContext ctx;
    ctx.out_dir = dir / "o";
    CHECK_THROWS_AS(run_command("simulate", spec, ctx), SolverError);
    CHECK(fs::is_empty(dir / "o"));
    fs::remove_all(dir);
}

TEST_CASE("simulate and calibrate commands") {
    auto dir = testing_support::scratch_dir("cli_sim");
    write_json(dir / "sim.json", {{"N", 6},
                                  {"n_values", {4, 12}},
                                  {"repetitions", 3},
                                  {"grid_size", 4},
                                  {"seed", 2},
                                  {"export_panel", {{"n", 50}}}});
    REQUIRE(run_cli("simulate --spec " + (dir / "sim.json").string() + " --out " +
                        (dir / "s").string(), dir / "log") == 0);
    const std::string risk = slurp(dir / "s" / "risk_vs_n.csv");
    CHECK(risk.find("12,scm,") != std::string::npos);
    CHECK(risk.find("4,scm,") == std::string::npos);
    CHECK(risk.find("4,deterministic_equivalent,") != std::string::npos);
    CHECK(fs::exists(dir / "s" / "rho_vs_n.csv"));

    write_json(dir / "cal.json", {{"prices", "s/synthetic_prices.csv"}, {"grid_size", 6}});
    REQUIRE(run_cli("calibrate --spec " + (dir / "cal.json").string() + " --out " +
                        (dir / "c").string(), dir / "log") == 0);
    const auto report = Json::parse(slurp(dir / "c" / "calibrate_report.json"));
    CHECK(report["result"]["num_samples"].get<int>() == 50);
    const double rho_star = report["result"]["rho_star"].get<double>();
    CHECK((rho_star >= 0.01 && rho_star <= 1.0));
    CHECK(fs::exists(dir / "c" / "weights.csv"));
    CHECK(fs::exists(dir / "c" / "risk_curve.json"));
    fs::remove_all(dir);
}
