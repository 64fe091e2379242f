#include <doctest.h>

#include <cmath>

#include "stgmvp/errors.hpp"
#include "stgmvp/risk_calibration.hpp"
#include "support.hpp"

using namespace stgmvp;

namespace {

// gamma_hat / ((1-rho) - (1-rho)^2 c_N) * u^T (C - rho I) u / (1^T u)^2, c_N = N / (n - 1)
double literal_scaled_risk(const ReturnPanel& panel, const ShrinkageEstimate& est) {
    const Eigen::MatrixXd x = centered_samples(panel);
    const double dim = static_cast<double>(x.rows());
    const double cn = dim / static_cast<double>(x.cols() - 1);
    const double rho = est.rho;
    const Eigen::MatrixXd inv = est.matrix.inverse();
    double g = 0.0;
    for (Eigen::Index t = 0; t < x.cols(); ++t)
        g += x.col(t).dot(inv * x.col(t)) / x.col(t).squaredNorm();
    g /= static_cast<double>(x.cols());
    const double gamma_sc = g / (1.0 - (1.0 - rho) * cn);
    const Eigen::VectorXd u = inv * Eigen::VectorXd::Ones(x.rows());
    const Eigen::MatrixXd shifted = est.matrix - rho * Eigen::MatrixXd::Identity(x.rows(), x.rows());
    return gamma_sc / ((1.0 - rho) - (1.0 - rho) * (1.0 - rho) * cn) * u.dot(shifted * u) /
           std::pow(u.sum(), 2);
}

}  // namespace

TEST_CASE("cancelled and literal scaled risk agree") {
    const auto panel = testing_support::student_panel(20, 50, 8);
    SolverOptions tight;
    tight.tolerance = 1e-13;
    for (double rho : {0.1, 0.4, 0.7}) {
        CAPTURE(rho);
        const auto est = tyler_shrinkage(panel, rho, tight);
        CHECK(scaled_risk_estimate(panel, est) ==
              doctest::Approx(literal_scaled_risk(panel, est)).epsilon(1e-8));
    }
}

TEST_CASE("scaled risk is continuous at rho = 1") {
    const auto panel = testing_support::student_panel(15, 40, 12);
    SolverOptions tight;
    tight.tolerance = 1e-13;
    const double at_one = scaled_risk_estimate(panel, tyler_shrinkage(panel, 1.0, tight));
    const double near_one = scaled_risk_estimate(panel, tyler_shrinkage(panel, 1.0 - 1e-6, tight));
    CHECK(std::isfinite(at_one));
    CHECK(at_one == doctest::Approx(near_one).epsilon(1e-4));
    CHECK(gamma_hat_sc(panel, tyler_shrinkage(panel, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("scaled estimators are scale invariant") {
    auto panel = testing_support::student_panel(10, 40, 13);
    const auto a = tyler_shrinkage(panel, 0.3);
    const double ra = scaled_risk_estimate(panel, a);
    panel.returns *= 1e3;
    const auto b = tyler_shrinkage(panel, 0.3);
    CHECK(scaled_risk_estimate(panel, b) == doctest::Approx(ra).epsilon(1e-8));
}

TEST_CASE("uniform grid endpoints") {
    const auto g = uniform_grid(0.01, 1.0, 50);
    REQUIRE(g.size() == 50);
    CHECK(g.front() == 0.01);
    CHECK(g.back() == 1.0);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
    CHECK_THROWS_AS(uniform_grid(0.0, 1.0, 1), ValidationError);
}

TEST_CASE("argmin takes the first minimum") {
    CHECK(argmin_first({3.0, 1.0, 2.0, 1.0}) == 1);
    CHECK(argmin_first({0.5}) == 0);
}

TEST_CASE("optimize_rho picks the brute-force minimum") {
    const auto panel = testing_support::student_panel(20, 40, 31);
    const auto curve = optimize_rho(panel, 12, 0.01);
    const auto range = admissible_rho_range(20, 40, 0.01);
    const auto grid = uniform_grid(range.lo, range.hi, 12);
    REQUIRE(curve.rho_grid == grid);
    double best = INFINITY;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double s = scaled_risk_estimate(panel, tyler_shrinkage(panel, grid[k]));
        CHECK(s == doctest::Approx(curve.sigma_sc[k]).epsilon(1e-12));
        if (s < best) {
            best = s;
            arg = k;
        }
    }
    CHECK(curve.star_index == arg);
    CHECK(curve.rho_star == grid[arg]);

    const auto threaded = optimize_rho(panel, 12, 0.01, {}, 3);
    CHECK(threaded.sigma_sc == curve.sigma_sc);
}

TEST_CASE("forced rho = 1 gives uniform weights") {
    const auto panel = testing_support::student_panel(9, 30, 4);
    const auto out = portfolio_at_rho(panel, 1.0);
    CHECK((out.portfolio.weights - Eigen::VectorXd::Constant(9, 1.0 / 9.0)).cwiseAbs().maxCoeff() <
          1e-16);
}

TEST_CASE("optimized portfolio reuses the selected estimate") {
    const auto panel = testing_support::student_panel(12, 48, 6);
    const auto out = build_optimized_portfolio(panel, 8);
    const auto direct = tyler_shrinkage(panel, out.curve.rho_star);
    CHECK(out.estimate.matrix == direct.matrix);
    CHECK(out.portfolio.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("grid errors carry the failing rho") {
    auto panel = testing_support::student_panel(6, 20, 6);
    SolverOptions opts;
    opts.max_iterations = 1;
    try {
        evaluate_grid(panel, {0.2, 0.5}, opts);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("rho=0.2") != std::string::npos);
    }
}
