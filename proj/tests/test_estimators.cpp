#include <doctest.h>

#include "stgmvp/errors.hpp"
#include "stgmvp/estimators.hpp"
#include "support.hpp"

using namespace stgmvp;

namespace {

// Right-hand side of the fixed point with an explicit inverse, no shared code
// with the library's Cholesky path.
Eigen::MatrixXd fixed_point_map(const Eigen::MatrixXd& x, const Eigen::MatrixXd& c, double rho) {
    const double dim = static_cast<double>(x.rows());
    const double n = static_cast<double>(x.cols());
    const Eigen::MatrixXd inv = c.fullPivLu().inverse();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(x.rows(), x.rows());
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        const double q = x.col(t).dot(inv * x.col(t)) / dim;
        acc += x.col(t) * x.col(t).transpose() / q;
    }
    return (1.0 - rho) / n * acc + rho * Eigen::MatrixXd::Identity(x.rows(), x.rows());
}

}  // namespace

TEST_CASE("sample covariance matches explicit outer products") {
    const auto panel = testing_support::student_panel(5, 40, 3);
    const Eigen::MatrixXd x = centered_samples(panel);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(5, 5);
    for (Eigen::Index t = 0; t < 40; ++t) oracle += x.col(t) * x.col(t).transpose();
    oracle /= 40.0;
    CHECK((sample_covariance(panel) - oracle).norm() < 1e-14 * oracle.norm());
}

TEST_CASE("rho = 1 gives the identity exactly") {
    const auto panel = testing_support::student_panel(8, 30, 11);
    const auto est = tyler_shrinkage(panel, 1.0);
    CHECK(est.matrix == Eigen::MatrixXd::Identity(8, 8));
    CHECK(est.iterations == 1);
    CHECK(est.residual == 0.0);
}

TEST_CASE("converged estimate satisfies the fixed point independently") {
    for (double rho : {0.05, 0.3, 0.8}) {
        CAPTURE(rho);
        const auto panel = testing_support::student_panel(20, 60, 5);
        const auto est = tyler_shrinkage(panel, rho);
        const Eigen::MatrixXd x = centered_samples(panel);
        const Eigen::MatrixXd mapped = fixed_point_map(x, est.matrix, rho);
        const double defect = (mapped - est.matrix).norm() / est.matrix.norm();
        CHECK(defect <= 1e-10);
        CHECK(defect == doctest::Approx(est.residual).epsilon(1e-3));
        CHECK(est.matrix.isApprox(est.matrix.transpose(), 0.0));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.matrix);
        CHECK(eig.eigenvalues().minCoeff() >= rho - 1e-10);
    }
}

TEST_CASE("fixed point under N > n with admissible rho") {
    const auto panel = testing_support::student_panel(40, 25, 9);
    CHECK_THROWS_AS(tyler_shrinkage(panel, 0.3), ValidationError);
    CHECK_THROWS_AS(tyler_shrinkage(panel, 0.39), ValidationError);  // centring costs one sample
    const auto est = tyler_shrinkage(panel, 0.5);
    const Eigen::MatrixXd mapped = fixed_point_map(centered_samples(panel), est.matrix, 0.5);
    CHECK((mapped - est.matrix).norm() / est.matrix.norm() <= 1e-10);
}

TEST_CASE("scale invariance of the estimate") {
    auto panel = testing_support::student_panel(10, 50, 21);
    const auto a = tyler_shrinkage(panel, 0.4);
    panel.returns *= 37.5;
    const auto b = tyler_shrinkage(panel, 0.4);
    CHECK((a.matrix - b.matrix).norm() < 1e-9 * a.matrix.norm());
}

TEST_CASE("initializers reach the same fixed point") {
    const auto panel = testing_support::student_panel(15, 45, 2);
    SolverOptions tight;
    tight.tolerance = 1e-13;
    const auto a = tyler_shrinkage(panel, 0.25, tight);
    tight.initializer = Initializer::scaled_scm;
    const auto b = tyler_shrinkage(panel, 0.25, tight);
    CHECK((a.matrix - b.matrix).norm() < 1e-11 * a.matrix.norm());
}

TEST_CASE("solver failures are reported") {
    const auto panel = testing_support::student_panel(10, 40, 4);
    SolverOptions opts;
    opts.max_iterations = 2;
    try {
        tyler_shrinkage(panel, 0.1, opts);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.iterations() == 2);
        CHECK(e.last_residual() > 0.0);
    }
    opts.max_iterations = 0;
    CHECK_THROWS_AS(tyler_shrinkage(panel, 0.5, opts), ValidationError);
    opts = {};
    opts.tolerance = 1.0;
    CHECK_THROWS_AS(tyler_shrinkage(panel, 0.5, opts), ValidationError);
    CHECK_THROWS_AS(tyler_shrinkage(panel, 0.0, {}), ValidationError);
    CHECK_THROWS_AS(tyler_shrinkage(panel, 1.5, {}), ValidationError);
}

TEST_CASE("a zero centred sample is degenerate") {
    auto panel = testing_support::student_panel(4, 10, 1);
    panel.returns = centered_samples(panel);
    panel.demeaned = true;
    panel.returns.col(1).setZero();
    panel.returns.col(0) = -(panel.returns.rightCols(9).rowwise().sum());
    CHECK_THROWS_AS(tyler_shrinkage(panel, 0.5), DegenerateDataError);
}
