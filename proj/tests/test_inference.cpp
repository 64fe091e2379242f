#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/fisher_f.hpp>

#include "stgmvp/errors.hpp"
#include "stgmvp/inference.hpp"

using namespace stgmvp;

namespace {

std::vector<double> normals(std::size_t m, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> v(m);
    for (auto& x : v) x = z(rng);
    return v;
}

double sample_var(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("identical series give p = 1") {
    const auto a = normals(200, 1.0, 1);
    const auto t = variance_difference_test(a, a, 5, 500, 3);
    CHECK(t.statistic == 0.0);
    CHECK(t.p_value == 1.0);
}

TEST_CASE("iid gaussian series agree with the two-sided F test") {
    // Independent iid normal series: the classical F test is exact, and with
    // b = 1 the studentized bootstrap should land close to it.
    const std::size_t m = 1500;
    const auto a = normals(m, 1.0, 11);
    const auto b = normals(m, 1.08, 12);
    const double f = sample_var(a) / sample_var(b);
    const boost::math::fisher_f dist(static_cast<double>(m - 1), static_cast<double>(m - 1));
    const double tail = f < 1.0 ? boost::math::cdf(dist, f) : boost::math::cdf(complement(dist, f));
    const double p_f = 2.0 * tail;
    const auto t = variance_difference_test(a, b, 1, 4000, 5);
    CAPTURE(p_f);
    CAPTURE(t.p_value);
    CHECK(std::abs(t.p_value - p_f) < 0.05);
    CHECK(t.statistic == doctest::Approx(std::log(f)).epsilon(1e-12));
}

TEST_CASE("bootstrap result is independent of threads and reproducible") {
    const auto a = normals(300, 1.0, 21);
    const auto b = normals(300, 1.3, 22);
    const auto one = variance_difference_test(a, b, 5, 800, 9, 1);
    const auto many = variance_difference_test(a, b, 5, 800, 9, 4);
    CHECK(one.p_value == many.p_value);
    CHECK(one.std_error == many.std_error);
    const double other = variance_difference_test(a, b, 5, 800, 10).p_value;
    CHECK((other >= 0.0 && other <= 1.0));
}

TEST_CASE("strong variance gap is detected") {
    const auto a = normals(400, 1.0, 31);
    const auto b = normals(400, 2.0, 32);
    CHECK(variance_difference_test(a, b, 5, 1000, 1).p_value < 0.01);
}

TEST_CASE("bootstrap input errors") {
    const auto a = normals(20, 1.0, 1);
    const auto b = normals(21, 1.0, 2);
    CHECK_THROWS_AS(variance_difference_test(a, b), ValidationError);
    CHECK_THROWS_AS(variance_difference_test(a, a, 11), ValidationError);
    CHECK_THROWS_AS(variance_difference_test(a, a, 0), ValidationError);
    CHECK_THROWS_AS(variance_difference_test(a, a, 2, 0), ValidationError);
    const std::vector<double> flat(20, 0.5);
    CHECK_THROWS_AS(variance_difference_test(a, flat), DegenerateDataError);
}
