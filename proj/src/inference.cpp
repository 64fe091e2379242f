#include "stgmvp/inference.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "stgmvp/errors.hpp"
#include "stgmvp/parallel.hpp"

namespace stgmvp {

namespace {

struct Moments {
    double log_var_diff;   // ln var(a) - ln var(b)
    std::vector<double> influence;
};

// Divisor m for both variances: the divisor cancels in the difference of logs
// and makes the influence values average to exactly zero.
Moments moments(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t m = a.size();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        mean_a += a[t];
        mean_b += b[t];
    }
    mean_a /= static_cast<double>(m);
    mean_b /= static_cast<double>(m);
    std::vector<double> sq_a(m), sq_b(m);
    double var_a = 0.0, var_b = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        sq_a[t] = (a[t] - mean_a) * (a[t] - mean_a);
        sq_b[t] = (b[t] - mean_b) * (b[t] - mean_b);
        var_a += sq_a[t];
        var_b += sq_b[t];
    }
    var_a /= static_cast<double>(m);
    var_b /= static_cast<double>(m);
    Moments out;
    out.log_var_diff = std::log(var_a) - std::log(var_b);
    out.influence.resize(m);
    if (var_a > 0.0 && var_b > 0.0) {
        for (std::size_t t = 0; t < m; ++t) out.influence[t] = sq_a[t] / var_a - sq_b[t] / var_b;
    }
    return out;
}

double studentize(double numerator, double std_error) {
    if (std_error > 0.0) return numerator / std_error;
    if (numerator == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), numerator);
}

}  // namespace

BootstrapTest variance_difference_test(std::span<const double> a, std::span<const double> b,
                                       int block_length, int iterations, std::uint64_t seed,
                                       unsigned threads) {
    if (a.size() != b.size())
        throw ValidationError("variance_difference_test: series lengths differ (" +
                              std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    if (block_length < 1) throw ValidationError("variance_difference_test: block_length must be >= 1");
    if (iterations < 1) throw ValidationError("variance_difference_test: iterations must be >= 1");
    const std::size_t m = a.size();
    const auto blen = static_cast<std::size_t>(block_length);
    if (m < 2 * blen)
        throw ValidationError("variance_difference_test: need length >= 2 * block_length");

    const std::vector<double> va(a.begin(), a.end());
    const std::vector<double> vb(b.begin(), b.end());
    const Moments base = moments(va, vb);
    if (!std::isfinite(base.log_var_diff))
        throw DegenerateDataError("variance_difference_test: a series is constant");

    // Overlapping circular block sums: Bartlett-type long-run variance.
    double lrv = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        double sum = 0.0;
        for (std::size_t k = 0; k < blen; ++k) sum += base.influence[(s + k) % m];
        lrv += sum * sum / static_cast<double>(blen);
    }
    lrv /= static_cast<double>(m);
    const double se = std::sqrt(lrv / static_cast<double>(m));
    const double t_stat = studentize(base.log_var_diff, se);

    const std::size_t num_blocks = (m + blen - 1) / blen;
    std::vector<char> extreme(static_cast<std::size_t>(iterations), 0);
    parallel_for(extreme.size(), threads, [&](std::size_t r) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
        std::mt19937_64 engine(seq);
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        std::vector<double> ra, rb;
        ra.reserve(num_blocks * blen);
        rb.reserve(num_blocks * blen);
        for (std::size_t j = 0; j < num_blocks; ++j) {
            const std::size_t start = pick(engine);
            for (std::size_t k = 0; k < blen && ra.size() < m; ++k) {
                ra.push_back(va[(start + k) % m]);
                rb.push_back(vb[(start + k) % m]);
            }
        }
        const Moments rep = moments(ra, rb);
        if (!std::isfinite(rep.log_var_diff)) {
            extreme[r] = 1;
            return;
        }
        double rep_lrv = 0.0;
        for (std::size_t j = 0; j < num_blocks; ++j) {
            double sum = 0.0;
            for (std::size_t k = j * blen; k < std::min(m, (j + 1) * blen); ++k)
                sum += rep.influence[k];
            rep_lrv += sum * sum;
        }
        rep_lrv /= static_cast<double>(m);
        const double rep_se = std::sqrt(rep_lrv / static_cast<double>(m));
        const double t_rep = studentize(rep.log_var_diff - base.log_var_diff, rep_se);
        extreme[r] = std::abs(t_rep) >= std::abs(t_stat) ? 1 : 0;
    });

    std::size_t hits = 0;
    for (char e : extreme) hits += static_cast<std::size_t>(e);

    BootstrapTest out;
    out.statistic = base.log_var_diff;
    out.std_error = se;
    out.p_value = static_cast<double>(hits) / static_cast<double>(iterations);
    out.block_length = block_length;
    out.iterations = iterations;
    out.seed = seed;
    out.length = m;
    return out;
}

}  // namespace stgmvp
