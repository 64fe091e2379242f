#pragma once

#include <cstdint>
#include <span>

namespace stgmvp {

/// Outcome of a paired test of equal variance between two return series.
struct BootstrapTest {
    double statistic = 0.0;       // ln s_a^2 - ln s_b^2
    double std_error = 0.0;       // block (Bartlett-type) standard error of the statistic
    double p_value = 1.0;         // two-sided, in [0, 1]
    int block_length = 1;
    int iterations = 1;
    std::uint64_t seed = 0;
    std::size_t length = 0;
};

/// Studentized circular block bootstrap test of H0: var(a) = var(b).
///
/// Each replicate draws ceil(m / b) block starts uniformly on the circle,
/// applies the same index blocks to both series, and recomputes the statistic
/// T* and its block standard error se*. The p-value is the fraction of
/// replicates with |T* - T| / se* >= |T| / se. The original standard error
/// uses overlapping circular blocks of length b; replicate errors use the
/// resampled blocks. Replicate r draws from its own engine keyed by
/// (seed, r), so the result does not depend on `threads`.
///
/// Throws ValidationError on length mismatch or m < 2 b, and
/// DegenerateDataError when either series is constant.
BootstrapTest variance_difference_test(std::span<const double> a, std::span<const double> b,
                                       int block_length = 5, int iterations = 2000,
                                       std::uint64_t seed = 0, unsigned threads = 1);

}  // namespace stgmvp
