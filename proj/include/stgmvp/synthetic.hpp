#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "stgmvp/data_model.hpp"

namespace stgmvp {

/// Law of the radial variable tau in x = mu + sqrt(tau) C^{1/2} y.
struct TauLaw {
    enum class Kind { constant, student_t };
    Kind kind = Kind::constant;
    int dof = 0;  // degrees of freedom for student_t, >= 3

    static TauLaw constant() { return {Kind::constant, 0}; }
    static TauLaw student_t(int dof) { return {Kind::student_t, dof}; }

    /// E[tau]: 1 for constant, d / (d - 2) for student_t.
    double mean() const;
    std::string describe() const;
};

struct EllipticalSpec {
    Eigen::VectorXd mu;    // length N; empty means zero
    Eigen::MatrixXd cov;   // N x N SPD
    TauLaw tau_law;
    Eigen::Index n = 0;
    std::uint64_t seed = 0;
};

void validate(const EllipticalSpec& spec);

/// b b^T sigma^2 + sigma_r^2 I with loadings b evenly spaced over [b_lo, b_hi].
Eigen::MatrixXd one_factor_covariance(Eigen::Index num_assets, double sigma, double b_lo,
                                      double b_hi, double sigma_r);

/// Engine for sample t of a panel drawn with `seed`. Every sample has its own
/// stream, so panels do not depend on generation order.
std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t t);

/// Child seed for an experiment cell, e.g. derive_seed(seed, {n, repetition}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

/// Identity of the generator, recorded in experiment outputs.
std::string rng_description();

/// One tau draw. For student_t, tau = d / chi2_d with chi2 draws outside
/// [1e-12, 1e12] redrawn, which keeps tau bounded away from 0 and infinity.
double draw_tau(const TauLaw& law, std::mt19937_64& engine);

/// Uniform direction on the sphere of radius sqrt(N), from a normalized
/// isotropic Gaussian vector.
Eigen::VectorXd draw_sphere(Eigen::Index num_assets, std::mt19937_64& engine);

struct EllipticalDraw {
    Eigen::VectorXd y;  // ||y||^2 = N
    double tau = 1.0;
};

/// The pre-transform ingredients of sample t.
EllipticalDraw elliptical_draw(const TauLaw& law, Eigen::Index num_assets, std::uint64_t seed,
                               std::uint64_t t);

/// n samples of mu + sqrt(tau_t) C^{1/2} y_t, with C^{1/2} the symmetric root.
ReturnPanel sample_elliptical(const EllipticalSpec& spec, unsigned threads = 1);

/// Cumulates log returns into prices starting at `base`, with one extra
/// leading date so that log_returns() recovers the panel.
PricePanel to_price_panel(const ReturnPanel& panel, double base = 100.0,
                          const std::string& first_date = "2011-01-03");

}  // namespace stgmvp
