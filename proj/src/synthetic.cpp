#include "stgmvp/synthetic.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "stgmvp/errors.hpp"
#include "stgmvp/parallel.hpp"

namespace stgmvp {

double TauLaw::mean() const {
    if (kind == Kind::constant) return 1.0;
    return static_cast<double>(dof) / static_cast<double>(dof - 2);
}

std::string TauLaw::describe() const {
    if (kind == Kind::constant) return "constant";
    return "student_t(" + std::to_string(dof) + ")";
}

void validate(const EllipticalSpec& spec) {
    const auto dim = spec.cov.rows();
    if (dim < 1 || spec.cov.cols() != dim)
        throw ValidationError("elliptical spec: covariance must be square and non-empty");
    if (spec.mu.size() != 0 && spec.mu.size() != dim)
        throw ValidationError("elliptical spec: mean length does not match covariance");
    if (spec.n < 1) throw ValidationError("elliptical spec: n must be >= 1");
    if (spec.tau_law.kind == TauLaw::Kind::student_t && spec.tau_law.dof < 3)
        throw ValidationError("elliptical spec: student_t needs d >= 3 for a finite E[tau]");
    if (!spec.cov.isApprox(spec.cov.transpose(), 1e-12))
        throw ValidationError("elliptical spec: covariance is not symmetric");
}

Eigen::MatrixXd one_factor_covariance(Eigen::Index num_assets, double sigma, double b_lo,
                                      double b_hi, double sigma_r) {
    if (num_assets < 2) throw ValidationError("one_factor_covariance: N must be >= 2");
    if (!(b_lo <= b_hi)) throw ValidationError("one_factor_covariance: need b_lo <= b_hi");
    if (!(sigma > 0.0) || !(sigma_r > 0.0))
        throw ValidationError("one_factor_covariance: sigma and sigma_r must be positive");
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(num_assets, b_lo, b_hi);
    Eigen::MatrixXd cov = sigma * sigma * b * b.transpose();
    cov.diagonal().array() += sigma_r * sigma_r;
    return cov;
}

std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    return std::mt19937_64(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                     static_cast<std::uint32_t>(seed >> 32)};
    for (auto k : keys) {
        words.push_back(static_cast<std::uint32_t>(k));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

std::string rng_description() {
    return "std::mt19937_64 per sample, seeded by std::seed_seq{seed_lo, seed_hi, t_lo, t_hi}";
}

double draw_tau(const TauLaw& law, std::mt19937_64& engine) {
    if (law.kind == TauLaw::Kind::constant) return 1.0;
    std::chi_squared_distribution<double> chi2(static_cast<double>(law.dof));
    double draw = chi2(engine);
    while (!(draw >= 1e-12 && draw <= 1e12)) draw = chi2(engine);
    return static_cast<double>(law.dof) / draw;
}

Eigen::VectorXd draw_sphere(Eigen::Index num_assets, std::mt19937_64& engine) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd g(num_assets);
    double norm2 = 0.0;
    do {
        for (Eigen::Index i = 0; i < num_assets; ++i) g(i) = normal(engine);
        norm2 = g.squaredNorm();
    } while (!(norm2 > 0.0));
    return g * std::sqrt(static_cast<double>(num_assets) / norm2);
}

EllipticalDraw elliptical_draw(const TauLaw& law, Eigen::Index num_assets, std::uint64_t seed,
                               std::uint64_t t) {
    auto engine = sample_engine(seed, t);
    EllipticalDraw d;
    d.y = draw_sphere(num_assets, engine);
    d.tau = draw_tau(law, engine);
    return d;
}

ReturnPanel sample_elliptical(const EllipticalSpec& spec, unsigned threads) {
    validate(spec);
    const auto dim = spec.cov.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.cov);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0))
        throw ValidationError("elliptical spec: covariance is not positive definite");
    const Eigen::MatrixXd root = eig.operatorSqrt();

    ReturnPanel panel;
    panel.returns.resize(dim, spec.n);
    parallel_for(static_cast<std::size_t>(spec.n), threads, [&](std::size_t t) {
        const auto d = elliptical_draw(spec.tau_law, dim, spec.seed, t);
        auto col = panel.returns.col(static_cast<Eigen::Index>(t));
        col.noalias() = std::sqrt(d.tau) * (root * d.y);
        if (spec.mu.size() == dim) col += spec.mu;
    });
    for (Eigen::Index i = 0; i < dim; ++i) panel.asset_ids.push_back("A" + std::to_string(i + 1));
    for (Eigen::Index t = 0; t < spec.n; ++t) panel.dates.push_back("t" + std::to_string(t + 1));
    panel.demeaned = false;
    return panel;
}

PricePanel to_price_panel(const ReturnPanel& panel, double base, const std::string& first_date) {
    if (panel.demeaned) throw UsageError("to_price_panel: expects raw (not demeaned) returns");
    if (!(base > 0.0)) throw ValidationError("to_price_panel: base price must be positive");
    const auto dim = panel.num_assets();
    const auto n = panel.num_samples();
    PricePanel out;
    out.asset_ids = panel.asset_ids;
    out.dates = weekday_dates(first_date, static_cast<std::size_t>(n + 1));
    out.prices.resize(dim, n + 1);
    out.prices.col(0).setConstant(base);
    Eigen::VectorXd log_level = Eigen::VectorXd::Constant(dim, std::log(base));
    for (Eigen::Index t = 0; t < n; ++t) {
        log_level += panel.returns.col(t);
        out.prices.col(t + 1) = log_level.array().exp();
    }
    return out;
}

}  // namespace stgmvp
