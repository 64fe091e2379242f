#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "stgmvp/synthetic.hpp"

namespace testing_support {

inline stgmvp::ReturnPanel student_panel(Eigen::Index num_assets, Eigen::Index n, std::uint64_t seed,
                                         int dof = 3) {
    stgmvp::EllipticalSpec spec;
    spec.cov = stgmvp::one_factor_covariance(num_assets, 0.16, 0.5, 1.5, 0.2);
    spec.tau_law = stgmvp::TauLaw::student_t(dof);
    spec.n = n;
    spec.seed = seed;
    return stgmvp::sample_elliptical(spec);
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("stgmvp_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
