#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stgmvp {

/// Wide price table: one row per asset, one column per date.
struct PricePanel {
    Eigen::MatrixXd prices;              // N x (L+1), strictly positive
    std::vector<std::string> asset_ids;  // N distinct labels
    std::vector<std::string> dates;      // L+1 ISO-8601 dates, strictly increasing

    Eigen::Index num_assets() const { return prices.rows(); }
    Eigen::Index num_dates() const { return prices.cols(); }
};

/// Asset x time matrix of log returns. Column t is the return vector x_t.
///
/// `demeaned` marks panels whose columns have had the across-time sample mean
/// removed; estimators that need centred samples accept either form and centre
/// on demand.
struct ReturnPanel {
    Eigen::MatrixXd returns;             // N x n
    std::vector<std::string> asset_ids;  // N labels
    std::vector<std::string> dates;      // n labels (date of the period end)
    bool demeaned = false;

    Eigen::Index num_assets() const { return returns.rows(); }
    Eigen::Index num_samples() const { return returns.cols(); }
    double aspect_ratio() const {
        return static_cast<double>(num_assets()) / static_cast<double>(num_samples());
    }
};

struct RhoInterval {
    double lo;
    double hi;
};

/// Checks every PricePanel invariant; throws ValidationError on the first violation.
void validate(const PricePanel& panel);
/// Checks every ReturnPanel invariant; throws ValidationError on the first violation.
void validate(const ReturnPanel& panel);

/// Reads a `date,<id1>,...,<idN>` price CSV. Rows are sorted by date on load.
PricePanel load_price_csv(const std::filesystem::path& path);
/// Writes the same schema `load_price_csv` reads, with 17 significant digits.
void write_price_csv(const PricePanel& panel, const std::filesystem::path& path);

ReturnPanel log_returns(const PricePanel& panel);

/// Subtracts the across-time mean vector from every column.
/// Throws UsageError if the panel is already demeaned.
ReturnPanel demean(const ReturnPanel& panel);

/// Centred samples x~_t as an N x n matrix, demeaning only when needed.
Eigen::MatrixXd centered_samples(const ReturnPanel& panel);

/// [eps + max(0, 1 - (n-1)/N), 1]: the fixed point exists for rho above
/// 1 - r/N with r the rank of the centred samples, here n - 1.
/// Throws ValidationError when empty.
RhoInterval admissible_rho_range(Eigen::Index num_assets, Eigen::Index num_samples,
                                 double eps);

/// True for a well-formed YYYY-MM-DD calendar date.
bool is_iso_date(const std::string& s);

/// `count` consecutive weekdays starting at `first` (YYYY-MM-DD).
std::vector<std::string> weekday_dates(const std::string& first, std::size_t count);

}  // namespace stgmvp
