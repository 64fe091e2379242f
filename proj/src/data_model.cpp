#include "stgmvp/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "stgmvp/errors.hpp"

namespace stgmvp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string cell_ref(std::size_t row, std::size_t col, const std::string& column_name) {
    return "row " + std::to_string(row) + ", column " + std::to_string(col) + " (" +
           column_name + ")";
}

std::chrono::year_month_day parse_ymd(const std::string& s, bool& ok) {
    ok = false;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return {};
    int y = 0;
    unsigned m = 0, d = 0;
    const char* b = s.data();
    if (std::from_chars(b, b + 4, y).ptr != b + 4) return {};
    if (std::from_chars(b + 5, b + 7, m).ptr != b + 7) return {};
    if (std::from_chars(b + 8, b + 10, d).ptr != b + 10) return {};
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                    std::chrono::day{d}};
    ok = ymd.ok();
    return ymd;
}

std::string format_ymd(const std::chrono::year_month_day& ymd) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace

bool is_iso_date(const std::string& s) {
    bool ok = false;
    parse_ymd(s, ok);
    return ok;
}

std::vector<std::string> weekday_dates(const std::string& first, std::size_t count) {
    using namespace std::chrono;
    bool ok = false;
    auto ymd = parse_ymd(first, ok);
    if (!ok) throw ValidationError("weekday_dates: not an ISO-8601 date: " + first);
    sys_days day{ymd};
    std::vector<std::string> out;
    out.reserve(count);
    while (out.size() < count) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) out.push_back(format_ymd(year_month_day{day}));
        day += days{1};
    }
    return out;
}

void validate(const PricePanel& panel) {
    const auto n_assets = panel.num_assets();
    const auto n_dates = panel.num_dates();
    if (n_assets < 2) throw ValidationError("price panel needs at least 2 assets");
    if (n_dates < 2) throw ValidationError("price panel needs at least 2 dates");
    if (static_cast<Eigen::Index>(panel.asset_ids.size()) != n_assets)
        throw ValidationError("price panel: asset_ids length does not match rows");
    if (static_cast<Eigen::Index>(panel.dates.size()) != n_dates)
        throw ValidationError("price panel: dates length does not match columns");
    std::set<std::string> ids(panel.asset_ids.begin(), panel.asset_ids.end());
    if (static_cast<Eigen::Index>(ids.size()) != n_assets)
        throw ValidationError("price panel: duplicate asset ids");
    for (std::size_t t = 1; t < panel.dates.size(); ++t) {
        if (!(panel.dates[t - 1] < panel.dates[t]))
            throw ValidationError("price panel: dates not strictly increasing at " +
                                  panel.dates[t]);
    }
    for (Eigen::Index i = 0; i < n_assets; ++i) {
        for (Eigen::Index t = 0; t < n_dates; ++t) {
            const double p = panel.prices(i, t);
            if (!std::isfinite(p) || p <= 0.0)
                throw ValidationError("price panel: non-positive price for " +
                                      panel.asset_ids[i] + " on " + panel.dates[t]);
        }
    }
}

void validate(const ReturnPanel& panel) {
    const auto n_assets = panel.num_assets();
    const auto n = panel.num_samples();
    if (n < 2) throw ValidationError("return panel needs at least 2 periods");
    if (n_assets < 1) throw ValidationError("return panel has no assets");
    if (static_cast<Eigen::Index>(panel.asset_ids.size()) != n_assets)
        throw ValidationError("return panel: asset_ids length does not match rows");
    if (static_cast<Eigen::Index>(panel.dates.size()) != n)
        throw ValidationError("return panel: dates length does not match columns");
    if (!panel.returns.allFinite())
        throw ValidationError("return panel: non-finite entries");
    if (panel.demeaned) {
        for (Eigen::Index i = 0; i < n_assets; ++i) {
            const auto row = panel.returns.row(i);
            const double bound = 1e-10 * static_cast<double>(n) * row.cwiseAbs().maxCoeff();
            if (std::abs(row.sum()) > bound)
                throw ValidationError("return panel flagged demeaned but row " +
                                      panel.asset_ids[i] + " does not sum to zero");
        }
    }
}

PricePanel load_price_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open price file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);
    if (header.size() < 2 || header[0] != "date")
        throw ParseError(path.string() + ": header must be `date,<id1>,...,<idN>`");
    const std::vector<std::string> ids(header.begin() + 1, header.end());
    const std::size_t n_assets = ids.size();

    struct Row {
        std::string date;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != n_assets + 1)
            throw ParseError(path.string() + ": row " + std::to_string(row_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n_assets + 1));
        Row row;
        row.date = trim(fields[0]);
        if (!is_iso_date(row.date))
            throw ParseError(path.string() + ": " + cell_ref(row_no, 1, "date") +
                             ": not an ISO-8601 date: '" + row.date + "'");
        row.values.resize(n_assets);
        for (std::size_t j = 0; j < n_assets; ++j) {
            const std::string cell = trim(fields[j + 1]);
            const auto where = cell_ref(row_no, j + 2, ids[j]);
            if (cell.empty()) throw ParseError(path.string() + ": " + where + ": missing value");
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw ParseError(path.string() + ": " + where + ": not a number: '" + cell + "'");
            if (v <= 0.0)
                throw ParseError(path.string() + ": " + where + ": price must be positive, got " +
                                 cell);
            row.values[j] = v;
        }
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t t = 1; t < rows.size(); ++t) {
        if (rows[t].date == rows[t - 1].date)
            throw ValidationError(path.string() + ": duplicate date " + rows[t].date);
    }
    if (n_assets < 2) throw ValidationError(path.string() + ": need at least 2 assets");
    if (rows.size() < 2) throw ValidationError(path.string() + ": need at least 2 dates");

    PricePanel panel;
    panel.asset_ids = ids;
    panel.prices.resize(static_cast<Eigen::Index>(n_assets),
                        static_cast<Eigen::Index>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        panel.dates.push_back(rows[t].date);
        for (std::size_t j = 0; j < n_assets; ++j)
            panel.prices(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) =
                rows[t].values[j];
    }
    validate(panel);
    return panel;
}

void write_price_csv(const PricePanel& panel, const std::filesystem::path& path) {
    validate(panel);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "date";
    for (const auto& id : panel.asset_ids) out << ',' << id;
    out << '\n';
    for (Eigen::Index t = 0; t < panel.num_dates(); ++t) {
        out << panel.dates[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < panel.num_assets(); ++i) out << ',' << panel.prices(i, t);
        out << '\n';
    }
}

ReturnPanel log_returns(const PricePanel& panel) {
    validate(panel);
    const auto L = panel.num_dates() - 1;
    ReturnPanel out;
    out.asset_ids = panel.asset_ids;
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.returns = (panel.prices.rightCols(L).array() / panel.prices.leftCols(L).array()).log();
    out.demeaned = false;
    return out;
}

ReturnPanel demean(const ReturnPanel& panel) {
    if (panel.demeaned) throw UsageError("demean: panel is already demeaned");
    validate(panel);
    ReturnPanel out = panel;
    const Eigen::VectorXd mean = panel.returns.rowwise().mean();
    out.returns.colwise() -= mean;
    out.demeaned = true;
    return out;
}

Eigen::MatrixXd centered_samples(const ReturnPanel& panel) {
    if (panel.demeaned) return panel.returns;
    Eigen::MatrixXd x = panel.returns;
    x.colwise() -= panel.returns.rowwise().mean();
    return x;
}

RhoInterval admissible_rho_range(Eigen::Index num_assets, Eigen::Index num_samples, double eps) {
    if (num_assets < 2 || num_samples < 2)
        throw ValidationError("admissible_rho_range: need N >= 2 and n >= 2");
    if (!(eps > 0.0 && eps < 1.0))
        throw ValidationError("admissible_rho_range: eps must lie in (0, 1)");
    // Centring leaves n - 1 independent directions, which is what bounds rho.
    const double inv_c = static_cast<double>(num_samples - 1) / static_cast<double>(num_assets);
    const double lo = eps + std::max(0.0, 1.0 - inv_c);
    if (!(lo < 1.0))
        throw ValidationError("admissible_rho_range: empty interval, eps=" + std::to_string(eps) +
                              " too large for N=" + std::to_string(num_assets) +
                              ", n=" + std::to_string(num_samples));
    return {lo, 1.0};
}

}  // namespace stgmvp
