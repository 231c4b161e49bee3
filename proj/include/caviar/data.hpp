#pragma once

#include "caviar/common.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace caviar::data {

using Date = std::chrono::year_month_day;

/// Parses a strict `YYYY-MM-DD` date (surrounding whitespace ignored); returns
/// nullopt on any other deviation.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& d);

/**
 * Date-aligned T x N matrix of daily returns in percent (100 x log-return).
 *
 * Immutable once constructed. The constructor enforces the panel invariants:
 * T >= 2, N >= 1, strictly increasing dates, one label per column and finite
 * entries everywhere.
 */
class ReturnPanel {
public:
    ReturnPanel(std::vector<Date> dates, std::vector<std::string> tickers, Eigen::MatrixXd returns);

    [[nodiscard]] std::size_t periods() const noexcept { return dates_.size(); }
    [[nodiscard]] std::size_t assets() const noexcept { return tickers_.size(); }
    [[nodiscard]] const std::vector<Date>& dates() const noexcept { return dates_; }
    [[nodiscard]] const std::vector<std::string>& tickers() const noexcept { return tickers_; }
    [[nodiscard]] const Eigen::MatrixXd& returns() const noexcept { return returns_; }

    [[nodiscard]] Series column(std::size_t j) const;
    /// Index of a ticker label; throws DomainError when absent.
    [[nodiscard]] std::size_t index_of(const std::string& ticker) const;
    /// Rows [begin, end) as a new panel.
    [[nodiscard]] ReturnPanel slice(std::size_t begin, std::size_t end) const;

private:
    std::vector<Date> dates_;
    std::vector<std::string> tickers_;
    Eigen::MatrixXd returns_;
};

enum class ValueKind { Prices, Returns };

struct FormatConfig {
    ValueKind kind = ValueKind::Prices;
    char delimiter = ',';
};

/// Wide date-keyed table as read from disk. Missing cells are nullopt.
struct RawTable {
    std::vector<Date> dates;
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;
};

RawTable parse_table(std::istream& in, char delimiter = ',');

/// Inner join on dates: keeps only rows where every column is present.
/// Applying it to an already aligned table returns an identical table.
RawTable align(const RawTable& table);

/// 100 x log(p_t / p_{t-1}); one element shorter than `prices`.
/// Throws DomainError on a nonpositive price.
Series log_returns(std::span<const double> prices);

/// Builds a panel from a table. Prices become 100 x log(p_t / p_{t-1}) over
/// consecutive aligned dates; returns are taken as-is.
ReturnPanel to_panel(const RawTable& table, ValueKind kind);

ReturnPanel load_panel(const std::filesystem::path& path, const FormatConfig& config = {});
ReturnPanel read_panel(std::istream& in, const FormatConfig& config = {});

/// Daily open/high/low/close bars for one asset.
struct OhlcSeries {
    std::vector<Date> dates;
    Series open, high, low, close;

    /// Throws DomainError on nonpositive prices or a bar that violates
    /// low <= min(open, close) <= max(open, close) <= high.
    void validate() const;
};

/// CSV with header `date,open,high,low,close`.
OhlcSeries load_ohlc(const std::filesystem::path& path);

/// Garman-Klass daily variance 0.5 ln(H/L)^2 - (2 ln 2 - 1) ln(C/O)^2,
/// clamped at zero.
Series garman_klass(const OhlcSeries& s);

}  // namespace caviar::data
