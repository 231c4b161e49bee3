#include "caviar/data.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace caviar::data {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool is_missing(std::string_view cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto ok = [](std::string_view part, auto& value) {
        for (char c : part)
            if (c < '0' || c > '9') return false;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        return ec == std::errc{} && ptr == part.data() + part.size();
    };
    if (!ok(text.substr(0, 4), y) || !ok(text.substr(5, 2), m) || !ok(text.substr(8, 2), d))
        return std::nullopt;
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

ReturnPanel::ReturnPanel(std::vector<Date> dates, std::vector<std::string> tickers,
                         Eigen::MatrixXd returns)
    : dates_(std::move(dates)), tickers_(std::move(tickers)), returns_(std::move(returns)) {
    if (dates_.size() < 2) throw EmptyPanelError("return panel needs at least 2 dates");
    if (tickers_.empty()) throw EmptyPanelError("return panel needs at least 1 asset");
    if (static_cast<std::size_t>(returns_.rows()) != dates_.size() ||
        static_cast<std::size_t>(returns_.cols()) != tickers_.size())
        throw DomainError("return matrix shape does not match dates x tickers");
    for (std::size_t t = 1; t < dates_.size(); ++t)
        if (!(dates_[t - 1] < dates_[t])) throw DomainError("panel dates must be strictly increasing");
    if (!returns_.allFinite()) throw DomainError("panel contains non-finite returns");
}

Series ReturnPanel::column(std::size_t j) const {
    if (j >= assets()) throw DomainError("asset index out of range");
    Series out(periods());
    for (std::size_t t = 0; t < periods(); ++t) out[t] = returns_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
    return out;
}

std::size_t ReturnPanel::index_of(const std::string& ticker) const {
    const auto it = std::find(tickers_.begin(), tickers_.end(), ticker);
    if (it == tickers_.end()) throw DomainError("unknown ticker: " + ticker);
    return static_cast<std::size_t>(it - tickers_.begin());
}

ReturnPanel ReturnPanel::slice(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > periods()) throw DomainError("invalid panel slice");
    std::vector<Date> d(dates_.begin() + static_cast<std::ptrdiff_t>(begin),
                        dates_.begin() + static_cast<std::ptrdiff_t>(end));
    return ReturnPanel(std::move(d), tickers_,
                       returns_.middleRows(static_cast<Eigen::Index>(begin),
                                           static_cast<Eigen::Index>(end - begin)));
}

RawTable parse_table(std::istream& in, char delimiter) {
    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("missing header row", 1);
    ++line_no;
    const auto header = split(line, delimiter);
    if (header.size() < 2) throw ParseError("header needs a date column and at least one ticker", line_no);
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw ParseError("empty ticker label in header", line_no);
        table.columns.emplace_back(header[j]);
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, delimiter);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             line_no);
        const auto date = parse_date(cells[0]);
        if (!date) throw ParseError("invalid date '" + std::string(cells[0]) + "'", line_no);
        if (!table.dates.empty() && !(table.dates.back() < *date))
            throw ParseError("dates must be strictly increasing", line_no);
        std::vector<std::optional<double>> row;
        row.reserve(cells.size() - 1);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            if (is_missing(cells[j])) {
                row.emplace_back(std::nullopt);
                continue;
            }
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), v);
            if (ec != std::errc{} || ptr != cells[j].data() + cells[j].size() || !std::isfinite(v))
                throw ParseError("malformed number '" + std::string(cells[j]) + "'", line_no);
            row.emplace_back(v);
        }
        table.dates.push_back(*date);
        table.rows.push_back(std::move(row));
    }
    return table;
}

RawTable align(const RawTable& table) {
    RawTable out;
    out.columns = table.columns;
    for (std::size_t t = 0; t < table.rows.size(); ++t) {
        const auto& row = table.rows[t];
        if (std::all_of(row.begin(), row.end(), [](const auto& c) { return c.has_value(); })) {
            out.dates.push_back(table.dates[t]);
            out.rows.push_back(row);
        }
    }
    return out;
}

Series log_returns(std::span<const double> prices) {
    Series out;
    if (prices.size() < 2) return out;
    out.reserve(prices.size() - 1);
    for (std::size_t t = 0; t < prices.size(); ++t)
        if (!(prices[t] > 0.0)) throw DomainError("prices must be positive");
    for (std::size_t t = 1; t < prices.size(); ++t) out.push_back(100.0 * std::log(prices[t] / prices[t - 1]));
    return out;
}

ReturnPanel to_panel(const RawTable& raw, ValueKind kind) {
    const RawTable table = align(raw);
    if (table.dates.size() < 2)
        throw EmptyPanelError("fewer than 2 dates common to all tickers");
    const auto n = static_cast<Eigen::Index>(table.columns.size());
    if (kind == ValueKind::Returns) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(table.dates.size()), n);
        for (std::size_t t = 0; t < table.rows.size(); ++t)
            for (Eigen::Index j = 0; j < n; ++j) m(static_cast<Eigen::Index>(t), j) = *table.rows[t][static_cast<std::size_t>(j)];
        return ReturnPanel(table.dates, table.columns, std::move(m));
    }
    if (table.dates.size() < 3)
        throw EmptyPanelError("price input needs at least 3 common dates to yield 2 returns");
    const auto periods = table.dates.size() - 1;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(periods), n);
    Series prices(table.rows.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        for (std::size_t t = 0; t < table.rows.size(); ++t) prices[t] = *table.rows[t][static_cast<std::size_t>(j)];
        const auto r = log_returns(prices);
        for (std::size_t t = 0; t < periods; ++t) m(static_cast<Eigen::Index>(t), j) = r[t];
    }
    return ReturnPanel(std::vector<Date>(table.dates.begin() + 1, table.dates.end()), table.columns,
                       std::move(m));
}

ReturnPanel read_panel(std::istream& in, const FormatConfig& config) {
    return to_panel(parse_table(in, config.delimiter), config.kind);
}

ReturnPanel load_panel(const std::filesystem::path& path, const FormatConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return read_panel(in, config);
}

void OhlcSeries::validate() const {
    const auto n = dates.size();
    if (open.size() != n || high.size() != n || low.size() != n || close.size() != n)
        throw DomainError("OHLC series lengths differ");
    for (std::size_t t = 0; t < n; ++t) {
        if (!(open[t] > 0.0 && high[t] > 0.0 && low[t] > 0.0 && close[t] > 0.0))
            throw DomainError("OHLC prices must be positive");
        if (low[t] > std::min(open[t], close[t]) || std::max(open[t], close[t]) > high[t])
            throw DomainError("OHLC bar violates low <= open,close <= high on " + format_date(dates[t]));
    }
}

OhlcSeries load_ohlc(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    const RawTable table = parse_table(in, ',');
    if (table.columns.size() != 4) throw ParseError("OHLC file needs columns open,high,low,close", 1);
    OhlcSeries s;
    for (std::size_t t = 0; t < table.rows.size(); ++t) {
        const auto& row = table.rows[t];
        if (!std::all_of(row.begin(), row.end(), [](const auto& c) { return c.has_value(); }))
            throw ParseError("missing OHLC value", t + 2);
        s.dates.push_back(table.dates[t]);
        s.open.push_back(*row[0]);
        s.high.push_back(*row[1]);
        s.low.push_back(*row[2]);
        s.close.push_back(*row[3]);
    }
    s.validate();
    return s;
}

Series garman_klass(const OhlcSeries& s) {
    s.validate();
    const double k = 2.0 * std::log(2.0) - 1.0;
    Series out(s.dates.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double hl = std::log(s.high[t] / s.low[t]);
        const double co = std::log(s.close[t] / s.open[t]);
        out[t] = std::max(0.0, 0.5 * hl * hl - k * co * co);
    }
    return out;
}

}  // namespace caviar::data
