#include "caviar/report.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

namespace caviar::report {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("malformed number '" + s + "'", line);
    return v;
}

data::Date parse_date_or_throw(const std::string& s, std::size_t line) {
    const auto d = data::parse_date(s);
    if (!d) throw ParseError("invalid date '" + s + "'", line);
    return *d;
}

std::ifstream open_in(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::ios_base::failure("cannot open " + file.string());
    return in;
}

}  // namespace

std::string artifact_name(const std::string& target, const models::ModelSpec& spec, const std::string& artifact,
                          const std::string& ext) {
    return target + "_" + models::to_string(spec.variant) + "_" + models::to_string(spec.mode) + "_" + artifact +
           "." + ext;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::string hex;
    static constexpr char digits[] = "0123456789abcdef";
    for (unsigned i = 0; i < len; ++i) {
        hex.push_back(digits[md[i] >> 4]);
        hex.push_back(digits[md[i] & 15]);
    }
    return hex;
}

void write_path_csv(std::ostream& out, const std::vector<data::Date>& dates, const models::QuantilePath& path) {
    if (dates.size() != path.size()) throw DomainError("dates and path differ in length");
    out << "date,var,es,qp,qs\n";
    for (std::size_t t = 0; t < dates.size(); ++t)
        out << data::format_date(dates[t]) << ',' << fmt(path.var[t]) << ',' << fmt(path.es[t]) << ','
            << fmt(path.qp[t]) << ',' << fmt(path.qs[t]) << '\n';
}

DatedPath read_path_csv(const std::filesystem::path& file) {
    auto in = open_in(file);
    std::string line;
    std::size_t n = 1;
    if (!std::getline(in, line) || split_line(line) != std::vector<std::string>{"date", "var", "es", "qp", "qs"})
        throw ParseError("path file needs header date,var,es,qp,qs", 1);
    DatedPath out;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto c = split_line(line);
        if (c.size() != 5) throw ParseError("expected 5 fields", n);
        out.dates.push_back(parse_date_or_throw(c[0], n));
        out.path.var.push_back(parse_double(c[1], n));
        out.path.es.push_back(parse_double(c[2], n));
        out.path.qp.push_back(parse_double(c[3], n));
        out.path.qs.push_back(parse_double(c[4], n));
    }
    for (std::size_t t = 0; t < out.path.size(); ++t)
        if (out.path.feasible && !(out.path.var[t] < 0.0)) {
            out.path.feasible = false;
            out.path.first_infeasible = t;
        }
    return out;
}

void write_weights_csv(std::ostream& out, const std::vector<std::string>& tickers,
                       const std::vector<selection::SpilloverWeights>& weights) {
    out << "target,source,weight\n";
    for (const auto& w : weights)
        for (std::size_t k = 0; k < w.sources.size(); ++k)
            out << tickers.at(w.target) << ',' << tickers.at(w.sources[k]) << ',' << fmt(w.weights[k]) << '\n';
}

std::vector<selection::SpilloverWeights> read_weights_csv(const std::filesystem::path& file,
                                                          const std::vector<std::string>& tickers) {
    auto in = open_in(file);
    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < tickers.size(); ++j) index[tickers[j]] = j;
    std::vector<selection::SpilloverWeights> out(tickers.size());
    for (std::size_t j = 0; j < tickers.size(); ++j) out[j].target = j;
    std::string line;
    std::size_t n = 1;
    if (!std::getline(in, line) || split_line(line) != std::vector<std::string>{"target", "source", "weight"})
        throw ParseError("weights file needs header target,source,weight", 1);
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto c = split_line(line);
        if (c.size() != 3) throw ParseError("expected 3 fields", n);
        const auto t = index.find(c[0]), s = index.find(c[1]);
        if (t == index.end() || s == index.end()) throw ParseError("unknown ticker in weights file", n);
        out[t->second].sources.push_back(s->second);
        out[t->second].weights.push_back(parse_double(c[2], n));
    }
    return out;
}

json to_json(const selection::SelectionTrace& trace, const std::vector<std::string>& tickers) {
    json steps = json::array();
    for (const auto& s : trace.steps)
        steps.push_back({{"candidate", tickers.at(s.candidate)},
                         {"correlation", s.correlation},
                         {"p_value", s.p_value},
                         {"adjusted_r2", s.adjusted_r2},
                         {"accepted", s.accepted}});
    return {{"target", tickers.at(trace.target)}, {"steps", steps}, {"stop_reason", trace.stop_reason}};
}

json to_json(const estimation::FitResult& fit, const std::string& target) {
    json params = json::object();
    const auto names = models::parameter_names(fit.spec);
    const auto values = models::pack(fit.spec, fit.params);
    for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = values[i];
    json j = {{"target", target},
              {"model", fit.spec.id()},
              {"variant", models::to_string(fit.spec.variant)},
              {"mode", models::to_string(fit.spec.mode)},
              {"tau", fit.spec.tau},
              {"component_lag", models::to_string(fit.spec.component_lag)},
              {"params", params},
              {"loss", fit.loss},
              {"best_start_loss", fit.best_start_loss},
              {"starts_tried", fit.starts_tried},
              {"converged", fit.converged},
              {"metadata", fit.metadata}};
    if (fit.spec.mode == models::Mode::SE) {
        const auto share = models::spillover_share(fit.path);
        double acc = 0.0;
        std::size_t n = 0;
        for (double v : share)
            if (std::isfinite(v)) {
                acc += v;
                ++n;
            }
        j["mean_spillover_share"] = n ? acc / static_cast<double>(n) : 0.0;
    }
    return j;
}

void write_quantilogram_csv(std::ostream& out, const std::vector<std::string>& tickers, const Eigen::MatrixXd& m) {
    out << "receiver";
    for (const auto& t : tickers) out << ',' << t;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << tickers.at(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << fmt(m(i, j));
        out << '\n';
    }
}

void write_backtest_csv(std::ostream& out, const std::vector<BacktestRow>& rows) {
    out << "asset,model,violation_rate,uc_stat,uc_p,cc_stat,cc_p,dq_stat,dq_p,dq_lags,dq_dof,dq_degenerate\n";
    for (const auto& r : rows) {
        const auto& b = r.report;
        out << r.asset << ',' << r.model << ',' << fmt(b.violation_rate) << ',' << fmt(b.uc.stat) << ','
            << fmt(b.uc.p_value) << ',' << fmt(b.cc.stat) << ',' << fmt(b.cc.p_value) << ',' << fmt(b.dq.stat)
            << ',' << fmt(b.dq.p_value) << ',' << b.dq.lags << ',' << b.dq.dof << ',' << (b.dq.degenerate ? 1 : 0)
            << '\n';
    }
}

void write_forecast_csv(std::ostream& out, const std::vector<forecast::ForecastRecord>& records) {
    out << "date,target,model,var,es,realized,fz0,hit,spillover_coefficient,refit,carried\n";
    for (const auto& r : records)
        out << data::format_date(r.date) << ',' << r.target << ',' << r.model << ',' << fmt(r.var) << ','
            << fmt(r.es) << ',' << fmt(r.realized) << ',' << fmt(r.fz0) << ',' << r.hit << ','
            << fmt(r.spillover_coefficient) << ',' << (r.refit ? 1 : 0) << ',' << (r.carried ? 1 : 0) << '\n';
}

std::vector<forecast::ForecastRecord> read_forecast_csv(const std::filesystem::path& file) {
    auto in = open_in(file);
    std::string line;
    std::size_t n = 1;
    if (!std::getline(in, line) || split_line(line).size() != 11 || split_line(line)[0] != "date")
        throw ParseError("forecast file has an unexpected header", 1);
    std::vector<forecast::ForecastRecord> out;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto c = split_line(line);
        if (c.size() != 11) throw ParseError("expected 11 fields", n);
        forecast::ForecastRecord r;
        r.date = parse_date_or_throw(c[0], n);
        r.target = c[1];
        r.model = c[2];
        r.var = parse_double(c[3], n);
        r.es = parse_double(c[4], n);
        r.realized = parse_double(c[5], n);
        r.fz0 = parse_double(c[6], n);
        r.hit = c[7] == "1" ? 1 : 0;
        r.spillover_coefficient = parse_double(c[8], n);
        r.refit = c[9] == "1";
        r.carried = c[10] == "1";
        out.push_back(std::move(r));
    }
    return out;
}

void write_mcs_csv(std::ostream& out, const std::vector<std::string>& model_order, const std::vector<McsRow>& rows) {
    out << "asset";
    for (const auto& m : model_order) out << ',' << m;
    for (const auto& m : model_order) out << ',' << m << "_in_set";
    out << '\n';
    for (const auto& row : rows) {
        out << row.asset;
        const auto& res = row.result;
        auto position = [&](const std::string& m) -> std::optional<std::size_t> {
            const auto it = std::find(res.models.begin(), res.models.end(), m);
            if (it == res.models.end()) return std::nullopt;
            return static_cast<std::size_t>(it - res.models.begin());
        };
        for (const auto& m : model_order) {
            const auto k = position(m);
            out << ',' << (k ? fmt(res.p_values[*k]) : "");
        }
        for (const auto& m : model_order) {
            const auto k = position(m);
            out << ',' << (k ? (res.survives(*k) ? "1" : "0") : "");
        }
        out << '\n';
    }
}

}  // namespace caviar::report
