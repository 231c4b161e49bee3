#pragma once

#include "caviar/backtest.hpp"
#include "caviar/data.hpp"
#include "caviar/estimation.hpp"
#include "caviar/forecast.hpp"
#include "caviar/mcs.hpp"
#include "caviar/selection.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace caviar::report {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

/// `{target}_{variant}_{mode}_{artifact}.csv` (or another extension).
std::string artifact_name(const std::string& target, const models::ModelSpec& spec,
                          const std::string& artifact, const std::string& ext = "csv");

/// Shortest round-trip decimal representation.
std::string fmt(double v);

std::string sha256_file(const std::filesystem::path& path);

// Quantile paths: date,var,es,qp,qs
void write_path_csv(std::ostream& out, const std::vector<data::Date>& dates, const models::QuantilePath& path);
struct DatedPath {
    std::vector<data::Date> dates;
    models::QuantilePath path;
};
DatedPath read_path_csv(const std::filesystem::path& file);

// Spillover weights: target,source,weight; targets without sources have no rows.
void write_weights_csv(std::ostream& out, const std::vector<std::string>& tickers,
                       const std::vector<selection::SpilloverWeights>& weights);
std::vector<selection::SpilloverWeights> read_weights_csv(const std::filesystem::path& file,
                                                          const std::vector<std::string>& tickers);

json to_json(const selection::SelectionTrace& trace, const std::vector<std::string>& tickers);
json to_json(const estimation::FitResult& fit, const std::string& target);

void write_quantilogram_csv(std::ostream& out, const std::vector<std::string>& tickers, const Eigen::MatrixXd& m);

struct BacktestRow {
    std::string asset;
    std::string model;
    backtest::BacktestReport report;
};
void write_backtest_csv(std::ostream& out, const std::vector<BacktestRow>& rows);

void write_forecast_csv(std::ostream& out, const std::vector<forecast::ForecastRecord>& records);
std::vector<forecast::ForecastRecord> read_forecast_csv(const std::filesystem::path& file);

struct McsRow {
    std::string asset;
    mcs::McsResult result;
};
/// One row per asset, one p-value column and one survivor-flag column per model.
void write_mcs_csv(std::ostream& out, const std::vector<std::string>& model_order, const std::vector<McsRow>& rows);

}  // namespace caviar::report
