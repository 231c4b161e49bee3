#pragma once

#include "caviar/estimation.hpp"
#include "caviar/forecast.hpp"
#include "caviar/mcs.hpp"
#include "caviar/models.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace caviar::app {

enum ExitCode : int {
    kSuccess = 0,
    kValidationError = 2,
    kEstimationFailure = 3,
    kIoError = 4,
};

/// Invalid run configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::filesystem::path panel;
    data::ValueKind format = data::ValueKind::Prices;
    std::filesystem::path weights;  // optional precomputed weights CSV
    double tau = 0.05;
    double alpha = 0.10;
    std::vector<models::Variant> variants{models::Variant::SAV, models::Variant::AS, models::Variant::IG};
    std::vector<models::Mode> modes{models::Mode::Baseline, models::Mode::SE, models::Mode::X};
    models::ComponentLag component_lag = models::ComponentLag::Own;
    bool signed_phi1 = false;
    estimation::OptimizerConfig optimizer;
    forecast::RollingConfig rolling;
    mcs::McsConfig bootstrap;
    std::size_t dq_lags = 4;
    double quantilogram_tau = 0.05;
    int quantilogram_lag = 1;
    std::uint64_t seed = 20080319;
    unsigned threads = 1;
    std::filesystem::path output_dir = "caviar_out";

    /// Throws ValidationError. Checks ranges and that referenced paths exist.
    void validate() const;
    [[nodiscard]] models::ModelSpec spec(models::Variant v, models::Mode m) const;
    /// Optimizer and bootstrap configs with the master seed and thread count applied.
    [[nodiscard]] estimation::OptimizerConfig optimizer_config() const;
    [[nodiscard]] mcs::McsConfig mcs_config() const;
};

/// Reads a JSON config; unknown keys are a ValidationError.
RunConfig load_config(const std::filesystem::path& file);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

enum class Subcommand { Select, Quantilogram, Estimate, Backtest, Forecast, Mcs, Pipeline };
Subcommand parse_subcommand(std::string_view s);
std::string to_string(Subcommand s);

/**
 * Runs one subcommand, writing its artifacts and a manifest_<name>.json into
 * config.output_dir. Returns an ExitCode; errors are also written to
 * error_<name>.json. Never throws.
 */
int run(Subcommand cmd, const RunConfig& config);

}  // namespace caviar::app
