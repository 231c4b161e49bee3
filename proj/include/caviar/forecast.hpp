#pragma once

#include "caviar/data.hpp"
#include "caviar/estimation.hpp"

#include <map>
#include <string>
#include <vector>

namespace caviar::forecast {

struct RollingConfig {
    std::size_t window = 3974;
    std::size_t step = 1;
    /// Re-estimate every `refit_every` forecast origins; 0 fits once at the first origin.
    std::size_t refit_every = 1;
    /// Seed each re-estimation with the previous window's optimum.
    bool warm_start = true;

    /// Number of forecast origins floor((T - window) / step); throws when zero.
    [[nodiscard]] std::size_t origins(std::size_t periods) const;
};

struct ForecastRecord {
    data::Date date;
    std::string target;
    std::string model;
    double var = 0.0;
    double es = 0.0;
    double realized = 0.0;
    double fz0 = 0.0;
    int hit = 0;
    /// phi2 (SE) or beta_s (X) in effect; NaN for Baseline forecasts.
    double spillover_coefficient = 0.0;
    /// Parameters were re-estimated at this origin.
    bool refit = false;
    /// Estimation failed here and the previous parameters were reused.
    bool carried = false;
};

struct ForecastRun {
    models::ModelSpec spec;
    std::map<std::size_t, std::vector<ForecastRecord>> by_target;
    std::size_t refits = 0;
    std::size_t carried_failures = 0;
    std::map<std::string, std::string> metadata;
};

/**
 * Rolling fixed-window one-step-ahead VaR/ES forecasts for every asset.
 *
 * At origin e the window is rows [e - window, e). When a refit is due the
 * whole universe is re-estimated on the window (stage 1 and stage 2); the
 * forecast for row e is one extra recursion step from the filtered window
 * using r_{e-1} and, for SE/X targets, the proxy value at e - 1 built from the
 * sources' stage-1 VaRs. Nothing at or after row e is read before the
 * forecast for e is formed.
 */
ForecastRun rolling_forecast(const data::ReturnPanel& panel, const models::ModelSpec& spec,
                             const std::vector<selection::SpilloverWeights>& weights_by_target,
                             const RollingConfig& rolling, const estimation::OptimizerConfig& opt);

}  // namespace caviar::forecast
