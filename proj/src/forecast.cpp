#include "caviar/forecast.hpp"

#include <limits>

namespace caviar::forecast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using models::ParamVector;

// Filters a window with frozen parameters and takes one more step.
models::FilterState next_state(const models::ModelSpec& spec, const ParamVector& p, std::span<const double> r,
                               std::optional<std::span<const double>> proxy, const models::InitRule& init) {
    const auto path = models::filter(spec, p, r, proxy, init);
    const auto last = path.size() - 1;
    const models::FilterState state{path.var[last], path.qp[last], path.qs[last]};
    return models::advance(spec, p, state, r[last], proxy ? (*proxy)[last] : 0.0);
}

}  // namespace

std::size_t RollingConfig::origins(std::size_t periods) const {
    if (window < 2) throw DomainError("rolling window must hold at least 2 observations");
    if (step == 0) throw DomainError("rolling step must be positive");
    if (periods <= window) throw DomainError("panel too short for the rolling window plus one forecast");
    const auto n = (periods - window) / step;
    if (n == 0) throw DomainError("panel too short for one forecast at this step");
    return n;
}

ForecastRun rolling_forecast(const data::ReturnPanel& panel, const models::ModelSpec& spec,
                             const std::vector<selection::SpilloverWeights>& weights_by_target,
                             const RollingConfig& rolling, const estimation::OptimizerConfig& opt) {
    const auto n_assets = panel.assets();
    if (weights_by_target.size() != n_assets) throw DomainError("need spillover weights for every asset");
    const auto count = rolling.origins(panel.periods());

    models::ModelSpec base_spec = spec;
    base_spec.mode = models::Mode::Baseline;
    const bool spillover_mode = spec.mode != models::Mode::Baseline;

    std::vector<Series> columns(n_assets);
    for (std::size_t j = 0; j < n_assets; ++j) columns[j] = panel.column(j);

    std::vector<std::optional<ParamVector>> base_params(n_assets), spill_params(n_assets);
    std::size_t fit_start = 0;

    ForecastRun run;
    run.spec = spec;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t origin = rolling.window + k * rolling.step;
        const std::size_t begin = origin - rolling.window;
        const bool due = k == 0 || (rolling.refit_every > 0 && k % rolling.refit_every == 0);
        std::vector<bool> carried(n_assets, false);

        if (due) {
            estimation::OptimizerConfig cfg = opt;
            cfg.seed = derive_seed(opt.seed, SeedStream::ForecastWindow, k);
            estimation::UniverseWarmStart warm{base_params, spill_params};
            const auto fit = estimation::fit_universe(panel.slice(begin, origin), spec, weights_by_target, cfg,
                                                      rolling.warm_start ? &warm : nullptr);
            for (std::size_t j = 0; j < n_assets; ++j)
                if (fit.baseline[j]) base_params[j] = fit.baseline[j]->params;
            for (std::size_t i = 0; i < n_assets; ++i) {
                const bool uses_proxy = spillover_mode && !weights_by_target[i].empty();
                auto it = fit.fits.find(i);
                if (it != fit.fits.end()) {
                    if (uses_proxy) spill_params[i] = it->second.params;
                    continue;
                }
                carried[i] = true;
                ++run.carried_failures;
            }
            fit_start = begin;
            ++run.refits;
        }

        const std::size_t len = origin - fit_start;
        for (std::size_t i = 0; i < n_assets; ++i) {
            const auto& w = weights_by_target[i];
            const bool uses_proxy = spillover_mode && !w.empty();
            const std::span<const double> r_i(columns[i].data() + fit_start, len);

            bool sources_ready = true;
            for (auto s : w.sources) sources_ready = sources_ready && base_params[s].has_value();
            if (uses_proxy && (!spill_params[i] || !sources_ready))
                throw EstimationError("no spillover parameters available for " + panel.tickers()[i] + " at " +
                                      data::format_date(panel.dates()[origin]));
            if (!uses_proxy && !base_params[i])
                throw EstimationError("no baseline parameters available for " + panel.tickers()[i] + " at " +
                                      data::format_date(panel.dates()[origin]));

            models::FilterState next;
            double coefficient = kNaN;
            if (uses_proxy) {
                Eigen::MatrixXd source_var = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(n_assets));
                for (auto s : w.sources) {
                    const std::span<const double> r_s(columns[s].data() + fit_start, len);
                    const auto path = models::filter(base_spec, *base_params[s], r_s, std::nullopt, opt.init);
                    for (std::size_t t = 0; t < len; ++t) source_var(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = path.var[t];
                }
                const Series proxy = models::build_proxy(source_var, w);
                next = next_state(spec, *spill_params[i], r_i, std::span<const double>(proxy), opt.init);
                coefficient = spec.mode == models::Mode::SE ? spill_params[i]->phi2 : spill_params[i]->beta_s;
            } else {
                next = next_state(base_spec, *base_params[i], r_i, std::nullopt, opt.init);
            }
            const ParamVector& p = uses_proxy ? *spill_params[i] : *base_params[i];

            ForecastRecord rec;
            rec.date = panel.dates()[origin];
            rec.target = panel.tickers()[i];
            rec.model = spec.id();
            rec.var = next.var;
            rec.es = (1.0 + std::exp(p.gamma)) * next.var;
            rec.realized = columns[i][origin];
            rec.hit = rec.realized <= rec.var ? 1 : 0;
            rec.fz0 = rec.es < 0.0 ? estimation::forecast_score(opt.loss, rec.var, rec.es, rec.realized, spec.tau) : kNaN;
            rec.spillover_coefficient = coefficient;
            rec.refit = due && !carried[i];
            rec.carried = carried[i];
            run.by_target[i].push_back(rec);
        }
    }
    run.metadata["loss"] = estimation::to_string(opt.loss);
    run.metadata["window"] = std::to_string(rolling.window);
    run.metadata["step"] = std::to_string(rolling.step);
    run.metadata["refit_every"] = rolling.refit_every == 0 ? "once" : std::to_string(rolling.refit_every);
    run.metadata["warm_start"] = rolling.warm_start ? "true" : "false";
    run.metadata["stage1_reestimated"] = "every refit";
    run.metadata["refits"] = std::to_string(run.refits);
    run.metadata["carried_failures"] = std::to_string(run.carried_failures);
    return run;
}

}  // namespace caviar::forecast
