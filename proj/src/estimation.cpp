#include "caviar/estimation.hpp"

#include "caviar/optim.hpp"

#include <limits>
#include <numeric>
#include <sstream>

namespace caviar::estimation {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
    return os.str();
}

struct Candidate {
    std::vector<double> x;
    double loss;
};

}  // namespace

double al_fz_loss(std::span<const double> var, std::span<const double> es, std::span<const double> r,
                  double tau) {
    if (var.size() != es.size() || var.size() != r.size())
        throw DomainError("loss inputs differ in length");
    double total = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        if (!(es[t] < 0.0)) return kInf;
        const double hit = r[t] <= var[t] ? 1.0 : 0.0;
        total += (hit - tau) / es[t] * (var[t] - r[t]) + var[t] / es[t] + std::log(-es[t]) - 1.0;
    }
    return total;
}

double fz0_loss(double var, double es, double r, double tau) {
    if (!(es < 0.0)) throw DomainError("FZ0 loss needs ES < 0");
    const double hit = r <= var ? 1.0 : 0.0;
    return 1.0 / (tau * es) * hit * (var - r) + var / es + std::log(-es) - 1.0;
}

double fz_score(double var, double es, double r, double tau) {
    if (!(es < 0.0)) throw DomainError("FZ0 loss needs ES < 0");
    const double hit = r <= var ? 1.0 : 0.0;
    return -hit * (var - r) / (tau * es) + var / es + std::log(-es) - 1.0;
}

double fz_loss(std::span<const double> var, std::span<const double> es, std::span<const double> r, double tau) {
    if (var.size() != es.size() || var.size() != r.size())
        throw DomainError("loss inputs differ in length");
    double total = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        if (!(es[t] < 0.0)) return kInf;
        total += fz_score(var[t], es[t], r[t], tau);
    }
    return total;
}

std::string to_string(LossForm f) { return f == LossForm::Consistent ? "consistent" : "printed"; }

LossForm parse_loss_form(std::string_view s) {
    if (s == "consistent") return LossForm::Consistent;
    if (s == "printed") return LossForm::Printed;
    throw DomainError("loss form must be 'consistent' or 'printed'");
}

double joint_loss(LossForm form, std::span<const double> var, std::span<const double> es, std::span<const double> r,
                  double tau) {
    return form == LossForm::Consistent ? fz_loss(var, es, r, tau) : al_fz_loss(var, es, r, tau);
}

double forecast_score(LossForm form, double var, double es, double r, double tau) {
    return form == LossForm::Consistent ? fz_score(var, es, r, tau) : fz0_loss(var, es, r, tau);
}

std::vector<Box> start_boxes(const models::ModelSpec& spec) {
    using models::Mode;
    using models::Variant;
    const bool ig = spec.variant == Variant::IG;
    std::vector<Box> boxes{ig ? Box{0.0, 1.0} : Box{-1.0, 1.0}, Box{0.5, 0.999},
                           ig ? Box{0.0, 1.0} : Box{-1.0, 1.0}};
    if (spec.variant == Variant::AS) boxes.push_back({-1.0, 1.0});
    boxes.push_back({-2.0, 0.0});
    if (spec.mode == Mode::SE) {
        boxes.push_back({0.0, 0.5});
        boxes.push_back({0.0, 1.5});
    } else if (spec.mode == Mode::X) {
        boxes.push_back(ig ? Box{0.0, 1.5} : Box{-1.5, 1.5});
    }
    return boxes;
}

void OptimizerConfig::validate() const {
    if (n_random_starts == 0) throw DomainError("n_random_starts must be positive");
    if (n_best_refined > n_random_starts) throw DomainError("n_best_refined must not exceed n_random_starts");
    if (!(simplex_tolerance > 0.0)) throw DomainError("simplex tolerance must be positive");
    if (max_iterations == 0) throw DomainError("max_iterations must be positive");
    if (draws_per_start == 0) throw DomainError("draws_per_start must be positive");
}

double objective(const models::ModelSpec& spec, const models::ParamVector& p, std::span<const double> r,
                 std::optional<std::span<const double>> proxy, const models::InitRule& init, LossForm form) {
    if (models::constraint_violation(spec, p)) return kInf;
    try {
        const auto path = models::filter(spec, p, r, proxy, init);
        if (!path.feasible) return kInf;
        return joint_loss(form, path.var, path.es, r, spec.tau);
    } catch (const InfeasiblePathError&) {
        return kInf;
    }
}

FitResult estimate(const models::ModelSpec& spec, std::span<const double> r,
                   std::optional<std::span<const double>> proxy, const OptimizerConfig& config,
                   std::span<const models::ParamVector> warm_starts) {
    config.validate();
    if (!(spec.tau > 0.0 && spec.tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
    if (spec.mode != models::Mode::Baseline && !proxy)
        throw DomainError(spec.id() + " estimation requires a spillover proxy");
    if (proxy && proxy->size() != r.size()) throw DomainError("proxy length differs from return length");
    if (r.size() < 2) throw DomainError("estimation needs at least 2 observations");

    const auto boxes = start_boxes(spec);
    const auto dim = boxes.size();
    auto f = [&](std::span<const double> x) {
        return objective(spec, models::unpack(spec, x), r, proxy, config.init, config.loss);
    };

    // Each start owns a derived RNG stream, so thread count cannot change results.
    std::vector<std::optional<Candidate>> starts(config.n_random_starts);
    parallel_for(config.n_random_starts, config.threads, [&](std::size_t i) {
        Rng rng(derive_seed(config.seed, SeedStream::RandomStart, i));
        std::vector<double> x(dim);
        for (std::size_t attempt = 0; attempt < config.draws_per_start; ++attempt) {
            for (std::size_t j = 0; j < dim; ++j) x[j] = rng.uniform(boxes[j].lo, boxes[j].hi);
            const double v = f(x);
            if (std::isfinite(v)) {
                starts[i] = Candidate{x, v};
                return;
            }
        }
    });

    std::vector<Candidate> pool;
    for (auto& s : starts)
        if (s) pool.push_back(std::move(*s));
    const std::size_t feasible_random = pool.size();
    std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.loss < b.loss; });
    const double best_start = pool.empty() ? kInf : pool.front().loss;
    pool.resize(std::min(pool.size(), std::max<std::size_t>(config.n_best_refined, 1)));

    std::size_t warm_used = 0;
    for (const auto& w : warm_starts) {
        auto x = models::pack(spec, w);
        const double v = f(x);
        if (std::isfinite(v)) {
            pool.push_back({std::move(x), v});
            ++warm_used;
        }
    }
    if (pool.empty())
        throw EstimationError(spec.id() + ": no feasible starting point among " +
                              std::to_string(config.n_random_starts * config.draws_per_start) + " draws");
    double best_seed = kInf;
    for (const auto& c : pool) best_seed = std::min(best_seed, c.loss);

    std::vector<double> steps(dim);
    for (std::size_t j = 0; j < dim; ++j) steps[j] = 0.05 * (boxes[j].hi - boxes[j].lo);
    const optim::NelderMeadOptions nm{config.simplex_tolerance, config.max_iterations};

    std::vector<optim::NelderMeadResult> refined(pool.size());
    parallel_for(pool.size(), config.threads, [&](std::size_t i) {
        auto res = optim::nelder_mead(f, pool[i].x, steps, nm);
        for (std::size_t round = 0; round < config.max_restarts; ++round) {
            auto again = optim::nelder_mead(f, res.x, steps, nm);
            const bool better = again.value < res.value - 1e-10 * (1.0 + std::abs(res.value));
            if (again.value <= res.value) {
                again.iterations += res.iterations;
                again.evaluations += res.evaluations;
                res = std::move(again);
            }
            if (!better) break;
        }
        refined[i] = std::move(res);
    });

    std::size_t winner = 0;
    for (std::size_t i = 1; i < refined.size(); ++i)
        if (refined[i].value < refined[winner].value) winner = i;

    FitResult fit;
    fit.spec = spec;
    fit.params = models::unpack(spec, refined[winner].x);
    fit.path = models::filter(spec, fit.params, r, proxy, config.init);
    fit.loss = joint_loss(config.loss, fit.path.var, fit.path.es, r, spec.tau);
    fit.starts_tried = feasible_random + warm_used;
    fit.best_start_loss = std::min(best_start, best_seed);
    fit.converged = refined[winner].converged;
    fit.metadata["optimizer"] = "multi-start Nelder-Mead, hard constraint rejection";
    fit.metadata["loss"] = to_string(config.loss);
    fit.metadata["seed"] = std::to_string(config.seed);
    fit.metadata["n_random_starts"] = std::to_string(config.n_random_starts);
    fit.metadata["n_best_refined"] = std::to_string(config.n_best_refined);
    fit.metadata["warm_starts_used"] = std::to_string(warm_used);
    fit.metadata["simplex_tolerance"] = join({config.simplex_tolerance});
    fit.metadata["max_iterations"] = std::to_string(config.max_iterations);
    fit.metadata["init"] = config.init.fixed ? "fixed:" + join({*config.init.fixed})
                                             : "empirical_quantile_first_" + std::to_string(config.init.window);
    fit.metadata["component_lag"] = models::to_string(spec.component_lag);
    if (r.size() < 500) fit.metadata["warning"] = "fewer than 500 observations";
    return fit;
}

UniverseFit fit_universe(const data::ReturnPanel& panel, const models::ModelSpec& spec,
                         const std::vector<selection::SpilloverWeights>& weights_by_target,
                         const OptimizerConfig& config, const UniverseWarmStart* warm) {
    const auto n = panel.assets();
    const auto T = static_cast<Eigen::Index>(panel.periods());
    if (weights_by_target.size() != n) throw DomainError("need spillover weights for every asset");

    UniverseFit out;
    out.spec = spec;
    models::ModelSpec base_spec = spec;
    base_spec.mode = models::Mode::Baseline;

    std::vector<Series> columns(n);
    for (std::size_t j = 0; j < n; ++j) columns[j] = panel.column(j);

    auto asset_config = [&](SeedStream stream, std::size_t j) {
        OptimizerConfig c = config;
        c.seed = derive_seed(config.seed, stream, j);
        c.threads = 1;
        return c;
    };
    auto warm_for = [&](const std::vector<std::optional<models::ParamVector>>* v, std::size_t j) {
        std::vector<models::ParamVector> w;
        if (v && j < v->size() && (*v)[j]) w.push_back(*(*v)[j]);
        return w;
    };

    out.baseline.resize(n);
    std::vector<std::string> stage1_error(n);
    parallel_for(n, config.threads, [&](std::size_t j) {
        try {
            const auto w = warm_for(warm ? &warm->baseline : nullptr, j);
            out.baseline[j] = estimate(base_spec, columns[j], std::nullopt, asset_config(SeedStream::StageOneAsset, j), w);
        } catch (const EstimationError& e) {
            stage1_error[j] = e.what();
        }
    });

    out.baseline_var = Eigen::MatrixXd::Constant(T, static_cast<Eigen::Index>(n), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < n; ++j)
        if (out.baseline[j])
            for (Eigen::Index t = 0; t < T; ++t) out.baseline_var(t, static_cast<Eigen::Index>(j)) = out.baseline[j]->path.var[static_cast<std::size_t>(t)];

    std::vector<std::size_t> stage2;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& w = weights_by_target[i];
        if (spec.mode == models::Mode::Baseline || w.empty()) {
            if (out.baseline[i]) out.fits.emplace(i, *out.baseline[i]);
            else out.failures.emplace(i, "stage-1 fit failed: " + stage1_error[i]);
            continue;
        }
        std::string missing;
        for (auto s : w.sources)
            if (!out.baseline[s]) missing += (missing.empty() ? "" : ",") + panel.tickers()[s];
        if (!missing.empty()) {
            out.failures.emplace(i, "stage-1 fit failed for source(s) " + missing);
            continue;
        }
        out.proxies.emplace(i, models::build_proxy(out.baseline_var, w));
        stage2.push_back(i);
    }

    std::vector<std::optional<FitResult>> second(stage2.size());
    std::vector<std::string> second_error(stage2.size());
    parallel_for(stage2.size(), config.threads, [&](std::size_t k) {
        const auto i = stage2[k];
        try {
            const auto w = warm_for(warm ? &warm->spillover : nullptr, i);
            const Series& proxy = out.proxies.at(i);
            second[k] = estimate(spec, columns[i], std::span<const double>(proxy), asset_config(SeedStream::StageTwoAsset, i), w);
        } catch (const EstimationError& e) {
            second_error[k] = e.what();
        }
    });
    for (std::size_t k = 0; k < stage2.size(); ++k) {
        const auto i = stage2[k];
        if (!second[k]) {
            out.failures.emplace(i, second_error[k]);
            continue;
        }
        auto& fit = *second[k];
        const auto& w = weights_by_target[i];
        std::ostringstream prov;
        prov << "stage-1 " << models::to_string(spec.variant) << " baseline VaR of ";
        for (std::size_t s = 0; s < w.sources.size(); ++s)
            prov << (s ? "," : "") << panel.tickers()[w.sources[s]] << ":" << w.weights[s];
        fit.metadata["proxy"] = prov.str();
        out.fits.emplace(i, std::move(fit));
    }
    return out;
}

}  // namespace caviar::estimation
