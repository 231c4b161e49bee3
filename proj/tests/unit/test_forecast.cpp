#include "caviar/forecast.hpp"

#include "../support/sim.hpp"

#include <doctest.h>

using namespace caviar;
using namespace caviar::forecast;

namespace {

estimation::OptimizerConfig cfg() {
    estimation::OptimizerConfig c;
    c.n_random_starts = 150;
    c.n_best_refined = 2;
    return c;
}

Eigen::MatrixXd two_assets(std::size_t T, std::uint64_t seed) {
    Rng rng(seed);
    models::ParamVector p;
    p.omega = -0.10;
    p.beta1 = 0.85;
    p.beta2 = -0.20;
    Eigen::MatrixXd m(T, 2);
    const auto a = testing::simulate_sav(p, T, -1.9, rng);
    const auto b = testing::simulate_sav(p, T, -1.9, rng);
    for (std::size_t t = 0; t < T; ++t) {
        m(t, 0) = a[t];
        m(t, 1) = b[t] + (t > 0 ? 0.3 * a[t - 1] : 0.0);
    }
    return m;
}

bool same(const ForecastRecord& a, const ForecastRecord& b) {
    auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.date == b.date && a.target == b.target && a.model == b.model && eq(a.var, b.var) && eq(a.es, b.es) &&
           eq(a.realized, b.realized) && eq(a.fz0, b.fz0) && a.hit == b.hit &&
           eq(a.spillover_coefficient, b.spillover_coefficient) && a.refit == b.refit && a.carried == b.carried;
}

}  // namespace

TEST_CASE("origin count") {
    RollingConfig r;
    r.window = 3974;
    CHECK(r.origins(3974 + 470) == 470);
    r.step = 5;
    CHECK(r.origins(3974 + 470) == 94);
    CHECK_THROWS_AS((void)r.origins(3974), DomainError);
}

TEST_CASE("fit-once forecasts equal the frozen-parameter filter") {
    const auto panel = testing::make_panel(two_assets(700, 61));
    const std::vector<selection::SpilloverWeights> w{{0, {}, {}}, {1, {0}, {1.0}}};
    RollingConfig rc;
    rc.window = 600;
    rc.refit_every = 0;
    for (auto mode : {models::Mode::Baseline, models::Mode::SE, models::Mode::X}) {
        const models::ModelSpec spec{models::Variant::SAV, mode};
        CAPTURE(spec.id());
        const auto run = rolling_forecast(panel, spec, w, rc, cfg());
        CHECK(run.refits == 1);

        auto c = cfg();
        c.seed = derive_seed(c.seed, SeedStream::ForecastWindow, 0);
        const auto fit = estimation::fit_universe(panel.slice(0, 600), spec, w, c);
        const auto r0 = panel.column(0), r1 = panel.column(1);
        const auto src = models::filter({models::Variant::SAV, models::Mode::Baseline}, fit.baseline[0]->params, r0);
        const auto p0 = models::filter(fit.fits.at(0).spec, fit.fits.at(0).params, r0);
        const auto p1 = mode == models::Mode::Baseline
                            ? models::filter(fit.fits.at(1).spec, fit.fits.at(1).params, r1)
                            : models::filter(spec, fit.fits.at(1).params, r1, std::span<const double>(src.var));
        REQUIRE(run.by_target.at(0).size() == 100);
        for (std::size_t k = 0; k < 100; ++k) {
            CHECK(std::abs(run.by_target.at(0)[k].var - p0.var[600 + k]) <= 1e-12);
            CHECK(std::abs(run.by_target.at(1)[k].var - p1.var[600 + k]) <= 1e-12);
            CHECK(run.by_target.at(1)[k].realized == r1[600 + k]);
        }
        CHECK(run.by_target.at(1).front().refit);
        CHECK_FALSE(run.by_target.at(1).back().refit);
    }
}

TEST_CASE("appending future rows leaves forecasts bit-identical") {
    const auto full = two_assets(760, 62);
    const auto short_panel = testing::make_panel(full.topRows(700));
    const auto long_panel = testing::make_panel(full);
    const std::vector<selection::SpilloverWeights> w{{0, {}, {}}, {1, {0}, {1.0}}};
    RollingConfig rc;
    rc.window = 600;
    rc.refit_every = 25;
    const models::ModelSpec spec{models::Variant::SAV, models::Mode::SE};
    const auto a = rolling_forecast(short_panel, spec, w, rc, cfg());
    const auto b = rolling_forecast(long_panel, spec, w, rc, cfg());
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& ra = a.by_target.at(i);
        const auto& rb = b.by_target.at(i);
        REQUIRE(rb.size() == ra.size() + 60);
        for (std::size_t k = 0; k < ra.size(); ++k) CHECK(same(ra[k], rb[k]));
    }
}

TEST_CASE("forecast records are well formed") {
    const auto panel = testing::make_panel(two_assets(660, 63));
    const std::vector<selection::SpilloverWeights> w{{0, {}, {}}, {1, {0}, {1.0}}};
    RollingConfig rc;
    rc.window = 600;
    rc.refit_every = 20;
    const auto run = rolling_forecast(panel, {models::Variant::AS, models::Mode::X}, w, rc, cfg());
    CHECK(run.refits == 3);
    for (const auto& [i, recs] : run.by_target)
        for (const auto& rec : recs) {
            CHECK(rec.es <= rec.var);
            CHECK(rec.var < 0.0);
            CHECK(std::isfinite(rec.fz0));
            CHECK(rec.hit == (rec.realized <= rec.var ? 1 : 0));
            CHECK(std::isnan(rec.spillover_coefficient) == (i == 0));
        }
    CHECK_THROWS_AS(rolling_forecast(panel, {}, {w[0]}, rc, cfg()), DomainError);
}
