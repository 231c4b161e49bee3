#include "caviar/models.hpp"

#include "../support/sim.hpp"

#include <doctest.h>

using namespace caviar;
using namespace caviar::models;

namespace {

ParamVector params_for(Variant v, Mode m) {
    ParamVector p;
    if (v == Variant::IG) {
        p.omega = 0.08;
        p.beta1 = 0.85;
        p.beta2 = 0.12;
    } else {
        p.omega = -0.1;
        p.beta1 = 0.86;
        p.beta2 = -0.15;
        p.beta3 = 0.22;
    }
    p.gamma = -0.7;
    if (m == Mode::SE) {
        p.phi1 = 0.2;
        p.phi2 = 0.3;
    }
    if (m == Mode::X) p.beta_s = v == Variant::IG ? 0.05 : 0.25;
    return p;
}

// Written out per formula, independently of advance().
struct Oracle {
    Series var, qp, qs;
};

Oracle unrolled(Variant v, Mode m, const ParamVector& p, const Series& r, const Series& s, double v0, bool own) {
    const std::size_t T = r.size();
    Oracle o{Series(T), Series(T), Series(T)};
    o.var[0] = v0;
    o.qp[0] = v0;
    o.qs[0] = 0.0;
    for (std::size_t t = 1; t < T; ++t) {
        const double rl = r[t - 1], sl = s[t - 1];
        const double lag = (m == Mode::SE && own) ? o.qp[t - 1] : o.var[t - 1];
        double core = 0.0;
        if (v == Variant::SAV) {
            core = p.omega + p.beta1 * lag + p.beta2 * (rl < 0 ? -rl : rl);
            if (m == Mode::X) core += p.beta_s * sl;
        } else if (v == Variant::AS) {
            const double pos = rl > 0 ? rl : 0.0, neg = rl < 0 ? rl : 0.0;
            core = p.omega + p.beta1 * lag + p.beta2 * pos + p.beta3 * neg;
            if (m == Mode::X) core += p.beta_s * sl;
        } else {
            double arg = p.omega + p.beta1 * lag * lag + p.beta2 * rl * rl;
            if (m == Mode::X) arg += p.beta_s * sl * sl;
            core = -std::sqrt(arg);
        }
        if (m == Mode::SE) {
            o.qp[t] = core;
            o.qs[t] = p.phi1 * o.qs[t - 1] + p.phi2 * sl;
            o.var[t] = o.qp[t] + o.qs[t];
        } else {
            o.qp[t] = o.var[t] = core;
            o.qs[t] = 0.0;
        }
    }
    return o;
}

}  // namespace

TEST_CASE("nine filters match hand-unrolled T=20 recursions") {
    Rng rng(21);
    const auto r = testing::normals(rng, 20);
    Series s(20);
    for (auto& x : s) x = -1.0 - std::abs(testing::normal(rng));
    const InitRule init{300, -1.5};
    for (auto v : {Variant::SAV, Variant::AS, Variant::IG})
        for (auto m : {Mode::Baseline, Mode::SE, Mode::X})
            for (auto lag : {ComponentLag::Own, ComponentLag::Total}) {
                const ModelSpec spec{v, m, 0.05, lag};
                CAPTURE(spec.id());
                const auto p = params_for(v, m);
                const auto path = filter(spec, p, r, s, init);
                const auto o = unrolled(v, m, p, r, s, -1.5, lag == ComponentLag::Own);
                for (std::size_t t = 0; t < 20; ++t) {
                    CHECK(std::abs(path.var[t] - o.var[t]) <= 1e-12);
                    CHECK(std::abs(path.qp[t] - o.qp[t]) <= 1e-12);
                    CHECK(std::abs(path.qs[t] - o.qs[t]) <= 1e-12);
                    CHECK(std::abs(path.var[t] - (path.qp[t] + path.qs[t])) <= 1e-12);
                    CHECK(path.es[t] == (1.0 + std::exp(p.gamma)) * path.var[t]);
                }
            }
}

TEST_CASE("nesting collapses to Baseline") {
    Rng rng(22);
    const auto r = testing::normals(rng, 200);
    const auto s = testing::normals(rng, 200);
    for (auto v : {Variant::SAV, Variant::AS, Variant::IG}) {
        const auto base = filter({v, Mode::Baseline}, params_for(v, Mode::Baseline), r);
        auto pse = params_for(v, Mode::SE);
        pse.phi1 = pse.phi2 = 0.0;
        const auto se = filter({v, Mode::SE}, pse, r, s);
        auto px = params_for(v, Mode::X);
        px.beta_s = 0.0;
        const auto x = filter({v, Mode::X}, px, r, s);
        for (std::size_t t = 0; t < r.size(); ++t) {
            CHECK(se.var[t] == base.var[t]);
            CHECK(se.qs[t] == 0.0);
            CHECK(x.var[t] == base.var[t]);
        }
    }
}

TEST_CASE("single-step examples") {
    ParamVector p;
    p.omega = -0.155;
    p.beta1 = 0.866;
    p.beta2 = -0.148;
    const ModelSpec sav{Variant::SAV, Mode::Baseline};
    const auto next = advance(sav, p, {-2.0, -2.0, 0.0}, 1.0, 0.0);
    CHECK(next.var == doctest::Approx(-2.035).epsilon(1e-12));

    ParamVector q = p;
    q.phi1 = 0.0;
    q.phi2 = 0.325;
    const auto se = advance({Variant::SAV, Mode::SE}, q, {-2.0, -2.0, 0.0}, 1.0, -2.0);
    CHECK(se.qs == doctest::Approx(-0.65).epsilon(1e-12));
    CHECK(se.var == doctest::Approx(se.qp + se.qs).epsilon(1e-15));

    ParamVector a;
    a.omega = -0.1;
    a.beta1 = 0.9;
    a.beta2 = -0.3;
    a.beta3 = 0.4;
    const auto as = advance({Variant::AS, Mode::Baseline}, a, {-2.0, -2.0, 0.0}, 0.0, 0.0);
    CHECK(as.var == doctest::Approx(-0.1 + 0.9 * -2.0).epsilon(1e-15));
}

TEST_CASE("ES scaling") {
    CHECK(es_from_var(0.0, Series{-1.0})[0] == -2.0);
    const auto es = es_from_var(-0.746, Series{-2.0})[0];
    CHECK(1.0 + std::exp(-0.746) == doctest::Approx(1.4743).epsilon(1e-4));
    CHECK(es == doctest::Approx(-2.9486).epsilon(1e-4));
    CHECK(es_from_var(-60.0, Series{-2.0})[0] == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("proxy construction") {
    Eigen::MatrixXd y(2, 3);
    y << -1.0, -3.0, -5.0, -2.0, -4.0, -6.0;
    selection::SpilloverWeights single{2, {0}, {1.0}};
    const auto s1 = build_proxy(y, single);
    CHECK(s1 == Series{-1.0, -2.0});
    selection::SpilloverWeights half{2, {0, 1}, {0.5, 0.5}};
    CHECK(build_proxy(y, half)[0] == -2.0);
    selection::SpilloverWeights none{2, {}, {}};
    CHECK(build_proxy(y, none) == Series{0.0, 0.0});
    selection::SpilloverWeights bad{2, {0, 1}, {0.5, 0.6}};
    CHECK_THROWS_AS(build_proxy(y, bad), DomainError);
}

TEST_CASE("spillover share") {
    QuantilePath p;
    p.var = {-2.5, -1.0, 0.0};
    p.qs = {-0.5, 0.0, 0.0};
    p.qp = {-2.0, -1.0, 0.0};
    const auto share = spillover_share(p);
    CHECK(share[0] == doctest::Approx(0.2));
    CHECK(share[1] == 0.0);
    CHECK(std::isnan(share[2]));
}

TEST_CASE("constraints and packing") {
    const ModelSpec se{Variant::AS, Mode::SE};
    auto p = params_for(Variant::AS, Mode::SE);
    CHECK_FALSE(constraint_violation(se, p));
    CHECK(parameter_count(se) == 7);
    CHECK(unpack(se, pack(se, p)) == p);
    CHECK(parameter_names(se) == std::vector<std::string>{"omega", "beta1", "beta2", "beta3", "gamma", "phi1", "phi2"});
    p.phi1 = 0.9;
    CHECK(constraint_violation(se, p));  // beta1 must exceed phi1
    p.phi1 = -0.1;
    CHECK(constraint_violation(se, p));
    CHECK_FALSE(constraint_violation({Variant::AS, Mode::SE, 0.05, ComponentLag::Own, true}, p));
    auto ig = params_for(Variant::IG, Mode::X);
    ig.beta_s = -0.1;
    CHECK(constraint_violation({Variant::IG, Mode::X}, ig));
    CHECK(parse_mode("SE") == Mode::SE);
    CHECK(ModelSpec{Variant::IG, Mode::X}.id() == "IG-X");
    CHECK(ModelSpec{Variant::SAV, Mode::Baseline}.id() == "SAV");
    CHECK_THROWS_AS(parse_variant("GARCH"), DomainError);
}

TEST_CASE("filter errors and feasibility") {
    const Series r{1.0, -1.0, 2.0};
    auto p = params_for(Variant::SAV, Mode::Baseline);
    CHECK_THROWS_AS(filter({Variant::SAV, Mode::SE}, params_for(Variant::SAV, Mode::SE), r), DomainError);
    CHECK_THROWS_AS(filter({Variant::SAV, Mode::X}, p, r, Series{1.0}), DomainError);
    p.beta1 = 1.2;
    CHECK_THROWS_AS(filter({Variant::SAV, Mode::Baseline}, p, r), DomainError);
    p.beta1 = 0.5;
    p.omega = 5.0;
    const auto path = filter({Variant::SAV, Mode::Baseline}, p, r, std::nullopt, {300, -1.0});
    CHECK_FALSE(path.feasible);
    CHECK(path.first_infeasible == 1);
}

TEST_CASE("initial VaR is the empirical quantile of the first window") {
    Series r(400);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(i % 100) - 50.0;
    const InitRule init{300, std::nullopt};
    CHECK(init.initial_var(r, 0.05) == lower_quantile(std::span<const double>(r).first(300), 0.05));
    CHECK(InitRule{300, -3.0}.initial_var(r, 0.05) == -3.0);
}
