#include "caviar/backtest.hpp"
#include "caviar/stats.hpp"

#include "../support/sim.hpp"

#include <doctest.h>

using namespace caviar;
using namespace caviar::backtest;

namespace {

HitSequence from(std::vector<int> hits, double tau) {
    HitSequence h;
    h.hits = std::move(hits);
    h.tau = tau;
    return h;
}

std::vector<int> bernoulli(Rng& rng, std::size_t n, double p) {
    std::vector<int> h(n);
    for (auto& v : h) v = rng.uniform() < p ? 1 : 0;
    return h;
}

}  // namespace

TEST_CASE("violation rate") {
    std::vector<int> h(100, 0);
    for (int i = 0; i < 5; ++i) h[static_cast<std::size_t>(i * 20)] = 1;
    CHECK(violation_rate(from(h, 0.05)) == 0.05);
    CHECK(violation_rate(from(std::vector<int>(10, 0), 0.05)) == 0.0);
    const Series r{-3.0, 0.0, -1.0}, v{-2.0, -2.0, -1.0};
    CHECK(hit_sequence(r, v, 0.05).hits == std::vector<int>{1, 0, 1});
}

TEST_CASE("Kupiec worked values") {
    std::vector<int> h(1000, 0);
    for (int i = 0; i < 50; ++i) h[static_cast<std::size_t>(i * 20)] = 1;
    auto uc = kupiec_uc(from(h, 0.05));
    CHECK(uc.stat == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(uc.p_value == doctest::Approx(1.0));

    std::vector<int> h70(1000, 0);
    for (int i = 0; i < 70; ++i) h70[static_cast<std::size_t>(i * 14)] = 1;
    uc = kupiec_uc(from(h70, 0.05));
    const double lr = -2.0 * (930 * std::log(0.95) + 70 * std::log(0.05) - 930 * std::log(0.93) - 70 * std::log(0.07));
    CHECK(uc.stat == doctest::Approx(lr).epsilon(1e-12));
    // the formula evaluates to 7.5302 (p = 0.00607)
    CHECK(uc.stat == doctest::Approx(7.5302).epsilon(1e-4));
    CHECK(uc.p_value == doctest::Approx(0.0060675).epsilon(1e-3));

    uc = kupiec_uc(from(std::vector<int>(1000, 0), 0.05));
    CHECK(uc.stat == doctest::Approx(-2000.0 * std::log(0.95)).epsilon(1e-12));
    CHECK(uc.stat == doctest::Approx(102.6).epsilon(1e-3));
    CHECK(uc.p_value < 1e-20);
}

TEST_CASE("chi-square tail against closed forms") {
    CHECK(stats::chi2_sf(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-14));
    CHECK(stats::chi2_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(stats::chi2_sf(0.0, 3.0) == 1.0);
}

TEST_CASE("Christoffersen hand computation on T=20") {
    std::vector<int> h(20, 0);
    h[2] = h[9] = 1;
    const auto hs = from(h, 0.1);
    const double restricted = 17 * std::log(17.0 / 19.0) + 2 * std::log(2.0 / 19.0);
    const double markov = 15 * std::log(15.0 / 17.0) + 2 * std::log(2.0 / 17.0);
    const double ind = -2.0 * (restricted - markov);
    CHECK(christoffersen_ind(hs) == doctest::Approx(ind).epsilon(1e-12));
    CHECK(kupiec_uc(hs).stat == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(christoffersen_cc(hs).stat == doctest::Approx(ind).epsilon(1e-12));
    CHECK(christoffersen_cc(hs).p_value == doctest::Approx(std::exp(-ind / 2.0)).epsilon(1e-12));
}

TEST_CASE("clustered hits reject independence") {
    std::vector<int> h(1000, 0);
    for (int i = 300; i < 320; ++i) h[static_cast<std::size_t>(i)] = 1;
    const auto cc = christoffersen_cc(from(h, 0.05));
    CHECK(christoffersen_ind(from(h, 0.05)) > 50.0);
    CHECK(cc.p_value < 1e-10);
}

TEST_CASE("DQ against normal equations") {
    Rng rng(51);
    const std::size_t T = 600;
    const auto hits = bernoulli(rng, T, 0.05);
    Series var(T);
    for (auto& v : var) v = -1.5 - rng.uniform();
    const auto hs = from(hits, 0.05);
    const auto dq = dq_test(hs, var, 4);
    const Eigen::Index n = T - 4;
    Eigen::MatrixXd x(n, 6);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto t = static_cast<std::size_t>(i) + 4;
        y(i) = hits[t] - 0.05;
        x(i, 0) = 1.0;
        for (std::size_t l = 1; l <= 4; ++l) x(i, static_cast<Eigen::Index>(l)) = hits[t - l] - 0.05;
        x(i, 5) = var[t];
    }
    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::VectorXd b = xtx.ldlt().solve(x.transpose() * y);
    const double stat = b.dot(xtx * b) / (0.05 * 0.95);
    CHECK(dq.stat == doctest::Approx(stat).epsilon(1e-9));
    CHECK(dq.dof == 6);
    CHECK_FALSE(dq.degenerate);
    CHECK(dq.p_value == doctest::Approx(stats::chi2_sf(stat, 6.0)).epsilon(1e-9));
}

TEST_CASE("DQ with constant VaR drops the aliased column") {
    Rng rng(52);
    const auto hits = bernoulli(rng, 500, 0.05);
    const Series var(500, -1.6);
    const auto dq = dq_test(from(hits, 0.05), var, 4);
    CHECK(dq.degenerate);
    CHECK(dq.dof == 5);
    const Eigen::Index n = 496;
    Eigen::MatrixXd x(n, 5);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto t = static_cast<std::size_t>(i) + 4;
        y(i) = hits[t] - 0.05;
        x(i, 0) = 1.0;
        for (std::size_t l = 1; l <= 4; ++l) x(i, static_cast<Eigen::Index>(l)) = hits[t - l] - 0.05;
    }
    const Eigen::VectorXd b = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    CHECK(dq.stat == doctest::Approx((x * b).squaredNorm() / (0.05 * 0.95)).epsilon(1e-9));
}

TEST_CASE("Monte Carlo size of UC, CC and DQ under iid hits") {
    Rng rng(53);
    const int reps = 400;
    int uc = 0, cc = 0, dq = 0;
    const Series var(2500, -1.645);
    for (int k = 0; k < reps; ++k) {
        const auto hs = from(bernoulli(rng, 2500, 0.05), 0.05);
        uc += kupiec_uc(hs).p_value < 0.05;
        cc += christoffersen_cc(hs).p_value < 0.05;
        dq += dq_test(hs, var, 4).p_value < 0.05;
    }
    // loose band for 400 draws; the acceptance run uses 2000
    for (int v : {uc, cc, dq}) {
        CHECK(v >= 6);
        CHECK(v <= 36);
    }
}

TEST_CASE("DQ power against a persistent hit process") {
    Rng rng(54);
    int rejected = 0;
    const Series var(2500, -1.645);
    for (int k = 0; k < 100; ++k) {
        // Markov chain with pi11 = 0.5 and stationary rate 0.05
        const double p01 = 0.5 * 0.05 / 0.95;
        std::vector<int> h(2500, 0);
        for (std::size_t t = 1; t < h.size(); ++t) h[t] = rng.uniform() < (h[t - 1] ? 0.5 : p01) ? 1 : 0;
        rejected += dq_test(from(h, 0.05), var, 4).p_value < 0.05;
    }
    CHECK(rejected > 95);
}
