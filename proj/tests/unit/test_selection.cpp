#include "caviar/selection.hpp"

#include "../support/sim.hpp"

#include <doctest.h>

using namespace caviar;
using namespace caviar::selection;

TEST_CASE("lagged correlation") {
    Rng rng(1);
    const std::size_t T = 200;
    Eigen::MatrixXd x(T, 3);
    for (std::size_t t = 0; t < T; ++t) {
        x(t, 0) = testing::normal(rng);
        x(t, 1) = testing::normal(rng);
        x(t, 2) = 4.0;
    }
    Series target(T, 0.0);
    for (std::size_t t = 1; t < T; ++t) target[t] = x(t - 1, 0);
    target[0] = 0.3;
    const auto c = lagged_correlation(target, x, 1);
    CHECK(c.correlation[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.correlation[2] == 0.0);
    CHECK(c.zero_variance[2]);
    CHECK_FALSE(c.zero_variance[0]);
}

TEST_CASE("white-noise lagged correlations are small") {
    Rng rng(2);
    const std::size_t T = 5000;
    Eigen::MatrixXd x(T, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = testing::normal(rng);
    const auto target = testing::normals(rng, T);
    for (double c : lagged_correlation(target, x, 1).correlation) CHECK(std::abs(c) < 0.05);
}

TEST_CASE("ols exact fit and singular design") {
    Rng rng(3);
    const Eigen::Index n = 50;
    Eigen::MatrixXd z(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) z(i, 0) = testing::normal(rng);
    const Eigen::VectorXd y = 2.0 * z.col(0);
    const auto fit = ols(y, z);
    CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.coefficients(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.adjusted_r2 == doctest::Approx(1.0).epsilon(1e-12));

    Eigen::MatrixXd dup(n, 2);
    dup << z, z;
    CHECK_THROWS_AS(ols(y, dup), SingularDesignError);
    Eigen::MatrixXd affine(n, 2);
    affine << z, (3.0 * z.array() + 1.0).matrix();
    CHECK_THROWS_AS(ols(y, affine), SingularDesignError);
}

TEST_CASE("ols against closed-form simple regression") {
    Rng rng(4);
    const Eigen::Index n = 100;
    Eigen::MatrixXd z(n, 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        z(i, 0) = testing::normal(rng);
        y(i) = 1.0 + 0.3 * z(i, 0) + testing::normal(rng);
    }
    const double zm = z.col(0).mean(), ym = y.mean();
    const double sxy = ((z.col(0).array() - zm) * (y.array() - ym)).sum();
    const double sxx = (z.col(0).array() - zm).square().sum();
    const double b = sxy / sxx, a = ym - b * zm;
    const Eigen::VectorXd e = y.array() - a - b * z.col(0).array();
    const double s2 = e.squaredNorm() / static_cast<double>(n - 2);
    const double se = std::sqrt(s2 / sxx);
    const auto fit = ols(y, z);
    CHECK(fit.coefficients(1) == doctest::Approx(b).epsilon(1e-12));
    CHECK(fit.coefficients(0) == doctest::Approx(a).epsilon(1e-12));
    CHECK(fit.t_stats(1) == doctest::Approx(b / se).epsilon(1e-10));
    const double r2 = 1.0 - e.squaredNorm() / (y.array() - ym).square().sum();
    CHECK(fit.r2 == doctest::Approx(r2).epsilon(1e-12));
    CHECK(fit.adjusted_r2 == doctest::Approx(1.0 - (1.0 - r2) * (n - 1.0) / (n - 2.0)).epsilon(1e-12));
}

TEST_CASE("ols p-values are roughly uniform under the null") {
    Rng rng(5);
    int below = 0;
    const int reps = 400;
    for (int k = 0; k < reps; ++k) {
        Eigen::MatrixXd z(1000, 1);
        Eigen::VectorXd y(1000);
        for (Eigen::Index i = 0; i < 1000; ++i) {
            z(i, 0) = testing::normal(rng);
            y(i) = testing::normal(rng);
        }
        below += ols(y, z).p_values(1) < 0.1 ? 1 : 0;
    }
    CHECK(below > 20);
    CHECK(below < 60);
}

TEST_CASE("pca weights") {
    Eigen::MatrixXd one(10, 1);
    one.setRandom();
    CHECK(pca_weights(one)[0] == doctest::Approx(1.0));

    Rng rng(6);
    Eigen::MatrixXd two(100, 2);
    for (Eigen::Index i = 0; i < 100; ++i) {
        two(i, 0) = testing::normal(rng);
        two(i, 1) = 3.0 * two(i, 0) + 1.0;
    }
    const auto w = pca_weights(two);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-10));

    Eigen::MatrixXd three(500, 3);
    for (Eigen::Index i = 0; i < three.size(); ++i) three.data()[i] = testing::normal(rng);
    three.col(1) += three.col(0);
    const auto w3 = pca_weights(three);
    CHECK(w3[0] + w3[1] + w3[2] == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : w3) CHECK(v >= 0.0);

    Eigen::MatrixXd flat(10, 2);
    flat.col(0).setRandom();
    flat.col(1).setConstant(1.0);
    CHECK_THROWS_AS(pca_weights(flat), DomainError);
}

TEST_CASE("select_influential finds a strong planted driver") {
    Rng rng(7);
    const std::size_t T = 4000;
    Eigen::MatrixXd r(T, 4);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = testing::normal(rng);
    for (std::size_t t = 1; t < T; ++t) r(t, 0) += 0.5 * r(t - 1, 2);
    const auto panel = testing::make_panel(r);
    const auto res = select_influential(panel, 0, 0.10);
    REQUIRE_FALSE(res.weights.empty());
    CHECK(res.weights.sources.front() == 2);
    double total = 0.0;
    for (double w : res.weights.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.trace.steps.front().candidate == 2);
    CHECK(res.trace.steps.front().accepted);
    double last = -1e300;
    for (const auto& s : res.trace.steps)
        if (s.accepted) {
            CHECK(s.adjusted_r2 > last);
            last = s.adjusted_r2;
        }
}

TEST_CASE("select_influential returns nothing for independent noise at tiny alpha") {
    Rng rng(8);
    Eigen::MatrixXd r(1000, 5);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = testing::normal(rng);
    const auto res = select_influential(testing::make_panel(r), 1, 1e-6);
    CHECK(res.weights.empty());
    CHECK(res.weights.weights.empty());
    CHECK_FALSE(res.trace.stop_reason.empty());
}

TEST_CASE("selection input checks") {
    Eigen::MatrixXd r(10, 1);
    r.setRandom();
    CHECK_THROWS_AS(select_influential(testing::make_panel(r), 0), DomainError);
    Eigen::MatrixXd r2(10, 2);
    r2.setRandom();
    CHECK_THROWS_AS(select_influential(testing::make_panel(r2), 0, 1.5), DomainError);
}
