#include "caviar/backtest.hpp"

#include "caviar/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

namespace caviar::backtest {

namespace {

// n ln p with the 0 ln 0 = 0 convention.
double xlogy(double n, double p) { return n == 0.0 ? 0.0 : n * std::log(p); }

}  // namespace

std::size_t HitSequence::count() const noexcept {
    return static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1));
}

HitSequence hit_sequence(std::span<const double> r, std::span<const double> var, double tau) {
    if (r.size() != var.size()) throw DomainError("returns and VaR differ in length");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
    HitSequence h;
    h.tau = tau;
    h.hits.resize(r.size());
    for (std::size_t t = 0; t < r.size(); ++t) h.hits[t] = r[t] <= var[t] ? 1 : 0;
    return h;
}

double violation_rate(const HitSequence& h) {
    if (h.hits.empty()) throw DomainError("violation rate of an empty hit sequence");
    return static_cast<double>(h.count()) / static_cast<double>(h.size());
}

LrTest kupiec_uc(const HitSequence& h) {
    if (!(h.tau > 0.0 && h.tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
    if (h.hits.empty()) throw DomainError("Kupiec test of an empty hit sequence");
    const double T = static_cast<double>(h.size());
    const double n1 = static_cast<double>(h.count());
    const double n0 = T - n1;
    const double pi = n1 / T;
    const double stat = std::max(
        0.0, -2.0 * (xlogy(n0, 1.0 - h.tau) + xlogy(n1, h.tau) - xlogy(n0, 1.0 - pi) - xlogy(n1, pi)));
    return {stat, stats::chi2_sf(stat, 1.0)};
}

double christoffersen_ind(const HitSequence& h) {
    if (h.size() < 2) throw DomainError("independence test needs at least 2 observations");
    double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    for (std::size_t t = 1; t < h.size(); ++t) {
        const int a = h.hits[t - 1], b = h.hits[t];
        (a == 0 ? (b == 0 ? n00 : n01) : (b == 0 ? n10 : n11)) += 1.0;
    }
    const double pi01 = n00 + n01 > 0 ? n01 / (n00 + n01) : 0.0;
    const double pi11 = n10 + n11 > 0 ? n11 / (n10 + n11) : 0.0;
    const double pi = (n01 + n11) / (n00 + n01 + n10 + n11);
    const double restricted = xlogy(n00 + n10, 1.0 - pi) + xlogy(n01 + n11, pi);
    const double markov = xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) + xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11);
    return std::max(0.0, -2.0 * (restricted - markov));
}

LrTest christoffersen_cc(const HitSequence& h) {
    const double stat = kupiec_uc(h).stat + christoffersen_ind(h);
    return {stat, stats::chi2_sf(stat, 2.0)};
}

DqTest dq_test(const HitSequence& h, std::span<const double> var, std::size_t lags) {
    if (var.size() != h.size()) throw DomainError("VaR and hit sequence differ in length");
    if (h.size() <= lags + 2) throw DomainError("DQ test needs more observations than lags + 2");
    const auto n = static_cast<Eigen::Index>(h.size() - lags);
    const auto k = static_cast<Eigen::Index>(lags + 2);
    Eigen::VectorXd y(n);
    Eigen::MatrixXd x(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto t = static_cast<std::size_t>(i) + lags;
        y(i) = h.hits[t] - h.tau;
        x(i, 0) = 1.0;
        for (std::size_t l = 1; l <= lags; ++l) x(i, static_cast<Eigen::Index>(l)) = h.hits[t - l] - h.tau;
        x(i, k - 1) = var[t];
    }
    // Rank-revealing fit: collinear regressors (e.g. a constant VaR) are dropped.
    // Eigen's default threshold misses exact aliasing lost to rounding.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.rows(), x.cols());
    qr.setThreshold(1e-10);
    qr.compute(x);
    const auto rank = qr.rank();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < rank; ++j) keep.push_back(qr.colsPermutation().indices()(j));
    std::sort(keep.begin(), keep.end());
    const Eigen::MatrixXd xr = x(Eigen::all, keep);
    const Eigen::VectorXd fitted = xr * xr.colPivHouseholderQr().solve(y);
    DqTest out;
    out.lags = lags;
    out.dof = static_cast<std::size_t>(rank);
    out.degenerate = rank < k;
    out.stat = fitted.squaredNorm() / (h.tau * (1.0 - h.tau));
    out.p_value = out.dof > 0 ? stats::chi2_sf(out.stat, static_cast<double>(out.dof)) : 1.0;
    return out;
}

BacktestReport run_backtest(std::span<const double> r, std::span<const double> var, double tau,
                            std::size_t dq_lags) {
    const auto h = hit_sequence(r, var, tau);
    BacktestReport rep;
    rep.violation_rate = violation_rate(h);
    rep.uc = kupiec_uc(h);
    rep.cc = christoffersen_cc(h);
    rep.dq = dq_test(h, var, dq_lags);
    return rep;
}

}  // namespace caviar::backtest
