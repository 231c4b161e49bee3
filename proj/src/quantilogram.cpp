#include "caviar/quantilogram.hpp"

namespace caviar::quantilogram {

Series quantile_hits(std::span<const double> x, double tau) {
    const double q = lower_quantile(x, tau);
    Series psi(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) psi[t] = (x[t] - q < 0.0 ? 1.0 : 0.0) - tau;
    return psi;
}

double cross_quantilogram(std::span<const double> x, std::span<const double> y, double tau, int lag) {
    if (x.size() != y.size()) throw DomainError("cross-quantilogram series lengths differ");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
    const auto T = x.size();
    const auto k = static_cast<std::size_t>(std::abs(lag));
    if (T <= k + 1) throw DomainError("series too short for the requested lag");
    auto constant = [](std::span<const double> s) {
        return std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
    };
    if (constant(x) || constant(y)) throw DomainError("cross-quantilogram of a constant series");

    const Series px = quantile_hits(x, tau);
    const Series py = quantile_hits(y, tau);
    // Pairs (x_t, y_{t-lag}); the overlap is t in [max(0, lag), min(T, T + lag)).
    const std::size_t begin = lag >= 0 ? k : 0;
    const std::size_t end = lag >= 0 ? T : T - k;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
        const double a = px[t];
        const double b = py[lag >= 0 ? t - k : t + k];
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    return sxy / std::sqrt(sxx * syy);
}

Eigen::MatrixXd quantilogram_matrix(const data::ReturnPanel& panel, double tau, int lag, unsigned threads) {
    const auto n = panel.assets();
    std::vector<Series> cols(n);
    for (std::size_t j = 0; j < n; ++j) cols[j] = panel.column(j);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n * n, threads, [&](std::size_t idx) {
        const auto i = idx / n, j = idx % n;
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cross_quantilogram(cols[i], cols[j], tau, lag);
    });
    return out;
}

}  // namespace caviar::quantilogram
