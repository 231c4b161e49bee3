#include "caviar/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace caviar::optim {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, std::span<const double> steps,
                             const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    if (n == 0 || steps.size() != n) throw std::invalid_argument("nelder_mead: dimension mismatch");

    NelderMeadResult out;
    auto eval = [&](const std::vector<double>& x) {
        ++out.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto blend = [&](std::vector<double>& dst, const std::vector<double>& from, double coef) {
        for (std::size_t j = 0; j < n; ++j) dst[j] = centroid[j] + coef * (from[j] - centroid[j]);
    };

    for (;;) {
        std::iota(order.begin(), order.end(), 0);
        // Stable so that equal values keep a reproducible order.
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
        if (diameter < options.tolerance && std::isfinite(values[best])) {
            out.converged = true;
            break;
        }
        if (out.iterations >= options.max_iterations) break;
        ++out.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
        }

        blend(trial, simplex[worst], -1.0);
        const double fr = eval(trial);
        if (fr < values[best]) {
            blend(trial2, simplex[worst], -2.0);
            const double fe = eval(trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = trial;
            values[worst] = fr;
            continue;
        }
        // Outside contraction when the reflection beats the worst, inside otherwise.
        const bool outside = fr < values[worst];
        blend(trial2, outside ? trial : simplex[worst], 0.5);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            values[i] = eval(simplex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    out.x = simplex[best];
    out.value = values[best];
    return out;
}

}  // namespace caviar::optim
