#include "caviar/common.hpp"

#include <numeric>

namespace caviar {

double lower_quantile(std::span<const double> x, double tau) {
    if (x.empty()) throw DomainError("quantile of an empty series");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    std::vector<double> sorted(x.begin(), x.end());
    auto rank = static_cast<std::size_t>(std::ceil(tau * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    return sorted[rank - 1];
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace caviar
