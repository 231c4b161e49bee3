#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace caviar::optim {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    /// Stop once every vertex lies within this sup-norm distance of the best.
    double tolerance = 1e-6;
    std::size_t max_iterations = 5000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/**
 * Downhill simplex minimizer (reflection 1, expansion 2, contraction 1/2,
 * shrink 1/2). The initial simplex is x0 plus x0 + steps[i] e_i. The objective
 * may return +inf to reject a point; the start point itself must be finite.
 */
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             std::span<const double> steps, const NelderMeadOptions& options = {});

}  // namespace caviar::optim
