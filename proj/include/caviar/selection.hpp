#pragma once

#include "caviar/common.hpp"
#include "caviar/data.hpp"

#include <Eigen/Dense>

#include <vector>

namespace caviar::selection {

/// Influential assets for one target and their spillover weights.
/// Empty `sources` means no spillover was detected.
struct SpilloverWeights {
    std::size_t target = 0;
    std::vector<std::size_t> sources;  // panel column indices, in order of entry
    std::vector<double> weights;       // same length as sources, sums to 1

    [[nodiscard]] bool empty() const noexcept { return sources.empty(); }
};

struct SelectionStep {
    std::size_t candidate;      // panel column index
    double correlation;         // signed (partial) correlation that ranked the candidate
    double p_value;             // t-test p-value of the candidate's coefficient
    double adjusted_r2;         // adjusted R^2 with the candidate included
    bool accepted;
};

/// One entry per candidate examined. Accepted steps have strictly
/// increasing adjusted R^2.
struct SelectionTrace {
    std::size_t target = 0;
    std::vector<SelectionStep> steps;
    std::string stop_reason;
};

struct CorrelationResult {
    Series correlation;
    std::vector<bool> zero_variance;  // column was constant; correlation reported as 0
};

/// Pearson correlation of target[t] with predictors(t - lag, j) over the overlap.
CorrelationResult lagged_correlation(std::span<const double> target,
                                     const Eigen::MatrixXd& predictors, std::size_t lag);

struct OlsResult {
    Eigen::VectorXd coefficients;  // intercept first
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    double r2 = 0.0;
    double adjusted_r2 = 0.0;
    Eigen::VectorXd residuals;
};

/// Least squares of y on [1, Z]. Throws SingularDesignError when [1, Z] is
/// rank deficient.
OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors);

/// Squared loadings of the leading eigenvector of the correlation matrix of X.
/// Throws DomainError on a zero-variance column.
Series pca_weights(const Eigen::MatrixXd& x);

struct SelectionResult {
    SpilloverWeights weights;
    SelectionTrace trace;
};

/// Recursive partial-correlation search for the assets whose lag-1 returns
/// carry information about the target, followed by first-PC weighting of the
/// selected assets' contemporaneous returns.
SelectionResult select_influential(const data::ReturnPanel& panel, std::size_t target,
                                   double alpha = 0.10);

}  // namespace caviar::selection
