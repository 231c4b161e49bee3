#pragma once

#include "caviar/common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace caviar::mcs {

/// P x M per-date losses, one column per model.
struct LossMatrix {
    Eigen::MatrixXd losses;
    std::vector<std::string> models;

    void validate() const;
};

struct McsConfig {
    std::size_t bootstrap_reps = 1000;
    std::size_t block_length = 10;
    std::uint64_t seed = 20251114;
    double alpha = 0.25;
    unsigned threads = 1;
};

struct McsResult {
    std::vector<std::string> models;
    /// MCS p-value per model, in input column order.
    std::vector<double> p_values;
    /// Column indices, first eliminated first; the last entry is the final survivor.
    std::vector<std::size_t> elimination_order;
    /// Columns with p-value >= alpha, ascending.
    std::vector<std::size_t> survivors;
    double alpha = 0.25;

    [[nodiscard]] bool survives(std::size_t model) const;
};

/// Moving-block bootstrap resample of row indices [0, P): blocks of
/// `block_length` consecutive rows starting uniformly in [0, P - L].
std::vector<std::size_t> block_bootstrap_indices(std::size_t periods, std::size_t block_length, Rng& rng);

/**
 * Model Confidence Set with the range statistic T_R = max_{i,j} |t_ij|.
 * Pairwise mean loss differentials are studentized with their bootstrap
 * variances; the null distribution of T_R comes from the recentred
 * moving-block bootstrap. The model with the largest sup_j t_ij is removed at
 * each round and elimination continues down to one model, so every model gets
 * a p-value (the running maximum of the round p-values); survivors are those
 * with p >= alpha.
 * Pairs whose bootstrap variance is below 1e-14 count as t = 0 when their
 * mean differential vanishes and as infinitely separated otherwise.
 */
McsResult mcs_range(const LossMatrix& losses, const McsConfig& config = {});

}  // namespace caviar::mcs
