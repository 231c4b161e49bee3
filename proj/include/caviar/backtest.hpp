#pragma once

#include "caviar/common.hpp"

#include <vector>

namespace caviar::backtest {

/// h_t = 1{r_t <= VaR_t}.
struct HitSequence {
    std::vector<int> hits;
    double tau = 0.05;

    [[nodiscard]] std::size_t size() const noexcept { return hits.size(); }
    [[nodiscard]] std::size_t count() const noexcept;
};

HitSequence hit_sequence(std::span<const double> r, std::span<const double> var, double tau);

struct LrTest {
    double stat = 0.0;
    double p_value = 1.0;
};

struct DqTest {
    double stat = 0.0;
    double p_value = 1.0;
    std::size_t lags = 4;
    std::size_t dof = 0;
    /// X'X was singular; aliased regressors were dropped and dof reduced.
    bool degenerate = false;
};

double violation_rate(const HitSequence& h);

/// Kupiec unconditional coverage LR, chi-square(1). 0 ln 0 = 0.
LrTest kupiec_uc(const HitSequence& h);

/// Christoffersen conditional coverage LR_uc + LR_ind, chi-square(2).
LrTest christoffersen_cc(const HitSequence& h);

/// The independence part of christoffersen_cc on its own.
double christoffersen_ind(const HitSequence& h);

/**
 * Engle-Manganelli dynamic quantile test. Regresses Hit_t = h_t - tau on
 * [1, Hit_{t-1..t-lags}, VaR_t] for t >= lags; DQ = b'X'Xb / (tau (1 - tau)),
 * chi-square with one degree of freedom per identified regressor (lags + 2
 * when X has full rank).
 */
DqTest dq_test(const HitSequence& h, std::span<const double> var, std::size_t lags = 4);

struct BacktestReport {
    double violation_rate = 0.0;
    LrTest uc, cc;
    DqTest dq;
};

BacktestReport run_backtest(std::span<const double> r, std::span<const double> var, double tau,
                            std::size_t dq_lags = 4);

}  // namespace caviar::backtest
