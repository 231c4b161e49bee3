#pragma once

#include "caviar/common.hpp"
#include "caviar/data.hpp"

#include <Eigen/Dense>

namespace caviar::quantilogram {

/// psi_tau(u_t) = 1{u_t < 0} - tau with u_t = x_t - q_tau(x), q_tau the lower
/// empirical quantile of the whole series.
Series quantile_hits(std::span<const double> x, double tau);

/**
 * Sample cross-quantilogram rho_tau(k) between x_t and y_{t-k}, summed over
 * the overlapping range. Negative k leads x instead. The hits are not
 * demeaned. Throws DomainError when either series is constant.
 */
double cross_quantilogram(std::span<const double> x, std::span<const double> y, double tau,
                          int lag);

/// N x N matrix; entry (i, j) is rho between receiver i at t and source j at t - lag.
Eigen::MatrixXd quantilogram_matrix(const data::ReturnPanel& panel, double tau, int lag,
                                    unsigned threads = 1);

}  // namespace caviar::quantilogram
