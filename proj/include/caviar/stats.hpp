#pragma once

namespace caviar::stats {

/// P(X > x) for X ~ chi-square(df), via the regularized upper incomplete gamma Q(df/2, x/2).
double chi2_sf(double x, double df);

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

}  // namespace caviar::stats
