#pragma once

namespace hdpca {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly
/// (continued fraction for x >= a + 1) so small tails keep relative accuracy.
double gamma_q(double a, double x);

/// Upper-tail probability of a chi-square variable with df degrees of freedom.
double chi2_sf(double x, double df);

/// Upper-tail probability of the standard normal.
double normal_sf(double z);
/// z such that normal_sf(z) = alpha, 0 < alpha < 1.
double normal_upper_quantile(double alpha);

}  // namespace hdpca
