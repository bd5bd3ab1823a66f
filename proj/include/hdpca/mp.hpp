#pragma once

namespace hdpca::mp {

/// Marcenko-Pastur law with aspect ratio c and population H = delta at sigma2.
struct MpLaw {
    MpLaw(double c, double sigma2);

    double c;
    double sigma2;
};

struct Interval {
    double lower;
    double upper;
};

/// [sigma2 (1 - sqrt c)^2, sigma2 (1 + sqrt c)^2].
Interval support_edges(const MpLaw& law);

/// Absolutely continuous part of the law. The point mass at 0 for c > 1 is
/// not included; see atom_at_zero.
double density(const MpLaw& law, double x);

/// 1 - 1/c when c > 1, else 0.
double atom_at_zero(const MpLaw& law);

/// Distribution function including the atom at zero.
double cdf(const MpLaw& law, double x);

/// Smallest x with cdf(x) = q, found by bisection to 1e-12. Returns 0 when q
/// does not exceed the atom mass.
double quantile(const MpLaw& law, double q);

double median(const MpLaw& law);

/// Integral of log(x) against the law with c < 1 and sigma2 = 1:
/// ((c - 1)/c) log(1 - c) - 1.
double log_moment(double c);

}  // namespace hdpca::mp
