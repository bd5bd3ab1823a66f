#include "hdpca/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "hdpca/errors.hpp"

namespace hdpca {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 1000000;
constexpr double kTiny = 1e-300;

// log(x^a e^{-x} / Gamma(a)). For large a the Stirling form avoids the
// cancellation between a*log(x), x and lgamma(a), which are each O(a log a).
double log_prefactor(double a, double x)
{
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
    const double d = (x - a) / a;
    const double inv = 1.0 / a;
    const double inv2 = inv * inv;
    const double stirling = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    return 0.5 * std::log(a / (2.0 * std::numbers::pi)) + a * (std::log1p(d) - d) - stirling;
}

double lower_series(double a, double x)
{
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) return sum * std::exp(log_prefactor(a, x));
    }
    throw ConvergenceError("incomplete gamma series did not converge", kMaxIterations, term / sum);
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double upper_fraction(double a, double x)
{
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) return std::exp(log_prefactor(a, x)) * h;
    }
    throw ConvergenceError("incomplete gamma continued fraction did not converge", kMaxIterations, h);
}

void check_gamma_args(double a, double x)
{
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma needs a > 0");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma needs x >= 0");
}

}  // namespace

double gamma_p(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return lower_series(a, x);
    return 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - lower_series(a, x);
    return upper_fraction(a, x);
}

double chi2_sf(double x, double df)
{
    if (!(df > 0.0)) throw DomainError("chi-square needs df > 0");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * df, 0.5 * x);
}

double normal_sf(double z)
{
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double normal_upper_quantile(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("normal quantile needs 0 < alpha < 1");
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), alpha));
}

}  // namespace hdpca
