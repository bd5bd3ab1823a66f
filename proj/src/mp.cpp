#include "hdpca/mp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdpca/errors.hpp"
#include "hdpca/quadrature.hpp"

namespace hdpca::mp {

namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr double kBisectionTolerance = 1e-12;
constexpr int kBisectionMaxIterations = 200;

// Mass of the continuous part on [a, x] in the angle variable
// x = sigma2 (1 + c - 2 sqrt(c) cos(theta)), which turns the square-root
// edges into a smooth integrand 2 sigma2 sin^2(theta) / (pi x(theta)).
double continuous_mass_below(const MpLaw& law, double x)
{
    const double root_c = std::sqrt(law.c);
    const double cos_upper = std::clamp((1.0 + law.c - x / law.sigma2) / (2.0 * root_c), -1.0, 1.0);
    const double theta_upper = std::acos(cos_upper);
    auto integrand = [&](double theta) {
        const double s = std::sin(theta);
        const double x_theta = law.sigma2 * (1.0 + law.c - 2.0 * root_c * std::cos(theta));
        if (x_theta <= 0.0) return (1.0 + std::cos(theta)) / std::numbers::pi;  // c == 1 at theta == 0
        return 2.0 * law.sigma2 * s * s / (std::numbers::pi * x_theta);
    };
    return integrate(integrand, 0.0, theta_upper, kQuadratureTolerance).value;
}

}  // namespace

MpLaw::MpLaw(double c_, double sigma2_) : c(c_), sigma2(sigma2_)
{
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("Marcenko-Pastur index c must be positive");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("Marcenko-Pastur scale must be positive");
}

Interval support_edges(const MpLaw& law)
{
    const double root_c = std::sqrt(law.c);
    return {law.sigma2 * (1.0 - root_c) * (1.0 - root_c), law.sigma2 * (1.0 + root_c) * (1.0 + root_c)};
}

double density(const MpLaw& law, double x)
{
    const auto [a, b] = support_edges(law);
    if (x < a || x > b || x <= 0.0) return 0.0;
    return std::sqrt((b - x) * (x - a)) / (2.0 * std::numbers::pi * x * law.c * law.sigma2);
}

double atom_at_zero(const MpLaw& law)
{
    return law.c > 1.0 ? 1.0 - 1.0 / law.c : 0.0;
}

double cdf(const MpLaw& law, double x)
{
    if (x < 0.0) return 0.0;
    const auto [a, b] = support_edges(law);
    const double atom = atom_at_zero(law);
    if (x <= a) return atom;
    if (x >= b) return 1.0;
    return std::min(1.0, atom + continuous_mass_below(law, x));
}

double quantile(const MpLaw& law, double q)
{
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    if (q <= atom_at_zero(law)) return 0.0;
    auto [lo, hi] = support_edges(law);
    for (int i = 0; i < kBisectionMaxIterations && hi - lo > kBisectionTolerance; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(law, mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double median(const MpLaw& law)
{
    return quantile(law, 0.5);
}

double log_moment(double c)
{
    if (!(c > 0.0 && c < 1.0)) throw DomainError("log-moment needs 0 < c < 1");
    if (c < 0.05) {
        // -sum_j c^j / (j (j + 1)); same function, without the 1 - 1 cancellation.
        double sum = 0.0;
        double power = c;
        for (int j = 1; j < 40; ++j) {
            sum += power / (j * (j + 1.0));
            power *= c;
        }
        return -sum;
    }
    return (c - 1.0) / c * std::log1p(-c) - 1.0;
}

}  // namespace hdpca::mp
