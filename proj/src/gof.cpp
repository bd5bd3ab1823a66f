#include "hdpca/gof.hpp"

#include <cmath>
#include <sstream>

#include "hdpca/errors.hpp"
#include "hdpca/mp.hpp"
#include "hdpca/special.hpp"
#include "hdpca/variance.hpp"

namespace hdpca {

namespace {

void require_low_ratio(const Spectrum& spec)
{
    if (!(spec.cn() < 1.0)) {
        std::ostringstream os;
        os << "likelihood ratio tests need p < n - 1 (c_n = " << spec.cn() << ")";
        throw RegimeError(os.str());
    }
}

}  // namespace

double l_star(const Spectrum& spec, std::size_t m)
{
    require_low_ratio(spec);
    if (m >= spec.p()) throw DomainError("spike count m must be smaller than the dimension p");
    const auto tail = spec.tail(m);
    double log_sum = 0.0;
    double sum = 0.0;
    for (double v : tail) {
        if (!(v > 0.0)) throw DomainError("noise eigenvalues must be positive");
        log_sum += std::log(v);
        sum += v;
    }
    const auto k = static_cast<double>(tail.size());
    return log_sum - k * std::log(sum / k);
}

ClrtTerms clrt_terms(const Spectrum& spec, std::size_t m, SubEdgePolicy policy)
{
    require_low_ratio(spec);
    ClrtTerms t;
    t.c = spec.cn();
    t.mean_shift = 0.5 * std::log1p(-t.c);
    t.h = mp::log_moment(t.c);
    t.sigma2_star = star_sigma2(spec, m, policy).value;
    if (m > 0) t.alpha_hats = estimate_spikes(spec, m, t.sigma2_star, policy).alpha_hats;

    double inverse_sum = 0.0;
    for (double a : t.alpha_hats) {
        t.eta += std::log1p(t.c * t.sigma2_star / a);
        inverse_sum += 1.0 / a;
    }
    t.beta = 1.0 - t.c / static_cast<double>(spec.p() - m) * (static_cast<double>(m) + t.sigma2_star * inverse_sum);
    if (!(t.beta > 0.0)) throw NumericError("corrupted spike estimates: beta is not positive");
    t.variance = -2.0 * std::log1p(-t.c) + 2.0 * t.c / t.beta * (1.0 / t.beta - 2.0);
    if (!(t.variance > 0.0)) throw DomainError("variance of the corrected statistic is not positive");
    return t;
}

long long lrt_degrees_of_freedom(std::size_t p, std::size_t m)
{
    const auto pp = static_cast<long long>(p);
    const auto mm = static_cast<long long>(m);
    return pp * (pp + 1) / 2 + mm * (mm - 1) / 2 - pp * mm - 1;
}

BartlettResult bartlett_lrt(const Spectrum& spec, std::size_t m)
{
    const long long q = lrt_degrees_of_freedom(spec.p(), m);
    if (q < 1) throw DomainError("over-parameterized model: no degrees of freedom left for the LRT");
    const double ls = l_star(spec, m);
    const auto n = static_cast<double>(spec.n());
    const auto p = static_cast<double>(spec.p());
    BartlettResult r;
    r.statistic = -(n - (2.0 * p + 11.0) / 6.0 - 2.0 * static_cast<double>(m) / 3.0) * ls;
    r.df = static_cast<double>(q);
    r.p_value = chi2_sf(r.statistic, r.df);
    return r;
}

GofReport clrt(const Spectrum& spec, std::size_t m, double level, SubEdgePolicy policy)
{
    if (!(level > 0.0 && level < 1.0)) throw DomainError("test level must lie in (0, 1)");
    GofReport r;
    r.m = m;
    r.level = level;
    r.l_star = l_star(spec, m);
    r.terms = clrt_terms(spec, m, policy);
    const auto& t = r.terms;
    const auto p = static_cast<double>(spec.p());
    const auto noise_dim = static_cast<double>(spec.p() - m);
    // The spike term enters the centering with a plus sign: E L* ~ m(c) + p h(c) - eta - (p - m) log beta.
    const double centered = r.l_star - t.mean_shift - p * t.h + t.eta + noise_dim * std::log(t.beta);
    r.delta_n = centered / std::sqrt(t.variance);
    r.p_value_clrt = normal_sf(r.delta_n);
    r.critical_value = normal_upper_quantile(level);
    r.reject_clrt = r.delta_n > r.critical_value;
    if (lrt_degrees_of_freedom(spec.p(), m) >= 1) {
        r.bartlett = bartlett_lrt(spec, m);
        r.reject_lrt = r.bartlett.p_value < level;
    }
    return r;
}

}  // namespace hdpca
