#include "hdpca/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hdpca/errors.hpp"
#include "hdpca/mp.hpp"

namespace hdpca {

namespace {

constexpr int kKnMaxIterations = 200;
constexpr double kKnTolerance = 1e-10;

void require_noise_dimension(const Spectrum& spec, std::size_t m)
{
    if (m >= spec.p()) throw DomainError("spike count m must be smaller than the dimension p");
}

double tail_mean(const Spectrum& spec, std::size_t m)
{
    const auto tail = spec.tail(m);
    return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());
}

// Larger root of rho^2 - rho (lambda + s - s (p - m)/n) + lambda s = 0.
double kn_rho(double lambda, double sigma2, double noise_ratio, std::size_t j)
{
    const double b = lambda + sigma2 - sigma2 * noise_ratio;
    const double disc = b * b - 4.0 * lambda * sigma2;
    if (disc < 0.0) {
        std::ostringstream os;
        os << "Kritchman-Nadler quadratic for spike " << j << " has complex roots (discriminant " << disc << ")";
        throw NumericError(os.str());
    }
    return 0.5 * (b + std::sqrt(disc));
}

double kn_update(const Spectrum& spec, std::size_t m, std::span<const double> rho)
{
    double total = 0.0;
    for (double v : spec.tail(m)) total += v;
    for (std::size_t j = 0; j < m; ++j) total += spec[j] - rho[j];
    return total / static_cast<double>(spec.p() - m);
}

}  // namespace

std::string_view to_string(VarianceMethod method)
{
    switch (method) {
        case VarianceMethod::mle: return "mle";
        case VarianceMethod::star: return "star";
        case VarianceMethod::kn: return "kn";
        case VarianceMethod::us: return "us";
        case VarianceMethod::median: return "median";
    }
    return "?";
}

VarianceMethod parse_variance_method(std::string_view name)
{
    for (auto m : {VarianceMethod::mle, VarianceMethod::star, VarianceMethod::kn, VarianceMethod::us,
                   VarianceMethod::median})
        if (to_string(m) == name) return m;
    throw InputError("unknown variance method '" + std::string(name) + "'");
}

double sample_median(std::span<const double> values)
{
    if (values.empty()) throw DomainError("median of an empty sample");
    std::vector<double> v(values.begin(), values.end());
    const std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    const double upper = v[k];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
    return 0.5 * (lower + upper);
}

VarianceEstimate mle_sigma2(const Spectrum& spec, std::size_t m)
{
    require_noise_dimension(spec, m);
    VarianceEstimate est;
    est.method = VarianceMethod::mle;
    est.m_used = m;
    est.value = tail_mean(spec, m);
    if (!(est.value > 0.0)) throw DomainError("all noise eigenvalues are zero; m must be below the rank");
    const auto noise_dim = static_cast<double>(spec.p() - m);
    est.se = est.value * std::sqrt(2.0 / noise_dim) / std::sqrt(static_cast<double>(spec.n()));
    return est;
}

VarianceEstimate star_sigma2(const Spectrum& spec, std::size_t m, SubEdgePolicy policy)
{
    const VarianceEstimate mle = mle_sigma2(spec, m);
    const double c = spec.cn();
    const auto noise_dim = static_cast<double>(spec.p() - m);

    VarianceEstimate est;
    est.method = VarianceMethod::star;
    est.m_used = m;
    est.value = mle.value;
    if (m > 0) {
        SpikeEstimates spikes = estimate_spikes(spec, m, mle.value, policy);
        const double b = bias_term(spikes.alpha_hats, mle.value, c);
        est.value = mle.value + b / noise_dim * mle.value * std::sqrt(2.0 * c);
        est.spikes = std::move(spikes.alpha_hats);
        if (!spikes.clamped.empty()) {
            std::ostringstream os;
            os << "spike estimate(s) clamped to the detectability boundary at index";
            for (auto j : spikes.clamped) os << ' ' << j;
            est.diagnostics.push_back(os.str());
        }
    }
    est.se = est.value * std::sqrt(2.0 * c) / noise_dim;
    return est;
}

VarianceEstimate kn_sigma2(const Spectrum& spec, std::size_t m)
{
    if (m < 1) throw DomainError("Kritchman-Nadler estimator needs m >= 1");
    require_noise_dimension(spec, m);
    const double noise_ratio = static_cast<double>(spec.p() - m) / static_cast<double>(spec.n());

    double sigma2 = mle_sigma2(spec, m).value;
    std::vector<double> rho(m);
    double step = 0.0;
    for (int it = 1; it <= kKnMaxIterations; ++it) {
        for (std::size_t j = 0; j < m; ++j) rho[j] = kn_rho(spec[j], sigma2, noise_ratio, j + 1);
        const double next = kn_update(spec, m, rho);
        step = std::abs(next - sigma2);
        sigma2 = next;
        if (!(sigma2 > 0.0)) throw NumericError("Kritchman-Nadler iteration left the positive half-line");
        if (step < kKnTolerance || step < kKnTolerance * sigma2) {
            for (std::size_t j = 0; j < m; ++j) rho[j] = kn_rho(spec[j], sigma2, noise_ratio, j + 1);
            VarianceEstimate est;
            est.method = VarianceMethod::kn;
            est.m_used = m;
            est.value = sigma2;
            est.iterations = it;
            est.spikes = rho;
            return est;
        }
    }
    throw ConvergenceError("Kritchman-Nadler iteration did not converge", kKnMaxIterations, step);
}

VarianceEstimate us_sigma2(const Spectrum& spec, std::size_t m)
{
    require_noise_dimension(spec, m);
    return us_sigma2(spec, m, mp::median(mp::MpLaw(spec.ratio(), 1.0)));
}

VarianceEstimate us_sigma2(const Spectrum& spec, std::size_t m, double mp_median)
{
    require_noise_dimension(spec, m);
    if (!(mp_median > 0.0)) throw DomainError("Marcenko-Pastur median is zero for p/n >= 2; estimator undefined");
    VarianceEstimate est;
    est.method = VarianceMethod::us;
    est.m_used = m;
    est.value = sample_median(spec.tail(m)) / mp_median;
    if (!(est.value > 0.0)) throw DomainError("median noise eigenvalue is zero");
    return est;
}

VarianceEstimate median_sigma2(const DataMatrix& data)
{
    const Eigen::MatrixXd centered = center_columns(data.values());
    const Eigen::VectorXd mean_squares = centered.colwise().squaredNorm().transpose() / static_cast<double>(data.rows());
    VarianceEstimate est;
    est.method = VarianceMethod::median;
    est.value = sample_median(std::span<const double>(mean_squares.data(), static_cast<std::size_t>(mean_squares.size())));
    est.diagnostics.push_back("columns centered before squaring");
    if (!(est.value > 0.0)) throw DomainError("median column variance is zero");
    return est;
}

std::vector<double> kn_residuals(const Spectrum& spec, std::size_t m, double sigma2, std::span<const double> rho)
{
    if (rho.size() != m) throw DomainError("one rho per spike is required");
    const double noise_ratio = static_cast<double>(spec.p() - m) / static_cast<double>(spec.n());
    std::vector<double> r;
    r.push_back(sigma2 - kn_update(spec, m, rho));
    for (std::size_t j = 0; j < m; ++j)
        r.push_back(rho[j] * rho[j] - rho[j] * (spec[j] + sigma2 - sigma2 * noise_ratio) + spec[j] * sigma2);
    return r;
}

}  // namespace hdpca
