#include "hdpca/spiked.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hdpca/errors.hpp"

namespace hdpca {

SpikedModelSpec::SpikedModelSpec(std::vector<double> alphas_, std::vector<std::size_t> mults_, double sigma2_,
                                 std::size_t p_, std::size_t n_)
    : alphas(std::move(alphas_)), mults(std::move(mults_)), sigma2(sigma2_), p(p_), n(n_)
{
    if (alphas.size() != mults.size()) throw DomainError("one multiplicity per spike value is required");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("noise variance must be positive");
    if (n < 2) throw DomainError("sample size must be at least 2");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i])) throw DomainError("spike values must be positive");
        if (mults[i] < 1) throw DomainError("multiplicities must be at least 1");
        if (i > 0 && !(alphas[i] < alphas[i - 1])) throw DomainError("spike values must be strictly decreasing");
    }
    if (m() >= p) throw DomainError("spike count must be smaller than the dimension");
}

SpikedModelSpec::SpikedModelSpec(std::vector<double> alphas_, double sigma2_, std::size_t p_, std::size_t n_)
    : SpikedModelSpec(alphas_, std::vector<std::size_t>(alphas_.size(), 1), sigma2_, p_, n_)
{
}

std::size_t SpikedModelSpec::m() const noexcept
{
    return std::accumulate(mults.begin(), mults.end(), std::size_t{0});
}

std::vector<double> SpikedModelSpec::expanded_alphas() const
{
    std::vector<double> out;
    out.reserve(m());
    for (std::size_t i = 0; i < alphas.size(); ++i) out.insert(out.end(), mults[i], alphas[i]);
    return out;
}

std::vector<double> SpikedModelSpec::population_spectrum() const
{
    std::vector<double> out(p, sigma2);
    const auto spikes = expanded_alphas();
    for (std::size_t i = 0; i < spikes.size(); ++i) out[i] += spikes[i];
    return out;
}

double phi(double alpha_star, double c)
{
    if (alpha_star == 1.0) throw DomainError("phi has a pole at alpha* = 1");
    return alpha_star + c * alpha_star / (alpha_star - 1.0);
}

double spike_limit(double alpha, double sigma2, double c)
{
    return alpha + sigma2 + sigma2 * c * (1.0 + sigma2 / alpha);
}

double invert_phi(double lambda, double sigma2, double c)
{
    if (!(sigma2 > 0.0)) throw DomainError("noise variance must be positive");
    const double root_c = std::sqrt(c);
    const double edge = (1.0 + root_c) * (1.0 + root_c);
    const double psi = lambda / sigma2;
    if (!(psi > edge)) throw SubEdgeError({1}, sigma2 * edge);
    const double half_b = 0.5 * (1.0 + psi - c);
    const double disc = half_b * half_b - psi;
    const double alpha_star = half_b + std::sqrt(std::max(disc, 0.0));
    return sigma2 * (alpha_star - 1.0);
}

SpikeEstimates estimate_spikes(const Spectrum& spec, std::size_t m, double sigma2, SubEdgePolicy policy)
{
    if (m >= std::min(spec.p(), spec.n() - 1)) throw DomainError("spike count must be below min(p, n - 1)");
    const double c = spec.cn();
    const double root_c = std::sqrt(c);
    const double edge = sigma2 * (1.0 + root_c) * (1.0 + root_c);

    SpikeEstimates out;
    out.m = m;
    out.alpha_hats.reserve(m);
    std::vector<std::size_t> below;
    for (std::size_t j = 0; j < m; ++j) {
        if (spec[j] > edge) {
            out.alpha_hats.push_back(invert_phi(spec[j], sigma2, c));
        } else {
            below.push_back(j + 1);
            out.alpha_hats.push_back(sigma2 * root_c);
        }
    }
    if (!below.empty()) {
        if (policy == SubEdgePolicy::error) throw SubEdgeError(std::move(below), edge);
        out.clamped = std::move(below);
    }
    return out;
}

double bias_term(std::span<const double> alphas, double sigma2, double c)
{
    double inverse_sum = 0.0;
    for (double a : alphas) {
        if (!(a > 0.0)) throw DomainError("bias term needs positive spike values");
        inverse_sum += 1.0 / a;
    }
    return std::sqrt(c / 2.0) * (static_cast<double>(alphas.size()) + sigma2 * inverse_sum);
}

bool is_detectable(double alpha, double sigma2, double c)
{
    return alpha > sigma2 * std::sqrt(c);
}

bool is_detectable_factor(double alpha, double theta, std::size_t n_series, std::size_t n_periods)
{
    return alpha >= (1.0 + std::sqrt(static_cast<double>(n_series) / static_cast<double>(n_periods))) * theta;
}

double theoretical_mle_bias(const SpikedModelSpec& model, double c)
{
    const auto spikes = model.expanded_alphas();
    const double b = bias_term(spikes, model.sigma2, c);
    return -model.sigma2 * std::sqrt(2.0 * c) * b / static_cast<double>(model.p - model.m());
}

}  // namespace hdpca
