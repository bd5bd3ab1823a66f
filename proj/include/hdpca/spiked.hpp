#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hdpca/matrixcore.hpp"

namespace hdpca {

/// Population covariance with spectrum (alpha_1 .. alpha_K with multiplicities, 0, .., 0) + sigma2.
struct SpikedModelSpec {
    SpikedModelSpec(std::vector<double> alphas, std::vector<std::size_t> mults, double sigma2, std::size_t p,
                    std::size_t n);
    /// All multiplicities 1.
    SpikedModelSpec(std::vector<double> alphas, double sigma2, std::size_t p, std::size_t n);

    std::vector<double> alphas;  // strictly decreasing, > 0
    std::vector<std::size_t> mults;
    double sigma2;
    std::size_t p;
    std::size_t n;

    /// Total spike count, counting multiplicities.
    std::size_t m() const noexcept;
    /// Spikes repeated by multiplicity, length m(), non-increasing.
    std::vector<double> expanded_alphas() const;
    /// Diagonal of the population covariance, length p.
    std::vector<double> population_spectrum() const;
    /// p / n.
    double ratio() const noexcept { return static_cast<double>(p) / static_cast<double>(n); }
};

/// What estimate_spikes does with an eigenvalue at or below the bulk edge.
enum class SubEdgePolicy {
    error,          ///< throw SubEdgeError listing every offending index
    clamp_to_edge,  ///< report alpha_hat = sigma2 sqrt(c), the detectability boundary, and record the index
};

struct SpikeEstimates {
    std::vector<double> alpha_hats;
    std::size_t m = 0;
    /// 1-based indices clamped under SubEdgePolicy::clamp_to_edge.
    std::vector<std::size_t> clamped;
};

/// alpha + c alpha / (alpha - 1), in units alpha* = alpha / sigma2 + 1.
double phi(double alpha_star, double c);

/// Almost-sure limit of the sample eigenvalue for a population spike alpha:
/// alpha + sigma2 + sigma2 c (1 + sigma2 / alpha). Only meaningful when
/// is_detectable(alpha, sigma2, c); below that the eigenvalue sticks to the bulk edge.
double spike_limit(double alpha, double sigma2, double c);

/// Recovers alpha from a sample eigenvalue strictly above sigma2 (1 + sqrt c)^2
/// by taking the larger root of a^2 + (c - 1 - psi) a + psi = 0, psi = lambda / sigma2.
/// Throws SubEdgeError at or below the edge.
double invert_phi(double lambda, double sigma2, double c);

/// Inverts the m leading eigenvalues at c_n = p / (n - 1).
SpikeEstimates estimate_spikes(const Spectrum& spec, std::size_t m, double sigma2,
                               SubEdgePolicy policy = SubEdgePolicy::error);

/// b(sigma2) = sqrt(c/2) (m + sigma2 sum 1/alpha_i), m = alphas.size().
double bias_term(std::span<const double> alphas, double sigma2, double c);

/// alpha > sigma2 sqrt(c).
bool is_detectable(double alpha, double sigma2, double c);

/// Factor-model variant: alpha >= (1 + sqrt(N/T)) theta.
bool is_detectable_factor(double alpha, double theta, std::size_t n_series, std::size_t n_periods);

/// Asymptotic bias of the MLE: -sigma2 sqrt(2c) b(sigma2) / (p - m).
double theoretical_mle_bias(const SpikedModelSpec& model, double c);

}  // namespace hdpca
