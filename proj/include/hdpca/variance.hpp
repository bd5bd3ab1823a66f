#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdpca/matrixcore.hpp"
#include "hdpca/spiked.hpp"

namespace hdpca {

enum class VarianceMethod { mle, star, kn, us, median };

std::string_view to_string(VarianceMethod method);
/// Throws InputError for unknown names.
VarianceMethod parse_variance_method(std::string_view name);

struct VarianceEstimate {
    double value = 0.0;
    VarianceMethod method = VarianceMethod::mle;
    std::optional<double> se;
    std::optional<int> iterations;
    std::size_t m_used = 0;
    /// Spike-side unknowns solved alongside sigma2: alpha_hat for star, rho_hat for kn.
    std::vector<double> spikes;
    std::vector<std::string> diagnostics;
};

/// Mean of the p - m smallest eigenvalues. The standard error is the classical
/// fixed-p one, value sqrt(2 / (p - m)) / sqrt(n).
VarianceEstimate mle_sigma2(const Spectrum& spec, std::size_t m);

/// MLE plus the plug-in bias correction b(sigma2_hat) sigma2_hat sqrt(2 c_n) / (p - m),
/// with spikes recovered by inverting phi at the MLE. Standard error value sqrt(2 c_n) / (p - m).
VarianceEstimate star_sigma2(const Spectrum& spec, std::size_t m, SubEdgePolicy policy = SubEdgePolicy::error);

/// Joint solution of the Kritchman-Nadler system by fixed-point iteration on sigma2,
/// starting from the MLE. Needs m >= 1.
VarianceEstimate kn_sigma2(const Spectrum& spec, std::size_t m);

/// Median of the noise eigenvalues over the median of the Marcenko-Pastur law
/// with index p/n and unit scale.
VarianceEstimate us_sigma2(const Spectrum& spec, std::size_t m);
/// Same, reusing a precomputed Marcenko-Pastur median for index p/n.
VarianceEstimate us_sigma2(const Spectrum& spec, std::size_t m, double mp_median);

/// Median over columns of the column mean square (divisor n) after centering.
VarianceEstimate median_sigma2(const DataMatrix& data);

/// Sample median; even counts average the two central order statistics.
double sample_median(std::span<const double> values);

/// Residuals of the Kritchman-Nadler system at (sigma2, rho): the sigma2
/// equation first, then one quadratic per spike.
std::vector<double> kn_residuals(const Spectrum& spec, std::size_t m, double sigma2, std::span<const double> rho);

}  // namespace hdpca
