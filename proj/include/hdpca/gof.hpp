#pragma once

#include <cstddef>
#include <vector>

#include "hdpca/matrixcore.hpp"
#include "hdpca/spiked.hpp"

namespace hdpca {

/// Centering and scaling pieces of the corrected statistic, all at c_n.
struct ClrtTerms {
    double c = 0.0;
    double mean_shift = 0.0;  ///< log(1 - c) / 2
    double h = 0.0;           ///< MP log-moment
    double eta = 0.0;
    double beta = 1.0;
    double variance = 0.0;
    double sigma2_star = 0.0;
    std::vector<double> alpha_hats;
};

struct BartlettResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

struct GofReport {
    std::size_t m = 0;
    double level = 0.05;
    double l_star = 0.0;
    double delta_n = 0.0;
    double p_value_clrt = 1.0;
    double critical_value = 0.0;
    bool reject_clrt = false;
    BartlettResult bartlett;
    bool reject_lrt = false;
    ClrtTerms terms;
};

/// Sum over the noise eigenvalues of log(lambda_j / sigma2_hat), sigma2_hat the MLE.
/// Needs c_n < 1 and positive noise eigenvalues.
double l_star(const Spectrum& spec, std::size_t m);

ClrtTerms clrt_terms(const Spectrum& spec, std::size_t m, SubEdgePolicy policy = SubEdgePolicy::error);

/// Corrected LRT; rejects when the standardized statistic exceeds the upper
/// level quantile of N(0, 1). The Bartlett-corrected classical test is filled in
/// alongside whenever its degrees of freedom are positive.
GofReport clrt(const Spectrum& spec, std::size_t m, double level, SubEdgePolicy policy = SubEdgePolicy::error);

BartlettResult bartlett_lrt(const Spectrum& spec, std::size_t m);

/// p(p+1)/2 + m(m-1)/2 - pm - 1, as a signed count.
long long lrt_degrees_of_freedom(std::size_t p, std::size_t m);

}  // namespace hdpca
