#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hdpca/matrixcore.hpp"

namespace hdpca {

enum class Criterion {
    sure,
    sure_star,
    pcp1,
    pcp2,
    pcp3,
    pcp1_star,
    pcp2_star,
    pcp3_star,
    icp1,
    icp2,
    icp3,
    icp1_star,
    icp2_star,
    icp3_star,
};

std::string_view to_string(Criterion criterion);

struct RankReport {
    Criterion criterion = Criterion::sure;
    /// Candidate spike counts, aligned with values and sigma2_used.
    std::vector<std::size_t> candidates;
    /// +inf marks a candidate where the variance estimate is undefined.
    std::vector<double> values;
    std::vector<double> sigma2_used;
    std::size_t selected_m = 0;
    std::size_t m_max = 0;
    std::vector<std::string> notes;

    bool at_boundary() const noexcept { return selected_m == m_max && m_max > 0; }
};

enum class SureVariant { us, star };
enum class PenaltyFamily { pcp, icp };
enum class BaiNgVariant { plain, star };

/// Index of the smallest value; values within 1e-12 (relative to the scale of
/// the values) count as ties and go to the earlier index.
std::size_t argmin_with_ties(const std::vector<double>& values);

/// Stein unbiased risk estimate over m = 0..m_max. The star variant swaps the
/// Ulfarsson-Solo variance for the bias-corrected one, recomputed at each m;
/// candidates whose spikes fall under the bulk edge are marked infeasible.
RankReport sure(const Spectrum& spec, std::size_t m_max, SureVariant variant);

/// The three Bai-Ng criteria of one family over m = 1..m_max, with m_max doubling
/// as the pilot count m_0. Rows are the data (T), columns the series (N).
std::array<RankReport, 3> bai_ng(const DataMatrix& data, std::size_t m_max, PenaltyFamily family,
                                 BaiNgVariant variant);
std::array<RankReport, 3> bai_ng(const Spectrum& spec, std::size_t m_max, PenaltyFamily family,
                                 BaiNgVariant variant);

/// Mean squared residual after projecting the centered data onto its top-m
/// principal subspace, 0 <= m <= min(N, T).
double v_statistic(const DataMatrix& data, std::size_t m);
/// V(m) for m = 0..min(N, T) from a sample-covariance spectrum with divisor T - 1.
std::vector<double> v_profile(const Spectrum& spec);

}  // namespace hdpca
