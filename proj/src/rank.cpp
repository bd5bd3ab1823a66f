#include "hdpca/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hdpca/errors.hpp"
#include "hdpca/mp.hpp"
#include "hdpca/variance.hpp"

namespace hdpca {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kDegenerateGap = 1e-12;
constexpr double kResidualFloor = 1e-12;
constexpr int kMaxScaleRounds = 50;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sure_value(const Spectrum& spec, std::size_t m, double s)
{
    const auto p = static_cast<double>(spec.p());
    const auto n = static_cast<double>(spec.n());
    const double w = 1.0 - 1.0 / n;
    const auto md = static_cast<double>(m);
    const double tol = kDegenerateGap * spec[0];

    double inv = 0.0;
    double shrink = 0.0;
    double cross = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double lj = spec[j];
        inv += 1.0 / lj;
        shrink += 1.0 - s / lj;
        for (std::size_t i = m; i < spec.p(); ++i) {
            const double gap = lj - spec[i];
            if (std::abs(gap) < tol) {
                std::ostringstream os;
                os << "degenerate spectrum: eigenvalues " << j + 1 << " and " << i + 1 << " coincide";
                throw NumericError(os.str());
            }
            cross += (lj - s) / gap;
        }
    }
    const double c_m = 4.0 * w * s / n * cross + 2.0 * w * s / n * md * (md - 1.0) - 2.0 * w * s / n * (p - 1.0) * shrink;
    return (p - md) * s + s * s * inv + 2.0 * s * w * md - 2.0 * s * s * w * inv + 4.0 * w * s * s / n * inv + c_m;
}

// Penalty weight g(N, T) multiplying m times the scale.
double penalty_weight(int which, double N, double T)
{
    const double c2 = std::min(N, T);
    switch (which) {
        case 0: return (N + T) / (N * T) * std::log(N * T / (N + T));
        case 1: return (N + T) / (N * T) * std::log(c2);
        default: return std::log(c2) / c2;
    }
}

Criterion bai_ng_tag(PenaltyFamily family, BaiNgVariant variant, int which)
{
    static constexpr Criterion tags[2][2][3] = {
        {{Criterion::pcp1, Criterion::pcp2, Criterion::pcp3},
         {Criterion::pcp1_star, Criterion::pcp2_star, Criterion::pcp3_star}},
        {{Criterion::icp1, Criterion::icp2, Criterion::icp3},
         {Criterion::icp1_star, Criterion::icp2_star, Criterion::icp3_star}},
    };
    return tags[family == PenaltyFamily::icp][variant == BaiNgVariant::star][which];
}

// Bias-corrected noise variance at m for the penalty scale. Spikes under the
// bulk edge are clamped rather than rejected so every candidate has a scale,
// and an all-zero noise tail (noiseless data) gives scale 0.
double star_scale(const Spectrum& spec, std::size_t m)
{
    m = std::min(m, spec.n() - 2);
    double tail = 0.0;
    for (double v : spec.tail(m)) tail += v;
    if (!(tail > 0.0)) return 0.0;
    return star_sigma2(spec, m, SubEdgePolicy::clamp_to_edge).value;
}

std::vector<double> pcp_values(const std::vector<double>& v, std::size_t m_max, double scale, double g)
{
    std::vector<double> out;
    for (std::size_t m = 1; m <= m_max; ++m) out.push_back(v[m] + static_cast<double>(m) * scale * g);
    return out;
}

}  // namespace

std::string_view to_string(Criterion criterion)
{
    switch (criterion) {
        case Criterion::sure: return "sure";
        case Criterion::sure_star: return "sure_star";
        case Criterion::pcp1: return "pcp1";
        case Criterion::pcp2: return "pcp2";
        case Criterion::pcp3: return "pcp3";
        case Criterion::pcp1_star: return "pcp1_star";
        case Criterion::pcp2_star: return "pcp2_star";
        case Criterion::pcp3_star: return "pcp3_star";
        case Criterion::icp1: return "icp1";
        case Criterion::icp2: return "icp2";
        case Criterion::icp3: return "icp3";
        case Criterion::icp1_star: return "icp1_star";
        case Criterion::icp2_star: return "icp2_star";
        case Criterion::icp3_star: return "icp3_star";
    }
    return "?";
}

std::size_t argmin_with_ties(const std::vector<double>& values)
{
    if (values.empty()) throw DomainError("no candidates to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double a = values[i];
        const double b = values[best];
        if (std::isnan(a)) continue;
        if (std::isnan(b) || (a == -kInf && b != -kInf)) {
            best = i;
            continue;
        }
        if (!std::isfinite(a) || !std::isfinite(b)) {
            if (a < b) best = i;
            continue;
        }
        const double scale = std::max({1.0, std::abs(a), std::abs(b)});
        if (a < b - kTieTolerance * scale) best = i;
    }
    if (values[best] == kInf || std::isnan(values[best])) throw NumericError("no feasible candidate");
    return best;
}

RankReport sure(const Spectrum& spec, std::size_t m_max, SureVariant variant)
{
    if (m_max >= std::min(spec.p(), spec.n() - 1)) throw DomainError("m_max must be below min(p, n - 1)");
    RankReport report;
    report.criterion = variant == SureVariant::us ? Criterion::sure : Criterion::sure_star;
    report.m_max = m_max;

    double mp_med = 0.0;
    if (variant == SureVariant::us) mp_med = mp::median(mp::MpLaw(spec.ratio(), 1.0));

    std::size_t infeasible = 0;
    for (std::size_t m = 0; m <= m_max; ++m) {
        report.candidates.push_back(m);
        double s = 0.0;
        if (variant == SureVariant::us) {
            s = us_sigma2(spec, m, mp_med).value;
        } else {
            try {
                s = star_sigma2(spec, m).value;
            } catch (const SubEdgeError&) {
                report.sigma2_used.push_back(kInf);
                report.values.push_back(kInf);
                ++infeasible;
                continue;
            }
        }
        report.sigma2_used.push_back(s);
        report.values.push_back(sure_value(spec, m, s));
    }
    if (infeasible > 0)
        report.notes.push_back(std::to_string(infeasible) + " candidate(s) infeasible: spike below the bulk edge");
    report.selected_m = report.candidates[argmin_with_ties(report.values)];
    return report;
}

std::vector<double> v_profile(const Spectrum& spec)
{
    const auto N = static_cast<double>(spec.p());
    const auto T = static_cast<double>(spec.n());
    const std::size_t top = std::min(spec.p(), spec.n());
    const double factor = (T - 1.0) / (N * T);

    // Suffix sums from the small end keep the tail accurate.
    std::vector<double> tail(spec.p() + 1, 0.0);
    for (std::size_t j = spec.p(); j-- > 0;) tail[j] = tail[j + 1] + spec[j];

    std::vector<double> v(top + 1);
    for (std::size_t m = 0; m <= top; ++m) {
        v[m] = factor * tail[m];
        if (v[m] <= kResidualFloor * factor * tail[0]) v[m] = 0.0;
    }
    return v;
}

double v_statistic(const DataMatrix& data, std::size_t m)
{
    const std::size_t top = std::min(data.rows(), data.cols());
    if (m > top) throw DomainError("m must not exceed min(N, T)");
    return v_profile(spectrum(data))[m];
}

std::array<RankReport, 3> bai_ng(const DataMatrix& data, std::size_t m_max, PenaltyFamily family,
                                 BaiNgVariant variant)
{
    return bai_ng(spectrum(data), m_max, family, variant);
}

std::array<RankReport, 3> bai_ng(const Spectrum& spec, std::size_t m_max, PenaltyFamily family,
                                 BaiNgVariant variant)
{
    if (m_max < 1) throw DomainError("m_max must be at least 1");
    if (m_max >= std::min(spec.p(), spec.n())) throw DomainError("m_max must be below min(N, T)");
    const auto N = static_cast<double>(spec.p());
    const auto T = static_cast<double>(spec.n());
    const std::vector<double> v = v_profile(spec);

    std::array<RankReport, 3> out;
    for (int which = 0; which < 3; ++which) {
        RankReport& r = out[static_cast<std::size_t>(which)];
        r.criterion = bai_ng_tag(family, variant, which);
        r.m_max = m_max;
        for (std::size_t m = 1; m <= m_max; ++m) r.candidates.push_back(m);
        const double g = penalty_weight(which, N, T);

        if (family == PenaltyFamily::icp) {
            for (std::size_t m = 1; m <= m_max; ++m)
                r.values.push_back((v[m] > 0.0 ? std::log(v[m]) : -kInf) + static_cast<double>(m) * g);
            r.sigma2_used.assign(m_max, v[m_max]);
            if (variant == BaiNgVariant::star)
                r.notes.push_back("the logarithmic family has no variance scale; starred values equal the plain ones");
            r.selected_m = r.candidates[argmin_with_ties(r.values)];
            continue;
        }

        if (variant == BaiNgVariant::plain) {
            const double scale = v[m_max];
            r.values = pcp_values(v, m_max, scale, g);
            r.sigma2_used.assign(m_max, scale);
            r.selected_m = r.candidates[argmin_with_ties(r.values)];
            continue;
        }

        // Starred scale: start from the pilot m_0 = m_max, then re-evaluate the
        // bias-corrected variance at the selected count until the selection is stable.
        std::set<std::size_t> visited;
        std::size_t pilot = m_max;
        int rounds = 0;
        double scale = 0.0;
        while (true) {
            visited.insert(pilot);
            scale = star_scale(spec, pilot);
            r.values = pcp_values(v, m_max, scale, g);
            r.selected_m = r.candidates[argmin_with_ties(r.values)];
            ++rounds;
            if (r.selected_m == pilot) break;
            if (visited.count(r.selected_m) || rounds >= kMaxScaleRounds) {
                r.notes.push_back("variance scale did not settle; kept the last selection");
                break;
            }
            pilot = r.selected_m;
        }
        r.sigma2_used.assign(m_max, scale);
        r.notes.push_back("scale evaluated at m = " + std::to_string(pilot) + " after " + std::to_string(rounds) +
                          " round(s)");
    }
    return out;
}

}  // namespace hdpca
