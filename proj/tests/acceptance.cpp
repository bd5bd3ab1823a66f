// Acceptance run: one PASS/FAIL line per criterion. Gated statistics are
// recomputed here from the per-replication records rather than read from the
// library's aggregate rows.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hdpca/gof.hpp"
#include "hdpca/mp.hpp"
#include "hdpca/rank.hpp"
#include "hdpca/simlab.hpp"
#include "hdpca/spiked.hpp"
#include "hdpca/variance.hpp"
#include "support.hpp"

using namespace hdpca;
using namespace hdpca::sim;

namespace {

// Fixed before any acceptance run; never tuned.
constexpr std::uint64_t kSeed = 20240101;

// Tolerances.
constexpr double kTablePrintTol = 5e-4;
constexpr double kModel3RecomputedTol = 5e-4;
constexpr double kNormalMeanBound = 0.1;
constexpr double kNormalVarLow = 0.85;
constexpr double kNormalVarHigh = 1.15;
constexpr double kMleMeanM1 = 3.846, kMleMeanM1Tol = 0.01;
constexpr double kStarMeanM1 = 3.998, kStarMeanM1Tol = 0.006;
constexpr double kStarMeanM2 = 2.001, kStarMeanM2Tol = 0.006;
constexpr double kUsRatioMin = 1.3;
constexpr double kMedianRatioMin = 1.1;
constexpr double kKnRatioLow = 0.9, kKnRatioHigh = 1.2;
constexpr double kSureStarRateMin = 0.95;
constexpr double kSureRateMax = 0.55;
constexpr double kPcpNoisyStarMax = 1.05;
constexpr double kPcpNoisyPlainMin = 5.0;
constexpr double kSizeLow = 0.035, kSizeHigh = 0.065;
constexpr double kLrtSizeMin = 0.99;
constexpr double kSmallCSizeMax = 0.05;
constexpr double kPhiRoundTripTol = 1e-10;
constexpr double kMassTol = 1e-8;
constexpr double kLogMomentTol = 1e-7;
constexpr double kVTol = 1e-10;
constexpr double kKnResidualTol = 1e-8;

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void expect(bool ok, const std::string& what)
    {
        if (!ok) out_.pass = false;
        if (!out_.detail.empty()) out_.detail += "; ";
        out_.detail += (ok ? "" : "!") + what;
    }
    Outcome done() const { return out_; }

private:
    Outcome out_;
};

std::string fixed(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

using Columns = std::map<std::string, std::vector<double>>;

Columns columns_of(const SimReport& r, const std::string& setting)
{
    Columns out;
    for (const auto& rec : r.records)
        if (rec.setting == setting) out[rec.statistic].push_back(rec.value);
    return out;
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v)
{
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double mse(const std::vector<double>& v, double target)
{
    double s = 0.0;
    std::size_t k = 0;
    for (double x : v)
        if (std::isfinite(x)) {
            s += (x - target) * (x - target);
            ++k;
        }
    return s / static_cast<double>(k);
}

double rate_equal(const std::vector<double>& v, double target)
{
    double hits = 0.0;
    for (double x : v) hits += x == target ? 1.0 : 0.0;
    return hits / static_cast<double>(v.size());
}

Setting only(TableId id, const std::string& filter, std::size_t m = 1, double theta = 1.0)
{
    const auto s = filter_settings(default_settings(id, m, theta), filter);
    if (s.size() != 1) throw std::runtime_error("filter '" + filter + "' did not select exactly one setting");
    return s.front();
}

// Closed-form asymptotic bias written out directly from the model, c = p/n.
double closed_form_bias(const std::vector<double>& alphas, double sigma2, double p, double n)
{
    double inv = 0.0;
    for (double a : alphas) inv += 1.0 / a;
    const double m = static_cast<double>(alphas.size());
    return -(p / n) * sigma2 * (m + sigma2 * inv) / (p - m);
}

Outcome criterion1()
{
    Check ck;
    struct Row {
        int model;
        std::size_t p, n;
        double printed;
    };
    const Row rows[] = {
        {1, 100, 100, -0.1589}, {1, 400, 400, -0.0388},  {1, 800, 800, -0.0193},
        {2, 20, 100, -0.0704},  {2, 80, 400, -0.0162},   {2, 200, 1000, -0.0063},
    };
    for (const auto& r : rows) {
        const std::vector<double> a = r.model == 1 ? std::vector<double>{25, 16, 9} : std::vector<double>{4, 3};
        const double s2 = r.model == 1 ? 4.0 : 2.0;
        const SpikedModelSpec spec(a, s2, r.p, r.n);
        const double lib = theoretical_mle_bias(spec, spec.ratio());
        const double oracle = closed_form_bias(a, s2, static_cast<double>(r.p), static_cast<double>(r.n));
        ck.expect(std::abs(lib - r.printed) <= kTablePrintTol && std::abs(lib - oracle) <= 1e-14,
                  "M" + std::to_string(r.model) + "(" + std::to_string(r.p) + "," + std::to_string(r.n) + ") " +
                      fixed(lib));
    }
    // Model 3 at (150, 100): checked against the recomputed closed form; the tabulated -0.0795 disagrees.
    const SpikedModelSpec m3({12, 10, 8}, {1, 1, 2}, 3.0, 150, 100);
    const double lib = theoretical_mle_bias(m3, m3.ratio());
    const double oracle = closed_form_bias({12, 10, 8, 8}, 3.0, 150, 100);
    ck.expect(std::abs(lib - oracle) <= 1e-14 && std::abs(lib - (-0.16336)) <= kModel3RecomputedTol,
              "M3(150,100) " + fixed(lib) + " (tabulated -0.0795 disagrees)");
    return ck.done();
}

Outcome criterion2(const SimReport& stats, const std::string& m1)
{
    Check ck;
    const auto cols = columns_of(stats, m1);
    for (const char* z : {"z_mle", "z_star"}) {
        const double mu = mean(cols.at(z));
        const double var = variance(cols.at(z));
        ck.expect(std::abs(mu) <= kNormalMeanBound && var >= kNormalVarLow && var <= kNormalVarHigh,
                  std::string(z) + " mean " + fixed(mu) + " var " + fixed(var));
    }
    return ck.done();
}

Outcome criterion3(const SimReport& stats, const std::string& m1, const std::string& m2)
{
    Check ck;
    const auto c1 = columns_of(stats, m1);
    const auto c2 = columns_of(stats, m2);
    const double mle1 = mean(c1.at("mle"));
    const double star1 = mean(c1.at("star"));
    const double star2 = mean(c2.at("star"));
    ck.expect(std::abs(mle1 - kMleMeanM1) <= kMleMeanM1Tol, "M1 mle " + fixed(mle1));
    ck.expect(std::abs(star1 - kStarMeanM1) <= kStarMeanM1Tol, "M1 star " + fixed(star1));
    ck.expect(std::abs(star2 - kStarMeanM2) <= kStarMeanM2Tol, "M2 star " + fixed(star2));
    return ck.done();
}

Outcome criterion4()
{
    Check ck;
    const std::vector<Setting> s{only(TableId::mse_ratios, "model=1,p=100,n=100"),
                                 only(TableId::mse_ratios, "model=2,p=20,n=100")};
    const SimReport r = run_settings(TableId::mse_ratios, s, {1000, kSeed, 0, false});
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto cols = columns_of(r, s[k].label);
        const double s2 = std::get<SpikedModelSpec>(s[k].design).sigma2;
        const double star = mse(cols.at("star"), s2);
        const double us = mse(cols.at("us"), s2) / star;
        const double med = mse(cols.at("median"), s2) / star;
        const double kn = mse(cols.at("kn"), s2) / star;
        std::size_t kn_failed = 0;
        for (double x : cols.at("kn")) kn_failed += std::isfinite(x) ? 0 : 1;
        const std::string tag = k == 0 ? "M1" : "M2";
        ck.expect(us > kUsRatioMin, tag + " us/star " + fixed(us, 3));
        ck.expect(med > kMedianRatioMin, tag + " median/star " + fixed(med, 3));
        ck.expect(kn >= kKnRatioLow && kn <= kKnRatioHigh,
                  tag + " kn/star " + fixed(kn, 3) + " (" + std::to_string(kn_failed) + " kn failures excluded)");
    }
    return ck.done();
}

Outcome criterion5()
{
    Check ck;
    std::vector<Setting> s;
    for (const char* n : {"96", "128", "160"}) s.push_back(only(TableId::sure, std::string("m=5,p=64,n=") + n));
    const SimReport r = run_settings(TableId::sure, s, {300, kSeed, 0, false});
    for (const auto& setting : s) {
        const auto cols = columns_of(r, setting.label);
        const double rate = rate_equal(cols.at("sure_star"), 5.0);
        ck.expect(rate >= kSureStarRateMin, setting.label + " sure_star " + fixed(rate, 3));
    }
    const double plain = rate_equal(columns_of(r, s[0].label).at("sure"), 5.0);
    ck.expect(plain <= kSureRateMax, s[0].label + " sure " + fixed(plain, 3));
    return ck.done();
}

Outcome criterion6()
{
    Check ck;
    const Setting a = only(TableId::pcp, "N=100,T=60", 1, 1.0);
    const Setting b = only(TableId::pcp, "N=200,T=60", 3, 3.0);
    const Setting c = only(TableId::pcp, "N=100,T=20", 1, 1.0);
    const SimReport r = run_settings(TableId::pcp, {a, b, c}, {200, kSeed, 0, false});
    const auto ca = columns_of(r, a.label).at("pcp1_star");
    const auto cb = columns_of(r, b.label).at("pcp1_star");
    const auto cc = columns_of(r, c.label);
    ck.expect(mean(ca) == 1.0 && variance(ca) == 0.0, a.label + " pcp1_star mean " + fixed(mean(ca), 3) + " sd " +
                                                           fixed(std::sqrt(variance(ca)), 3));
    ck.expect(mean(cb) == 3.0 && variance(cb) == 0.0, b.label + " pcp1_star mean " + fixed(mean(cb), 3) + " sd " +
                                                           fixed(std::sqrt(variance(cb)), 3));
    const double star = mean(cc.at("pcp1_star"));
    const double plain = mean(cc.at("pcp1"));
    ck.expect(star <= kPcpNoisyStarMax, c.label + " pcp1_star " + fixed(star, 3));
    ck.expect(plain >= kPcpNoisyPlainMin, c.label + " pcp1 " + fixed(plain, 3));
    return ck.done();
}

Outcome criterion7()
{
    Check ck;
    const Setting m1 = only(TableId::clrt_size, "model=1,p=90,n=100");
    const Setting big = only(TableId::clrt_size, "model=4,p=300,n=500");
    const Setting small = only(TableId::clrt_size, "model=4,p=5,n=500");
    const SimReport r = run_settings(TableId::clrt_size, {m1, big, small}, {2000, kSeed, 0, false});
    for (const auto* s : {&m1, &big}) {
        const auto cols = columns_of(r, s->label);
        const double size = mean(cols.at("reject_clrt"));
        const double lrt = mean(cols.at("reject_lrt"));
        ck.expect(size >= kSizeLow && size <= kSizeHigh, s->label + " clrt " + fixed(size, 4));
        ck.expect(lrt >= kLrtSizeMin, s->label + " lrt " + fixed(lrt, 4));
    }
    const double size = mean(columns_of(r, small.label).at("reject_clrt"));
    ck.expect(size < kSmallCSizeMax, small.label + " clrt " + fixed(size, 4));
    return ck.done();
}

Outcome criterion8()
{
    Check ck;
    {
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double c = 0.05 + 2.95 * (i % 25) / 24.0;
            const double a_star = 1.0 + std::sqrt(c) * 1.001 + 40.0 * (i / 25) / 19.0;
            const double alpha = 1.7 * (a_star - 1.0);
            const double back = invert_phi(1.7 * phi(a_star, c), 1.7, c);
            worst = std::max(worst, std::abs(back - alpha) / alpha);
        }
        ck.expect(worst <= kPhiRoundTripTol, "phi round-trip " + fixed(worst * 1e12, 3) + "e-12");
    }
    {
        double worst = 0.0;
        for (double c : {0.05, 0.2, 0.5, 1.0, 1.5, 3.0}) {
            const mp::MpLaw law(c, 1.0);
            worst = std::max(worst, std::abs(oracle::mp_continuous_mass(c, 1.0) + mp::atom_at_zero(law) - 1.0));
        }
        ck.expect(worst <= kMassTol, "mp mass");
    }
    {
        double worst = 0.0;
        for (double c : {0.01, 0.1, 0.3, 0.5, 0.7, 0.9})
            worst = std::max(worst, std::abs(mp::log_moment(c) - oracle::mp_log_moment_quadrature(c)));
        ck.expect(worst <= kLogMomentTol, "h(c) vs quadrature");
    }
    {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const DataMatrix d(oracle::gaussian_matrix(20, 15, seed));
            for (std::size_t m = 0; m <= 15; ++m)
                worst = std::max(worst, std::abs(v_statistic(d, m) - oracle::explicit_v(d.values(), m)));
        }
        ck.expect(worst <= kVTol, "V shortcut vs residual");
    }
    {
        std::mt19937_64 rng(kSeed);
        bool ok = true;
        for (int i = 0; i < 1000; ++i) {
            const Spectrum sp(oracle::random_spectrum(3 + static_cast<std::size_t>(i % 60), rng), 200);
            ok = ok && l_star(sp, 0) <= 0.0;
        }
        ck.expect(ok, "L* <= 0 on 1000 spectra");
    }
    {
        std::mt19937_64 rng(kSeed + 1);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            auto ev = oracle::random_spectrum(50, rng, 0.6, 1.6);
            ev[0] = 40.0;
            ev[1] = 15.0;
            const Spectrum sp(ev, 250);
            const auto est = kn_sigma2(sp, 2);
            for (double x : kn_residuals(sp, 2, est.value, est.spikes)) worst = std::max(worst, std::abs(x));
        }
        ck.expect(worst <= kKnResidualTol, "KN residuals");
    }
    {
        const auto s = filter_settings(default_settings(TableId::clrt_size), "model=2,p=20");
        const SimReport a = run_settings(TableId::clrt_size, s, {200, kSeed, 1, false});
        const SimReport b = run_settings(TableId::clrt_size, s, {200, kSeed, 3, false});
        bool same = a.records.size() == b.records.size();
        for (std::size_t i = 0; same && i < a.records.size(); ++i)
            same = a.records[i].value == b.records[i].value && a.records[i].statistic == b.records[i].statistic;
        ck.expect(same, "simulate determinism");
    }
    return ck.done();
}

}  // namespace

int main()
{
    using clock = std::chrono::steady_clock;
    std::printf("acceptance run, seed %llu\n", static_cast<unsigned long long>(kSeed));
    std::fflush(stdout);

    const Setting m1 = only(TableId::estimator_stats, "model=1,p=100,n=100");
    const Setting m2 = only(TableId::estimator_stats, "model=2,p=20,n=100");
    SimReport stats;
    auto stats_report = [&]() -> const SimReport& {
        if (stats.records.empty()) stats = run_settings(TableId::estimator_stats, {m1, m2}, {1000, kSeed, 0, false});
        return stats;
    };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed-form bias", criterion1},
        {"normality of standardized statistics", [&] { return criterion2(stats_report(), m1.label); }},
        {"estimator means", [&] { return criterion3(stats_report(), m1.label, m2.label); }},
        {"MSE ordering", criterion4},
        {"SURE selection rates", criterion5},
        {"PCp spot rows", criterion6},
        {"CLRT and LRT sizes", criterion7},
        {"property suites", criterion8},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(clock::now() - start).count();
        if (!o.pass) ++failures;
        std::printf("%s %zu %s [%s] (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
