#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "hdpca/errors.hpp"
#include "hdpca/mp.hpp"
#include "hdpca/variance.hpp"
#include "support.hpp"

using namespace hdpca;

namespace {

Spectrum spiked_spectrum(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto noise = oracle::random_spectrum(60, rng, 0.6, 1.6);
    noise[0] = 30.0;
    noise[1] = 18.0;
    return Spectrum(noise, 200);
}

}  // namespace

TEST(VarianceMethod, NamesRoundTrip)
{
    for (auto m : {VarianceMethod::mle, VarianceMethod::star, VarianceMethod::kn, VarianceMethod::us,
                   VarianceMethod::median})
        EXPECT_EQ(parse_variance_method(to_string(m)), m);
    EXPECT_THROW(parse_variance_method("ols"), InputError);
}

TEST(Mle, MeanOfNoiseEigenvalues)
{
    const Spectrum sp({9, 4, 2, 1}, 50);
    EXPECT_DOUBLE_EQ(mle_sigma2(sp, 2).value, 1.5);
    EXPECT_DOUBLE_EQ(mle_sigma2(sp, 0).value, 4.0);
    EXPECT_NEAR(*mle_sigma2(sp, 2).se, 1.5 * std::sqrt(2.0 / 2.0) / std::sqrt(50.0), 1e-15);
    EXPECT_THROW(mle_sigma2(sp, 4), DomainError);
    EXPECT_THROW(mle_sigma2(Spectrum({9, 0, 0}, 50), 1), DomainError);
}

TEST(Mle, FlatSpectrumRecoversLevel)
{
    const Spectrum sp(std::vector<double>(20, 3.25), 100);
    EXPECT_DOUBLE_EQ(mle_sigma2(sp, 0).value, 3.25);
}

TEST(Star, HandComputedCorrection)
{
    const Spectrum sp({30.0, 1.2, 1.0, 0.8, 1.0, 1.0}, 61);  // c_n = 0.1
    const double c = 0.1;
    const double s = mle_sigma2(sp, 1).value;
    const double psi = 30.0 / s;
    const double half_b = 0.5 * (1.0 + psi - c);
    const double alpha = s * (half_b + std::sqrt(half_b * half_b - psi) - 1.0);
    const double b = std::sqrt(c / 2.0) * (1.0 + s / alpha);
    const double expected = s + b * s * std::sqrt(2.0 * c) / 5.0;
    const auto est = star_sigma2(sp, 1);
    EXPECT_NEAR(est.value, expected, 1e-13);
    ASSERT_EQ(est.spikes.size(), 1u);
    EXPECT_NEAR(est.spikes[0], alpha, 1e-12);
}

TEST(Star, NeverBelowMleProperty)
{
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Spectrum sp = spiked_spectrum(seed);
        for (std::size_t m : {0u, 1u, 2u})
            EXPECT_GE(star_sigma2(sp, m).value, mle_sigma2(sp, m).value) << seed << " " << m;
    }
}

TEST(Star, SubEdgeFollowsPolicy)
{
    const Spectrum sp({1.1, 1.0, 0.9, 1.0, 1.0, 1.05}, 10);
    EXPECT_THROW(star_sigma2(sp, 1), SubEdgeError);
    const auto est = star_sigma2(sp, 1, SubEdgePolicy::clamp_to_edge);
    EXPECT_FALSE(est.diagnostics.empty());
    EXPECT_GT(est.value, mle_sigma2(sp, 1).value);
}

TEST(Estimators, ScaleEquivarianceProperty)
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const Spectrum sp = spiked_spectrum(seed + 1000);
        const double k = scale(rng);
        const Spectrum sk = sp.scaled(k);
        EXPECT_NEAR(mle_sigma2(sk, 2).value, k * mle_sigma2(sp, 2).value, 1e-12 * k);
        EXPECT_NEAR(star_sigma2(sk, 2).value, k * star_sigma2(sp, 2).value, 1e-11 * k);
        EXPECT_NEAR(us_sigma2(sk, 2).value, k * us_sigma2(sp, 2).value, 1e-11 * k);
        EXPECT_NEAR(kn_sigma2(sk, 2).value, k * kn_sigma2(sp, 2).value, 1e-8 * k);
    }
}

TEST(Kn, SolvesItsSystemProperty)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Spectrum sp = spiked_spectrum(seed + 500);
        const auto est = kn_sigma2(sp, 2);
        ASSERT_TRUE(est.iterations.has_value());
        EXPECT_LE(*est.iterations, 200);
        const auto r = kn_residuals(sp, 2, est.value, est.spikes);
        for (double x : r) EXPECT_LT(std::abs(x), 1e-8 * std::max(1.0, sp[0] * est.value)) << seed;
        EXPECT_GT(est.value, 0.0);
    }
    EXPECT_THROW(kn_sigma2(spiked_spectrum(1), 0), DomainError);
}

TEST(Us, NoiseMedianOverMarcenkoPastur)
{
    const Spectrum sp = spiked_spectrum(3);
    const auto tail = sp.tail(2);
    std::vector<double> sorted(tail.begin(), tail.end());
    std::sort(sorted.begin(), sorted.end());
    const double med = 0.5 * (sorted[28] + sorted[29]);
    const double expected = med / mp::median(mp::MpLaw(60.0 / 200.0, 1.0));
    EXPECT_NEAR(us_sigma2(sp, 2).value, expected, 1e-12);
    EXPECT_DOUBLE_EQ(us_sigma2(sp, 2, 0.5).value, med / 0.5);
}

TEST(SampleMedian, AgreesWithSortOracleProperty)
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 300; ++trial) {
        auto v = oracle::random_spectrum(static_cast<std::size_t>(len(rng)), rng);
        auto s = v;
        std::sort(s.begin(), s.end());
        const std::size_t k = s.size();
        const double oracle = k % 2 ? s[k / 2] : 0.5 * (s[k / 2 - 1] + s[k / 2]);
        EXPECT_DOUBLE_EQ(sample_median(v), oracle);
    }
}

TEST(MedianEstimator, CentersAndUsesDivisorN)
{
    Eigen::MatrixXd x(4, 3);
    x << 1, 5, 2,  //
        -1, 5, 4,  //
        1, 5, 6,   //
        -1, 5, 8;
    // Column mean squares after centering: 1, 0, 5.
    EXPECT_DOUBLE_EQ(median_sigma2(DataMatrix(x)).value, 1.0);
}
