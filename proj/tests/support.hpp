#pragma once

// Shared generators and independent oracles for the unit and acceptance tests.
// Oracles deliberately avoid the library's own numerics (its quadrature, its
// eigenvalue shortcuts) so each check compares two separate routes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hdpca/matrixcore.hpp"

namespace hdpca::oracle {

inline Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = normal(rng);
    return x;
}

/// p positive eigenvalues, log-uniform over [lo, hi].
inline std::vector<double> random_spectrum(std::size_t p, std::mt19937_64& rng, double lo = 0.05, double hi = 50.0)
{
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    std::vector<double> v(p);
    for (auto& x : v) x = std::exp(u(rng));
    return v;
}

/// Mean squared residual after projecting the centered T x N matrix onto its
/// top-m right singular vectors, computed with an SVD and an explicit residual.
inline double explicit_v(const Eigen::MatrixXd& x, std::size_t m)
{
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd v = svd.matrixV().leftCols(static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd residual = centered - centered * v * v.transpose();
    return residual.squaredNorm() / static_cast<double>(x.rows() * x.cols());
}

/// Continuous mass of the Marcenko-Pastur law, integrating the density in x directly.
inline double mp_continuous_mass(double c, double sigma2)
{
    const double a = sigma2 * (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c));
    const double b = sigma2 * (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
    auto f = [&](double x) {
        const double r = (b - x) * (x - a);
        return r > 0.0 ? std::sqrt(r) / (2.0 * std::numbers::pi * x * c * sigma2) : 0.0;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b);
}

/// E log(x) under the unit-scale Marcenko-Pastur law, 0 < c < 1, by direct quadrature.
inline double mp_log_moment_quadrature(double c)
{
    const double a = (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c));
    const double b = (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
    auto f = [&](double x) {
        const double r = (b - x) * (x - a);
        return r > 0.0 ? std::log(x) * std::sqrt(r) / (2.0 * std::numbers::pi * x * c) : 0.0;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b);
}

/// Upper chi-square tail by quadrature of the density on [x, x + 60 sqrt(2 df) + 200].
inline double chi2_sf_quadrature(double x, double df)
{
    const double k = df / 2.0;
    const double log_norm = -k * std::log(2.0) - std::lgamma(k);
    auto f = [&](double t) { return t <= 0.0 ? 0.0 : std::exp(log_norm + (k - 1.0) * std::log(t) - t / 2.0); };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double upper = x + 60.0 * std::sqrt(2.0 * df) + 200.0;
    return ts.integrate(f, x, upper);
}

/// phi^{-1} by bisection on the increasing branch alpha* > 1 + sqrt(c).
inline double invert_phi_bisection(double psi, double c)
{
    auto phi = [c](double a) { return a + c * a / (a - 1.0); };
    double lo = 1.0 + std::sqrt(c);
    double hi = std::max(2.0 * psi, lo + 1.0);
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < psi ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace hdpca::oracle
