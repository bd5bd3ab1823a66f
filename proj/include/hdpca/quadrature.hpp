#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

namespace hdpca {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

template <class F>
std::pair<double, double> gauss_kronrod_15(F& f, double a, double b)
{
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double sum = f(centre - dx) + f(centre + dx);
        kronrod += kKronrodWeights[j] * sum;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) quadrature by interval bisection.
/// Subdivides until the summed error estimate is below abs_tol or max_intervals is reached.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol = 1e-10, int max_intervals = 2000)
{
    struct Piece {
        double lo, hi, value, error;
    };
    std::vector<Piece> pieces;
    {
        auto [v, e] = detail::gauss_kronrod_15(f, a, b);
        pieces.push_back({a, b, v, e});
    }
    double total_err = pieces.front().error;
    while (total_err > abs_tol && static_cast<int>(pieces.size()) < max_intervals) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < pieces.size(); ++i)
            if (pieces[i].error > pieces[worst].error) worst = i;
        const Piece p = pieces[worst];
        const double mid = 0.5 * (p.lo + p.hi);
        auto [lv, le] = detail::gauss_kronrod_15(f, p.lo, mid);
        auto [rv, re] = detail::gauss_kronrod_15(f, mid, p.hi);
        pieces[worst] = {p.lo, mid, lv, le};
        pieces.push_back({mid, p.hi, rv, re});
        total_err += le + re - p.error;
    }
    QuadratureResult r;
    for (const auto& p : pieces) {
        r.value += p.value;
        r.error_estimate += p.error;
    }
    r.intervals = static_cast<int>(pieces.size());
    return r;
}

}  // namespace hdpca
