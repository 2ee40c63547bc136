#pragma once

#include <cmath>
#include <limits>

#include "ghostvar/error.hpp"

namespace ghostvar {

namespace detail {

// Continued fraction for I_x(a,b), modified Lentz. Converges for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    fail(ErrorCode::NoConvergence, "incomplete beta continued fraction did not converge");
}

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    require(a > 0.0 && b > 0.0, ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) - detail::log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - std::exp(log_front) * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// CDF of the F(d1, d2) distribution.
inline double f_cdf(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

/// Inverse of I_x(a, b) in x: safeguarded Newton inside a shrinking bisection bracket.
inline double inverse_incomplete_beta(double a, double b, double prob) {
    require(prob > 0.0 && prob < 1.0, ErrorCode::InvalidProbability, "probability must lie in (0,1)");
    double lo = 0.0;
    double hi = 1.0;
    double x = 0.5;
    const double lbeta = detail::log_beta(a, b);
    for (int iter = 0; iter < 400; ++iter) {
        const double fx = incomplete_beta(a, b, x) - prob;
        if (fx == 0.0) return x;
        if (fx < 0.0)
            lo = x;
        else
            hi = x;
        const double log_density = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
        const double density = std::exp(log_density);
        double next = (density > 0.0 && std::isfinite(density)) ? x - fx / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(x, 1e-300) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
            return next;
        x = next;
    }
    return x;
}

/// Quantile of the F(d1, d2) distribution: x with CDF(x) = prob.
inline double f_quantile(double d1, double d2, double prob) {
    require(d1 >= 1.0 && d2 >= 1.0, ErrorCode::InvalidArgument, "F degrees of freedom must be >= 1");
    require(prob > 0.0 && prob < 1.0, ErrorCode::InvalidProbability, "probability must lie in (0,1)");
    const double u = inverse_incomplete_beta(0.5 * d1, 0.5 * d2, prob);
    return d2 * u / (d1 * (1.0 - u));
}

}  // namespace ghostvar
