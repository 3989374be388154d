#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "bmp/errors.hpp"
#include "bmp/kernels.hpp"

// ============================================================================
// Small statistics toolbox for the Monte Carlo checks: sample summaries, a
// one-sample Kolmogorov-Smirnov test against a reference cdf, and chi-square
// tail probabilities for goodness-of-fit counts.
// ============================================================================

namespace bmp::stats {

struct Summary {
    double mean = 0.0;
    double stderr_ = 0.0;  ///< standard error of the mean
};

inline Summary summarize(const std::vector<double>& xs) {
    if (xs.empty()) fail(errkind::kInvariant, "summarize: empty sample");
    Summary s;
    s.mean = kernels::sum(xs.data(), xs.size()) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        const double ss = kernels::sumsq_dev(xs.data(), xs.size(), s.mean);
        s.stderr_ = std::sqrt(ss / (static_cast<double>(xs.size() - 1) * static_cast<double>(xs.size())));
    }
    return s;
}

/// Kolmogorov limit tail Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2).
inline double kolmogorov_tail(double t) {
    if (t <= 0.0) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = 2.0 * std::exp(-2.0 * j * j * t * t);
        sum += (j % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;  ///< sup-distance D_n
    double p_value = 1.0;
};

/// One-sample KS test of xs against the cdf F. Uses the Stephens finite-n
/// correction (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D before the limit tail.
inline KsResult ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
    if (xs.empty()) fail(errkind::kInvariant, "ks_test: empty sample");
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_tail((std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d);
    return r;
}

/// Regularized lower incomplete gamma P(a, x), by series for x < a + 1 and
/// by the Lentz continued fraction for the complement otherwise.
inline double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) fail(errkind::kInvariant, "gamma_p: domain");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

/// Upper tail of the chi-square distribution with df degrees of freedom.
inline double chi_square_tail(double statistic, double df) {
    if (statistic <= 0.0) return 1.0;
    return gamma_q(0.5 * df, 0.5 * statistic);
}

/// Pearson chi-square statistic for observed counts against expected counts.
inline double chi_square_statistic(const std::vector<double>& observed,
                                   const std::vector<double>& expected) {
    if (observed.size() != expected.size() || observed.empty())
        fail(errkind::kInvariant, "chi_square_statistic: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) fail(errkind::kInvariant, "chi_square_statistic: nonpositive expected count");
        const double diff = observed[i] - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

}  // namespace bmp::stats
