#pragma once

// Test-only statistical machinery: regularized incomplete gamma (for the
// chi-square survival function) and the one-sample Kolmogorov-Smirnov test.
// Kept independent of the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

inline double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

/// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

/// Chi-square survival function with k degrees of freedom.
inline double chi2_sf(double x, double k) { return gamma_q(0.5 * k, 0.5 * x); }

/// Chi-square goodness-of-fit p-value for observed counts vs expected counts.
inline double chi2_test(const std::vector<double>& observed,
                        const std::vector<double>& expected) {
    double stat = 0.0;
    for (size_t i = 0; i < observed.size(); ++i) {
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    return chi2_sf(stat, static_cast<double>(observed.size() - 1));
}

/// Kolmogorov survival function Q_KS(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double ks_sf(double lambda) {
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS p-value of samples against a model CDF.
inline double ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    const double sqrt_n = std::sqrt(n);
    return ks_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
}

/// Piecewise-linear CDF of a density on [lo, hi] by cumulative trapezoids.
class NumericCdf {
  public:
    NumericCdf(const std::function<double(double)>& pdf, double lo, double hi, int n_steps)
        : lo_(lo), step_((hi - lo) / n_steps), cum_(n_steps + 1, 0.0) {
        double prev = pdf(lo);
        for (int i = 1; i <= n_steps; ++i) {
            const double cur = pdf(lo + step_ * i);
            cum_[i] = cum_[i - 1] + 0.5 * (prev + cur) * step_;
            prev = cur;
        }
    }
    double operator()(double x) const {
        if (x <= lo_) return 0.0;
        const double t = (x - lo_) / step_;
        const size_t i = std::min(static_cast<size_t>(t), cum_.size() - 2);
        const double frac = t - static_cast<double>(i);
        return std::min(cum_[i] + frac * (cum_[i + 1] - cum_[i]), cum_.back());
    }

  private:
    double lo_, step_;
    std::vector<double> cum_;
};

} // namespace testutil
