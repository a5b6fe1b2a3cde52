#include "mci/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mci::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean of empty series");
    // Centered on the first value, so a constant series has an exact mean.
    double s = 0.0;
    for (double v : x) s += v - x[0];
    return x[0] + s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("variance needs at least 2 observations");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double population_variance(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size());
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("correlation needs two equal-length series of length >= 2");
    }
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw std::domain_error("correlation undefined for constant series");
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> autocorrelation_lag1(std::span<const double> x) {
    if (x.size() < 2) return std::nullopt;
    const double m = mean(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - m) * (x[i] - m);
        if (i > 0) num += (x[i] - m) * (x[i - 1] - m);
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Summary summarize(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("summary of empty series");
    Summary s;
    s.n = x.size();
    s.mean = mean(x);
    s.sd = x.size() >= 2 ? std::sqrt(sample_variance(x)) : 0.0;
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    s.min = *lo;
    s.max = *hi;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(x.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2);
    }
    s.rho1 = autocorrelation_lag1(x);
    return s;
}

}  // namespace mci::stats
