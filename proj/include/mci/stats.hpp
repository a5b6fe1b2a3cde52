#pragma once

#include <optional>
#include <span>

namespace mci::stats {

double mean(std::span<const double> x);

/// Unbiased (n-1) variance. Requires n >= 2.
double sample_variance(std::span<const double> x);

/// Biased (1/n) variance, two-pass.
double population_variance(std::span<const double> x);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Lag-1 autocorrelation, sum of lagged cross products over total sum of squares
/// (both about the full-sample mean). Missing when the series has no variation.
std::optional<double> autocorrelation_lag1(std::span<const double> x);

double normal_cdf(double z);

/// Moments reported for each input series in the summary table. Skewness and
/// kurtosis are the plain moment ratios (kurtosis is not excess kurtosis).
struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    std::optional<double> skewness;
    std::optional<double> kurtosis;
    double min = 0.0;
    double max = 0.0;
    std::optional<double> rho1;
};

Summary summarize(std::span<const double> x);

}  // namespace mci::stats
