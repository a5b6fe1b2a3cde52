#pragma once

// Recursive out-of-sample forecasts against the expanding historical mean,
// with R^2_OS, Clark-West, CSFE tracks and forecast combinations.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mci/dates.hpp"
#include "mci/econometrics.hpp"
#include "mci/ingest.hpp"

namespace mci::oos {

/// Aligned realized values, model forecasts and historical-mean forecasts over
/// the evaluation window.
struct ForecastTrack {
    std::string label;
    std::vector<Month> months;
    std::vector<double> actual;
    std::vector<double> model;
    std::vector<double> benchmark;
    std::vector<std::string> notes;  // fallbacks taken while forecasting

    std::size_t size() const { return actual.size(); }
};

inline constexpr std::size_t kMinTraining = 24;

/// Forecasts for targets r..T-1 (0-based): target j gets (1/j) sum_{s<j} returns[s],
/// accumulated left to right.
std::vector<double> historical_mean_forecasts(std::span<const double> returns, std::size_t r);

/// `returns[t]` and `predictor[t]` belong to the same month; NaN marks a missing
/// predictor value. The forecast for target j (j >= r) regresses returns[s+1] on
/// predictor[s] over s <= j-2 and evaluates at predictor[j-1]. Targets whose fit is
/// degenerate or whose predictor is missing fall back to the benchmark.
ForecastTrack recursive_forecasts(std::span<const Month> months, std::span<const double> returns,
                                  std::span<const double> predictor, std::size_t r, std::string label = {},
                                  std::size_t min_training = kMinTraining);

/// Convenience overload: evaluation starts at `first_eval` over the full return history.
ForecastTrack recursive_forecasts(const ReturnSeries& returns, const PredictorSeries& predictor, Month first_eval,
                                  econ::ReturnColumn column = econ::ReturnColumn::log_excess);

/// Model forecasts floored at zero.
ForecastTrack truncate_forecasts(ForecastTrack track);

/// 1 - SSE(model) / SSE(benchmark).
double r2_os(const ForecastTrack& track);

struct RegimeR2Os {
    std::optional<double> up;
    std::optional<double> down;
};

RegimeR2Os regime_r2_os(const ForecastTrack& track, const RegimeCalendar& calendar);

struct ClarkWest {
    double statistic = 0.0;
    double p_value = 0.5;  // one-sided, right tail
};

/// MSFE-adjusted statistic: t-stat of the mean of
/// f_t = (a-b)^2 - (a-m)^2 + (b-m)^2. Identical model and benchmark give 0 / 0.5.
ClarkWest clark_west(const ForecastTrack& track);

/// Running sum of (a-b)^2 - (a-m)^2; rises while the model beats the benchmark.
std::vector<double> csfe_difference(const ForecastTrack& track);

enum class CombinationScheme { mean, median, trimmed_mean, dmspe };

struct Combination {
    CombinationScheme scheme = CombinationScheme::mean;
    double theta = 1.0;        // DMSPE discount
    std::size_t holdout = 12;  // DMSPE equal-weight months at the start of the window

    std::string name() const;  // "mean", "median", "trimmed_mean", "dmspe_1", "dmspe_0.9"
};

/// "mean", "median", "trimmed_mean", "dmspe:<theta>".
Combination parse_combination(std::string_view text, std::size_t holdout = 12);

/// weights[t][i] for member i at evaluation period t, proportional to the inverse
/// discounted sum of that member's earlier squared errors.
std::vector<std::vector<double>> dmspe_weights(std::span<const ForecastTrack> tracks, double theta,
                                               std::size_t holdout);

ForecastTrack combine_forecasts(std::span<const ForecastTrack> tracks, const Combination& combination);

struct OosReport {
    std::string label;
    double r2_os = 0.0;
    std::optional<double> r2_os_truncated;
    std::optional<double> r2_os_up;
    std::optional<double> r2_os_down;
    ClarkWest cw;
    std::vector<double> csfe;
};

OosReport evaluate(const ForecastTrack& track, const RegimeCalendar* calendar, bool report_truncated = true);

}  // namespace mci::oos
