#pragma once

// Economic value of forecasts: a mean-variance investor splitting wealth
// between equities and the risk-free asset, CER gains, Sharpe-ratio tests and
// portfolios sorted on stock-level media connections.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mci/dates.hpp"

namespace mci::portfolio {

enum class TurnoverMode {
    drifted,  // trade |w_t - w_t^-|, w_t^- the previous weight after one period of drift
    simple,   // trade |w_t - w_{t-1}|
};

struct AllocationConfig {
    double gamma = 3.0;
    double weight_lower = 0.0;
    double weight_upper = 1.5;
    std::size_t variance_window = 96;
    std::size_t min_variance_window = 24;
    double tc_bps = 50.0;
    TurnoverMode turnover = TurnoverMode::drifted;
    double initial_weight = 0.0;  // start in cash, so the first allocation pays costs
    double annualization = 12.0;

    void validate() const;
};

/// Variance forecast for each target j in [first_target, T): the 1/n variance of
/// the trailing `window` returns before j. NaN returns are skipped, so the window
/// shrinks; fewer than `min_window` usable observations throws.
std::vector<double> variance_forecast(std::span<const double> simple_excess, std::size_t first_target,
                                      std::size_t window, std::size_t min_window = 24);

/// clamp(forecast / (gamma variance), lower, upper). Zero variance throws std::domain_error.
std::vector<double> mv_weights(std::span<const double> forecasts, std::span<const double> variances,
                               const AllocationConfig& config);

struct RealizedReturns {
    std::vector<double> gross;
    std::vector<double> net;
    std::vector<double> traded;  // fraction of wealth traded before each period
};

/// weights[k] is held over period k, which earns excess[k] on equities and
/// risk_free[k] on cash. Gross return w excess + rf; net subtracts tc_bps * traded.
RealizedReturns realize_returns(std::span<const double> weights, std::span<const double> simple_excess,
                                std::span<const double> risk_free, const AllocationConfig& config);

/// mean - 0.5 gamma variance, with the (n-1) sample variance.
double certainty_equivalent(std::span<const double> returns, double gamma);

struct CerGain {
    double cer_model = 0.0;
    double cer_benchmark = 0.0;
    double gain = 0.0;  // annualized difference
    std::optional<double> statistic;
    double p_value = 1.0;  // two-sided, delta method
};

/// Series shorter than 12 periods throw.
CerGain cer_and_gain(std::span<const double> model, std::span<const double> benchmark, double gamma,
                     double annualization = 12.0);

struct SharpeTest {
    double sharpe_model = 0.0;
    double sharpe_benchmark = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;  // two-sided
};

/// Monthly Sharpe ratios of both strategies and the Jobson-Korkie difference
/// test with Memmel's variance correction.
SharpeTest sharpe_and_test(std::span<const double> model, std::span<const double> benchmark,
                           std::span<const double> risk_free);

struct StrategyResult {
    std::vector<double> weights;
    RealizedReturns returns;
};

StrategyResult run_strategy(std::span<const double> forecasts, std::span<const double> variances,
                            std::span<const double> simple_excess, std::span<const double> risk_free,
                            const AllocationConfig& config);

struct AllocationReport {
    StrategyResult model;
    StrategyResult benchmark;
    CerGain cer_net;
    CerGain cer_gross;
    SharpeTest sharpe_net;
    SharpeTest sharpe_gross;
};

/// Runs the forecast-driven and the historical-mean-driven strategies side by side.
AllocationReport evaluate_allocation(std::span<const double> model_forecasts,
                                     std::span<const double> benchmark_forecasts, std::span<const double> variances,
                                     std::span<const double> simple_excess, std::span<const double> risk_free,
                                     const AllocationConfig& config);

// ---------------------------------------------------------------------------

enum class Group { low, median, high };

std::string_view to_string(Group g);

/// Ranks stocks by measure (ties by stock index), bottom decile low, top decile
/// high, the rest median. Decile size is floor(n/10) over stocks with a finite
/// measure; NaN stocks stay unassigned. Fewer than 10 ranked stocks throws.
std::vector<std::optional<Group>> assign_groups(std::span<const double> measure);

struct SortedPortfolios {
    std::vector<Month> months;  // holding months
    std::vector<double> low, median, high;
    std::vector<double> cum_low, cum_median, cum_high;
    std::vector<double> spread;  // cum_low - cum_high
    std::vector<std::vector<std::optional<Group>>> membership;
};

/// measure[t] is observed at the end of formation month t and next_returns[t] are
/// the stocks' returns over holding month months[t]. Stocks missing either value
/// that month are left out.
SortedPortfolios sort_connection_portfolios(std::span<const std::vector<double>> measure,
                                            std::span<const std::vector<double>> next_returns,
                                            std::span<const Month> holding_months);

}  // namespace mci::portfolio
