#pragma once

// In-sample predictive regressions with Newey-West inference.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mci/dates.hpp"
#include "mci/ingest.hpp"

namespace mci::econ {

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    Eigen::VectorXd response;
    Eigen::MatrixXd design;
    double r2 = 0.0;

    std::size_t n_obs() const { return static_cast<std::size_t>(design.rows()); }
};

/// Least squares through a column-pivoted QR. `design` must carry its own
/// intercept column. Throws std::invalid_argument when n <= k and
/// std::domain_error on rank deficiency.
OlsFit ols_fit(std::span<const double> y, const Eigen::MatrixXd& design);

/// [1, x1, x2, ...].
Eigen::MatrixXd design_with_intercept(const std::vector<std::span<const double>>& columns);

/// Bartlett-kernel HAC covariance of the coefficients, weights 1 - l/(L+1).
/// Lag 0 is White's heteroskedasticity-robust (HC0) covariance.
Eigen::MatrixXd newey_west_covariance(const OlsFit& fit, std::size_t lag);
Eigen::VectorXd newey_west_tstats(const OlsFit& fit, std::size_t lag);

/// Classical t-stats, s^2 (X'X)^-1 with s^2 = SSR / (n - k).
Eigen::VectorXd ols_tstats(const OlsFit& fit);

/// floor(4 (T/100)^(2/9)).
std::size_t auto_newey_west_lag(std::size_t n_obs);

struct RegimeR2 {
    std::optional<double> up;
    std::optional<double> down;
};

/// R^2 restricted to regime months. Both numerator and denominator only sum
/// regime months, and the denominator uses the full-sample mean of y.
RegimeR2 regime_r2(std::span<const double> y, std::span<const double> residuals, std::span<const int> expansion);

enum class ReturnColumn { log_excess, simple_excess };

/// Pairs the response in month t+1 with predictor values from month t.
struct AlignedSample {
    std::vector<Month> response_months;
    std::vector<double> y;
    std::vector<std::vector<double>> predictors;  // one vector per predictor
};

AlignedSample align_predictive(const ReturnSeries& returns, const std::vector<const PredictorSeries*>& predictors,
                               ReturnColumn column = ReturnColumn::log_excess);

struct RegressionOptions {
    std::optional<std::size_t> nw_lag;  // automatic when unset
    bool standardize_predictors = true;  // slopes read as per one-sd move
};

struct RegressionResult {
    Eigen::VectorXd coefficients;  // alpha, beta[, phi]
    Eigen::VectorXd hac_tstats;
    std::vector<double> residuals;
    std::vector<Month> months;  // response months
    double r2 = 0.0;
    std::optional<double> r2_up;
    std::optional<double> r2_down;
    std::size_t n_obs = 0;
    std::size_t nw_lag = 0;

    double alpha() const { return coefficients[0]; }
    double beta() const { return coefficients[1]; }
    double t_beta() const { return hac_tstats[1]; }
    std::optional<double> phi() const {
        return coefficients.size() > 2 ? std::optional<double>(coefficients[2]) : std::nullopt;
    }
    std::optional<double> t_phi() const {
        return hac_tstats.size() > 2 ? std::optional<double>(hac_tstats[2]) : std::nullopt;
    }
};

/// R^m_{t+1} = alpha + beta x_t + e_{t+1}. Regime R^2 is filled when a calendar is
/// given and covers every response month.
RegressionResult predictive_regression(const ReturnSeries& returns, const PredictorSeries& predictor,
                                       const RegimeCalendar* calendar = nullptr, const RegressionOptions& options = {});

/// R^m_{t+1} = alpha + beta x_t + phi z_t + e_{t+1}.
RegressionResult bivariate_regression(const ReturnSeries& returns, const PredictorSeries& predictor,
                                      const PredictorSeries& control, const RegimeCalendar* calendar = nullptr,
                                      const RegressionOptions& options = {});

/// "", "*", "**", "***" at 10/5/1 percent against two- or one-sided normal
/// critical values; the one-sided test points in the direction of the estimate.
std::string significance_stars(double t_stat, bool two_sided);

}  // namespace mci::econ
