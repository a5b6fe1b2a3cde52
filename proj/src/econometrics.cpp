#include "mci/econometrics.hpp"

#include <cmath>
#include <stdexcept>

#include "mci/connectivity.hpp"
#include "mci/stats.hpp"

namespace mci::econ {

OlsFit ols_fit(std::span<const double> y, const Eigen::MatrixXd& design) {
    const auto n = design.rows();
    const auto k = design.cols();
    if (static_cast<Eigen::Index>(y.size()) != n) throw std::invalid_argument("ols_fit: y and X row counts differ");
    if (n <= k) throw std::invalid_argument("ols_fit: need more observations than regressors");

    OlsFit fit;
    fit.design = design;
    fit.response = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) throw std::domain_error("ols_fit: regressors are collinear (rank deficient)");
    fit.coefficients = qr.solve(fit.response);
    fit.residuals = fit.response - design * fit.coefficients;

    const double ybar = fit.response.mean();
    const double sst = (fit.response.array() - ybar).square().sum();
    const double ssr = fit.residuals.squaredNorm();
    fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    return fit;
}

Eigen::MatrixXd design_with_intercept(const std::vector<std::span<const double>>& columns) {
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size() + 1));
    x.col(0).setOnes();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != n) throw std::invalid_argument("design: column lengths differ");
        for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c + 1)) = columns[c][i];
    }
    return x;
}

Eigen::MatrixXd newey_west_covariance(const OlsFit& fit, std::size_t lag) {
    const auto n = fit.design.rows();
    if (static_cast<Eigen::Index>(lag) >= n) throw std::invalid_argument("newey_west: lag must be below n_obs");
    const auto& x = fit.design;
    const auto& u = fit.residuals;
    const Eigen::MatrixXd scores = x.array().colwise() * u.array();  // row t: u_t x_t'
    Eigen::MatrixXd meat = scores.transpose() * scores;
    for (std::size_t l = 1; l <= lag; ++l) {
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
        const auto m = n - static_cast<Eigen::Index>(l);
        const Eigen::MatrixXd gamma = scores.bottomRows(m).transpose() * scores.topRows(m);
        meat += w * (gamma + gamma.transpose());
    }
    const Eigen::MatrixXd bread = (x.transpose() * x).inverse();
    Eigen::MatrixXd cov = bread * meat * bread;
    return 0.5 * (cov + cov.transpose());
}

Eigen::VectorXd newey_west_tstats(const OlsFit& fit, std::size_t lag) {
    const Eigen::MatrixXd cov = newey_west_covariance(fit, lag);
    return fit.coefficients.array() / cov.diagonal().array().sqrt();
}

Eigen::VectorXd ols_tstats(const OlsFit& fit) {
    const auto n = static_cast<double>(fit.design.rows());
    const auto k = static_cast<double>(fit.design.cols());
    const double s2 = fit.residuals.squaredNorm() / (n - k);
    const Eigen::MatrixXd cov = s2 * (fit.design.transpose() * fit.design).inverse();
    return fit.coefficients.array() / cov.diagonal().array().sqrt();
}

std::size_t auto_newey_west_lag(std::size_t n_obs) {
    return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n_obs) / 100.0, 2.0 / 9.0)));
}

RegimeR2 regime_r2(std::span<const double> y, std::span<const double> residuals, std::span<const int> expansion) {
    if (y.size() != residuals.size() || y.size() != expansion.size()) {
        throw std::invalid_argument("regime_r2: residuals, response and calendar must cover the same months");
    }
    const double ybar = stats::mean(y);
    double ssr[2] = {0.0, 0.0}, sst[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t t = 0; t < y.size(); ++t) {
        const int c = expansion[t] ? 0 : 1;
        ssr[c] += residuals[t] * residuals[t];
        sst[c] += (y[t] - ybar) * (y[t] - ybar);
        ++count[c];
    }
    RegimeR2 out;
    if (count[0] > 0 && sst[0] > 0.0) out.up = 1.0 - ssr[0] / sst[0];
    if (count[1] > 0 && sst[1] > 0.0) out.down = 1.0 - ssr[1] / sst[1];
    return out;
}

AlignedSample align_predictive(const ReturnSeries& returns, const std::vector<const PredictorSeries*>& predictors,
                               ReturnColumn column) {
    AlignedSample s;
    s.predictors.resize(predictors.size());
    const auto& y = column == ReturnColumn::log_excess ? returns.log_excess : returns.simple_excess;
    for (std::size_t t = 1; t < returns.size(); ++t) {
        const Month lag_month = returns.months[t - 1];
        std::vector<double> row;
        for (const auto* p : predictors) {
            auto v = p->value_at(lag_month);
            if (!v) break;
            row.push_back(*v);
        }
        if (row.size() != predictors.size()) continue;
        s.response_months.push_back(returns.months[t]);
        s.y.push_back(y[t]);
        for (std::size_t j = 0; j < row.size(); ++j) s.predictors[j].push_back(row[j]);
    }
    return s;
}

namespace {

RegressionResult run_regression(const ReturnSeries& returns, const std::vector<const PredictorSeries*>& predictors,
                                const RegimeCalendar* calendar, const RegressionOptions& options) {
    auto sample = align_predictive(returns, predictors);
    if (sample.y.size() <= predictors.size() + 2) {
        throw std::invalid_argument("predictive regression: predictor and return dates do not align");
    }
    if (options.standardize_predictors) {
        for (auto& x : sample.predictors) x = standardize_full(x);
    }
    std::vector<std::span<const double>> cols(sample.predictors.begin(), sample.predictors.end());
    const OlsFit fit = ols_fit(sample.y, design_with_intercept(cols));

    RegressionResult r;
    r.coefficients = fit.coefficients;
    r.n_obs = fit.n_obs();
    r.nw_lag = options.nw_lag.value_or(auto_newey_west_lag(r.n_obs));
    r.hac_tstats = newey_west_tstats(fit, r.nw_lag);
    r.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    r.months = sample.response_months;
    r.r2 = fit.r2;
    if (calendar && !calendar->empty() && calendar->covers(r.months)) {
        const auto up = calendar->expansion_indicator(r.months);
        const auto regimes = regime_r2(sample.y, r.residuals, up);
        r.r2_up = regimes.up;
        r.r2_down = regimes.down;
    }
    return r;
}

}  // namespace

RegressionResult predictive_regression(const ReturnSeries& returns, const PredictorSeries& predictor,
                                       const RegimeCalendar* calendar, const RegressionOptions& options) {
    return run_regression(returns, {&predictor}, calendar, options);
}

RegressionResult bivariate_regression(const ReturnSeries& returns, const PredictorSeries& predictor,
                                      const PredictorSeries& control, const RegimeCalendar* calendar,
                                      const RegressionOptions& options) {
    return run_regression(returns, {&predictor, &control}, calendar, options);
}

std::string significance_stars(double t_stat, bool two_sided) {
    const double a = std::abs(t_stat);
    const double c10 = two_sided ? 1.6449 : 1.2816;
    const double c05 = two_sided ? 1.9600 : 1.6449;
    const double c01 = two_sided ? 2.5758 : 2.3263;
    if (a >= c01) return "***";
    if (a >= c05) return "**";
    if (a >= c10) return "*";
    return "";
}

}  // namespace mci::econ
