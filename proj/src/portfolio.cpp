#include "mci/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mci/stats.hpp"

namespace mci::portfolio {

void AllocationConfig::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("allocation: gamma must be positive");
    if (!(weight_lower <= weight_upper)) throw std::invalid_argument("allocation: weight bounds out of order");
    if (variance_window < 12) throw std::invalid_argument("allocation: variance window below 12 months");
    if (min_variance_window > variance_window) {
        throw std::invalid_argument("allocation: minimum variance window exceeds the window");
    }
    if (tc_bps < 0.0) throw std::invalid_argument("allocation: negative transaction cost");
}

std::vector<double> variance_forecast(std::span<const double> simple_excess, std::size_t first_target,
                                      std::size_t window, std::size_t min_window) {
    std::vector<double> out;
    std::vector<double> buf;
    for (std::size_t j = first_target; j < simple_excess.size(); ++j) {
        buf.clear();
        const std::size_t lo = j >= window ? j - window : 0;
        for (std::size_t s = lo; s < j; ++s) {
            if (std::isfinite(simple_excess[s])) buf.push_back(simple_excess[s]);
        }
        if (buf.size() < min_window || buf.empty()) {
            throw std::invalid_argument("variance_forecast: insufficient history before target " + std::to_string(j));
        }
        out.push_back(stats::population_variance(buf));
    }
    return out;
}

std::vector<double> mv_weights(std::span<const double> forecasts, std::span<const double> variances,
                               const AllocationConfig& config) {
    config.validate();
    if (forecasts.size() != variances.size()) throw std::invalid_argument("mv_weights: misaligned inputs");
    std::vector<double> w(forecasts.size());
    for (std::size_t t = 0; t < w.size(); ++t) {
        if (!(variances[t] > 0.0)) throw std::domain_error("mv_weights: zero variance forecast");
        const double raw = forecasts[t] / (config.gamma * variances[t]);
        w[t] = std::clamp(raw, config.weight_lower, config.weight_upper);
    }
    return w;
}

RealizedReturns realize_returns(std::span<const double> weights, std::span<const double> simple_excess,
                                std::span<const double> risk_free, const AllocationConfig& config) {
    if (weights.size() != simple_excess.size() || weights.size() != risk_free.size()) {
        throw std::invalid_argument("realize_returns: misaligned inputs");
    }
    const double tc = config.tc_bps / 10000.0;
    RealizedReturns out;
    const std::size_t n = weights.size();
    out.gross.resize(n);
    out.net.resize(n);
    out.traded.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.gross[k] = weights[k] * simple_excess[k] + risk_free[k];
        double before = config.initial_weight;
        if (k > 0) {
            before = weights[k - 1];
            if (config.turnover == TurnoverMode::drifted) {
                // Equity grows at excess + rf, the whole portfolio at the gross return.
                before *= (1.0 + simple_excess[k - 1] + risk_free[k - 1]) / (1.0 + out.gross[k - 1]);
            }
        }
        out.traded[k] = std::abs(weights[k] - before);
        out.net[k] = out.gross[k] - tc * out.traded[k];
    }
    return out;
}

double certainty_equivalent(std::span<const double> returns, double gamma) {
    return stats::mean(returns) - 0.5 * gamma * stats::sample_variance(returns);
}

CerGain cer_and_gain(std::span<const double> model, std::span<const double> benchmark, double gamma,
                     double annualization) {
    if (model.size() != benchmark.size()) throw std::invalid_argument("cer_and_gain: series cover different dates");
    if (model.size() < 12) throw std::invalid_argument("cer_and_gain: need at least 12 periods");
    CerGain out;
    out.cer_model = certainty_equivalent(model, gamma);
    out.cer_benchmark = certainty_equivalent(benchmark, gamma);
    const double diff = out.cer_model - out.cer_benchmark;
    out.gain = annualization * diff;

    // Delta method: influence of each period on mean - gamma/2 variance.
    const double mm = stats::mean(model), mb = stats::mean(benchmark);
    const double vm = stats::sample_variance(model), vb = stats::sample_variance(benchmark);
    std::vector<double> d(model.size());
    for (std::size_t t = 0; t < d.size(); ++t) {
        const double em = model[t] - mm, eb = benchmark[t] - mb;
        d[t] = (em - 0.5 * gamma * (em * em - vm)) - (eb - 0.5 * gamma * (eb * eb - vb));
    }
    const double var_d = stats::population_variance(d);
    const double n = static_cast<double>(d.size());
    if (var_d > 0.0) {
        out.statistic = diff / std::sqrt(var_d / n);
        out.p_value = 2.0 * (1.0 - stats::normal_cdf(std::abs(*out.statistic)));
    } else if (diff == 0.0) {
        out.statistic = 0.0;
        out.p_value = 1.0;
    } else {
        out.p_value = 0.0;
    }
    return out;
}

SharpeTest sharpe_and_test(std::span<const double> model, std::span<const double> benchmark,
                           std::span<const double> risk_free) {
    if (model.size() != benchmark.size() || model.size() != risk_free.size()) {
        throw std::invalid_argument("sharpe_and_test: series cover different dates");
    }
    const std::size_t n = model.size();
    if (n < 3) throw std::invalid_argument("sharpe_and_test: need at least 3 periods");
    std::vector<double> a(n), b(n);
    for (std::size_t t = 0; t < n; ++t) {
        a[t] = model[t] - risk_free[t];
        b[t] = benchmark[t] - risk_free[t];
    }
    const double mu_a = stats::mean(a), mu_b = stats::mean(b);
    const double var_a = stats::sample_variance(a), var_b = stats::sample_variance(b);
    if (!(var_a > 0.0) || !(var_b > 0.0)) throw std::domain_error("sharpe_and_test: zero standard deviation");
    const double sd_a = std::sqrt(var_a), sd_b = std::sqrt(var_b);
    double cov = 0.0;
    for (std::size_t t = 0; t < n; ++t) cov += (a[t] - mu_a) * (b[t] - mu_b);
    cov /= static_cast<double>(n - 1);

    SharpeTest out;
    out.sharpe_model = mu_a / sd_a;
    out.sharpe_benchmark = mu_b / sd_b;
    const double numerator = sd_b * mu_a - sd_a * mu_b;
    if (numerator == 0.0) return out;
    const double theta = (2.0 * var_a * var_b - 2.0 * sd_a * sd_b * cov + 0.5 * mu_a * mu_a * var_b +
                          0.5 * mu_b * mu_b * var_a -
                          mu_a * mu_b / (2.0 * sd_a * sd_b) * (cov * cov + var_a * var_b)) /
                         static_cast<double>(n);
    if (!(theta > 0.0)) throw std::domain_error("sharpe_and_test: degenerate asymptotic variance");
    out.statistic = numerator / std::sqrt(theta);
    out.p_value = 2.0 * (1.0 - stats::normal_cdf(std::abs(out.statistic)));
    return out;
}

StrategyResult run_strategy(std::span<const double> forecasts, std::span<const double> variances,
                            std::span<const double> simple_excess, std::span<const double> risk_free,
                            const AllocationConfig& config) {
    StrategyResult r;
    r.weights = mv_weights(forecasts, variances, config);
    r.returns = realize_returns(r.weights, simple_excess, risk_free, config);
    return r;
}

AllocationReport evaluate_allocation(std::span<const double> model_forecasts,
                                     std::span<const double> benchmark_forecasts, std::span<const double> variances,
                                     std::span<const double> simple_excess, std::span<const double> risk_free,
                                     const AllocationConfig& config) {
    AllocationReport rep;
    rep.model = run_strategy(model_forecasts, variances, simple_excess, risk_free, config);
    rep.benchmark = run_strategy(benchmark_forecasts, variances, simple_excess, risk_free, config);
    rep.cer_net = cer_and_gain(rep.model.returns.net, rep.benchmark.returns.net, config.gamma, config.annualization);
    rep.cer_gross =
        cer_and_gain(rep.model.returns.gross, rep.benchmark.returns.gross, config.gamma, config.annualization);
    rep.sharpe_net = sharpe_and_test(rep.model.returns.net, rep.benchmark.returns.net, risk_free);
    rep.sharpe_gross = sharpe_and_test(rep.model.returns.gross, rep.benchmark.returns.gross, risk_free);
    return rep;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Group g) {
    switch (g) {
        case Group::low: return "low";
        case Group::median: return "median";
        case Group::high: return "high";
    }
    return "?";
}

std::vector<std::optional<Group>> assign_groups(std::span<const double> measure) {
    std::vector<std::size_t> ranked;
    for (std::size_t i = 0; i < measure.size(); ++i) {
        if (std::isfinite(measure[i])) ranked.push_back(i);
    }
    if (ranked.size() < 10) throw std::invalid_argument("sorted portfolios: fewer than 10 stocks to rank");
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) { return measure[a] < measure[b]; });
    const std::size_t decile = ranked.size() / 10;
    std::vector<std::optional<Group>> groups(measure.size());
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        Group g = Group::median;
        if (r < decile) g = Group::low;
        if (r >= ranked.size() - decile) g = Group::high;
        groups[ranked[r]] = g;
    }
    return groups;
}

SortedPortfolios sort_connection_portfolios(std::span<const std::vector<double>> measure,
                                            std::span<const std::vector<double>> next_returns,
                                            std::span<const Month> holding_months) {
    if (measure.size() != next_returns.size() || measure.size() != holding_months.size()) {
        throw std::invalid_argument("sorted portfolios: misaligned months");
    }
    SortedPortfolios out;
    out.months.assign(holding_months.begin(), holding_months.end());
    double cum[3] = {1.0, 1.0, 1.0};
    for (std::size_t t = 0; t < measure.size(); ++t) {
        if (measure[t].size() != next_returns[t].size()) throw std::invalid_argument("sorted portfolios: stock count mismatch");
        std::vector<double> usable = measure[t];
        for (std::size_t i = 0; i < usable.size(); ++i) {
            if (!std::isfinite(next_returns[t][i])) usable[i] = std::nan("");
        }
        auto groups = assign_groups(usable);
        double sum[3] = {0.0, 0.0, 0.0};
        std::size_t count[3] = {0, 0, 0};
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (!groups[i]) continue;
            const auto g = static_cast<std::size_t>(*groups[i]);
            sum[g] += next_returns[t][i];
            ++count[g];
        }
        double ret[3];
        for (int g = 0; g < 3; ++g) {
            ret[g] = sum[g] / static_cast<double>(count[g]);
            cum[g] *= 1.0 + ret[g];
        }
        out.low.push_back(ret[0]);
        out.median.push_back(ret[1]);
        out.high.push_back(ret[2]);
        out.cum_low.push_back(cum[0] - 1.0);
        out.cum_median.push_back(cum[1] - 1.0);
        out.cum_high.push_back(cum[2] - 1.0);
        out.spread.push_back(out.cum_low.back() - out.cum_high.back());
        out.membership.push_back(std::move(groups));
    }
    return out;
}

}  // namespace mci::portfolio
