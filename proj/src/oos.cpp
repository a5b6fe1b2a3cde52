#include "mci/oos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mci/csv.hpp"
#include "mci/stats.hpp"

namespace mci::oos {

std::vector<double> historical_mean_forecasts(std::span<const double> returns, std::size_t r) {
    if (r < 1 || r > returns.size()) throw std::invalid_argument("historical mean: need 1 <= r <= T");
    std::vector<double> out;
    out.reserve(returns.size() - r);
    double sum = 0.0;
    for (std::size_t j = 0; j < returns.size(); ++j) {
        if (j >= r) out.push_back(sum / static_cast<double>(j));
        sum += returns[j];
    }
    return out;
}

namespace {

struct SimpleFit {
    double alpha;
    double beta;
};

// Means are taken about the first observation so a constant response gives an
// exactly constant fit.
std::optional<SimpleFit> fit_simple(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3) return std::nullopt;
    double dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dx += x[i] - x[0];
        dy += y[i] - y[0];
    }
    const double xbar = x[0] + dx / static_cast<double>(n);
    const double ybar = y[0] + dy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    const double beta = sxy / sxx;
    return SimpleFit{ybar - beta * xbar, beta};
}

}  // namespace

ForecastTrack recursive_forecasts(std::span<const Month> months, std::span<const double> returns,
                                  std::span<const double> predictor, std::size_t r, std::string label,
                                  std::size_t min_training) {
    const std::size_t T = returns.size();
    if (months.size() != T || predictor.size() != T) {
        throw std::invalid_argument("recursive_forecasts: months, returns and predictor must align");
    }
    if (r < min_training) {
        throw std::invalid_argument("recursive_forecasts: initial training length " + std::to_string(r) +
                                    " below floor " + std::to_string(min_training));
    }
    if (r >= T) throw std::invalid_argument("recursive_forecasts: no evaluation periods");

    ForecastTrack track;
    track.label = std::move(label);
    track.benchmark = historical_mean_forecasts(returns, r);
    std::vector<double> xs, ys;
    for (std::size_t s = 0; s + 2 <= r; ++s) {
        if (std::isfinite(predictor[s])) {
            xs.push_back(predictor[s]);
            ys.push_back(returns[s + 1]);
        }
    }
    for (std::size_t j = r; j < T; ++j) {
        // Training pairs (predictor[s], returns[s+1]) for s <= j-2.
        if (j >= 2 && j - 2 >= r - 1 && std::isfinite(predictor[j - 2])) {
            xs.push_back(predictor[j - 2]);
            ys.push_back(returns[j - 1]);
        }
        const double bench = track.benchmark[j - r];
        double forecast = bench;
        const auto fit = fit_simple(xs, ys);
        if (!std::isfinite(predictor[j - 1])) {
            track.notes.push_back(format_month(months[j]) + ": predictor missing, benchmark used");
        } else if (!fit) {
            track.notes.push_back(format_month(months[j]) + ": degenerate training predictor, benchmark used");
        } else {
            forecast = fit->alpha + fit->beta * predictor[j - 1];
        }
        track.months.push_back(months[j]);
        track.actual.push_back(returns[j]);
        track.model.push_back(forecast);
    }
    return track;
}

ForecastTrack recursive_forecasts(const ReturnSeries& returns, const PredictorSeries& predictor, Month first_eval,
                                  econ::ReturnColumn column) {
    const auto r = returns.index_of(first_eval);
    if (!r) throw std::invalid_argument("recursive_forecasts: evaluation start outside the return sample");
    std::vector<double> x(returns.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < returns.size(); ++t) {
        if (auto v = predictor.value_at(returns.months[t])) x[t] = *v;
    }
    const auto& y = column == econ::ReturnColumn::log_excess ? returns.log_excess : returns.simple_excess;
    return recursive_forecasts(returns.months, y, x, *r, predictor.name);
}

ForecastTrack truncate_forecasts(ForecastTrack track) {
    for (double& f : track.model) f = std::max(0.0, f);
    return track;
}

namespace {

void check_track(const ForecastTrack& t) {
    if (t.model.size() != t.actual.size() || t.benchmark.size() != t.actual.size()) {
        throw std::invalid_argument("forecast track vectors are misaligned");
    }
}

}  // namespace

double r2_os(const ForecastTrack& track) {
    check_track(track);
    if (track.size() < 2) throw std::invalid_argument("r2_os: need at least 2 evaluation periods");
    double sse_model = 0.0, sse_bench = 0.0;
    for (std::size_t t = 0; t < track.size(); ++t) {
        sse_model += (track.actual[t] - track.model[t]) * (track.actual[t] - track.model[t]);
        sse_bench += (track.actual[t] - track.benchmark[t]) * (track.actual[t] - track.benchmark[t]);
    }
    if (sse_bench == 0.0) throw std::domain_error("r2_os: benchmark has zero squared error");
    return 1.0 - sse_model / sse_bench;
}

RegimeR2Os regime_r2_os(const ForecastTrack& track, const RegimeCalendar& calendar) {
    check_track(track);
    const auto up = calendar.expansion_indicator(track.months);
    double model[2] = {0.0, 0.0}, bench[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t t = 0; t < track.size(); ++t) {
        const int c = up[t] ? 0 : 1;
        model[c] += (track.actual[t] - track.model[t]) * (track.actual[t] - track.model[t]);
        bench[c] += (track.actual[t] - track.benchmark[t]) * (track.actual[t] - track.benchmark[t]);
        ++count[c];
    }
    RegimeR2Os out;
    if (count[0] > 0 && bench[0] > 0.0) out.up = 1.0 - model[0] / bench[0];
    if (count[1] > 0 && bench[1] > 0.0) out.down = 1.0 - model[1] / bench[1];
    return out;
}

ClarkWest clark_west(const ForecastTrack& track) {
    check_track(track);
    const std::size_t s = track.size();
    if (s < 10) throw std::invalid_argument("clark_west: need at least 10 evaluation periods");
    std::vector<double> f(s);
    bool all_zero = true;
    for (std::size_t t = 0; t < s; ++t) {
        const double a = track.actual[t], b = track.benchmark[t], m = track.model[t];
        f[t] = (a - b) * (a - b) - (a - m) * (a - m) + (b - m) * (b - m);
        all_zero = all_zero && f[t] == 0.0;
    }
    if (all_zero) return {0.0, 0.5};
    const double var = stats::sample_variance(f);
    if (!(var > 0.0)) throw std::domain_error("clark_west: adjusted loss differential has zero variance");
    const double stat = stats::mean(f) / std::sqrt(var / static_cast<double>(s));
    return {stat, 1.0 - stats::normal_cdf(stat)};
}

std::vector<double> csfe_difference(const ForecastTrack& track) {
    check_track(track);
    std::vector<double> out;
    out.reserve(track.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < track.size(); ++t) {
        const double a = track.actual[t];
        acc += (a - track.benchmark[t]) * (a - track.benchmark[t]) - (a - track.model[t]) * (a - track.model[t]);
        out.push_back(acc);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string Combination::name() const {
    switch (scheme) {
        case CombinationScheme::mean: return "mean";
        case CombinationScheme::median: return "median";
        case CombinationScheme::trimmed_mean: return "trimmed_mean";
        case CombinationScheme::dmspe: return "dmspe_" + csv::format_double(theta);
    }
    return "?";
}

Combination parse_combination(std::string_view text, std::size_t holdout) {
    Combination c;
    c.holdout = holdout;
    if (text == "mean") {
        c.scheme = CombinationScheme::mean;
    } else if (text == "median") {
        c.scheme = CombinationScheme::median;
    } else if (text == "trimmed_mean") {
        c.scheme = CombinationScheme::trimmed_mean;
    } else if (text.starts_with("dmspe")) {
        c.scheme = CombinationScheme::dmspe;
        if (text.size() > 5) {
            if (text[5] != ':') throw std::invalid_argument("combination: expected dmspe:<theta>");
            c.theta = csv::parse_double(text.substr(6));
        }
        if (!(c.theta > 0.0 && c.theta <= 1.0)) throw std::invalid_argument("combination: theta must lie in (0,1]");
    } else {
        throw std::invalid_argument("unknown combination scheme '" + std::string(text) + "'");
    }
    return c;
}

namespace {

void check_members(std::span<const ForecastTrack> tracks) {
    if (tracks.size() < 2) throw std::invalid_argument("combination needs at least 2 member tracks");
    for (const auto& t : tracks) {
        check_track(t);
        if (t.months != tracks.front().months || t.actual != tracks.front().actual) {
            throw std::invalid_argument("combination members have mismatched evaluation windows");
        }
    }
}

}  // namespace

std::vector<std::vector<double>> dmspe_weights(std::span<const ForecastTrack> tracks, double theta,
                                               std::size_t holdout) {
    check_members(tracks);
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("dmspe: theta must lie in (0,1]");
    const std::size_t n = tracks.size();
    const std::size_t s = tracks.front().size();
    std::vector<std::vector<double>> weights(s, std::vector<double>(n, 1.0 / static_cast<double>(n)));
    std::vector<double> phi(n, 0.0);
    for (std::size_t t = 0; t < s; ++t) {
        if (t > 0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double e = tracks[i].actual[t - 1] - tracks[i].model[t - 1];
                phi[i] = theta * phi[i] + e * e;
            }
        }
        if (t < holdout) continue;
        const std::size_t perfect = static_cast<std::size_t>(std::count(phi.begin(), phi.end(), 0.0));
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double inv = perfect > 0 ? (phi[i] == 0.0 ? 1.0 : 0.0) : 1.0 / phi[i];
            weights[t][i] = inv;
            total += inv;
        }
        for (double& w : weights[t]) w /= total;
    }
    return weights;
}

ForecastTrack combine_forecasts(std::span<const ForecastTrack> tracks, const Combination& combination) {
    check_members(tracks);
    const std::size_t n = tracks.size();
    const std::size_t s = tracks.front().size();
    if (combination.scheme == CombinationScheme::trimmed_mean && n < 3) {
        throw std::invalid_argument("trimmed mean needs at least 3 member tracks");
    }
    ForecastTrack out;
    out.label = combination.name();
    out.months = tracks.front().months;
    out.actual = tracks.front().actual;
    out.benchmark = tracks.front().benchmark;
    out.model.resize(s);

    std::vector<std::vector<double>> weights;
    if (combination.scheme == CombinationScheme::dmspe) {
        weights = dmspe_weights(tracks, combination.theta, combination.holdout);
    }
    // Averages are taken about one member, so identical members reproduce
    // themselves exactly.
    std::vector<double> column(n);
    for (std::size_t t = 0; t < s; ++t) {
        for (std::size_t i = 0; i < n; ++i) column[i] = tracks[i].model[t];
        double value = 0.0;
        switch (combination.scheme) {
            case CombinationScheme::mean:
                for (double v : column) value += v - column[0];
                value = column[0] + value / static_cast<double>(n);
                break;
            case CombinationScheme::median: {
                std::sort(column.begin(), column.end());
                value = n % 2 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
                break;
            }
            case CombinationScheme::trimmed_mean: {
                std::sort(column.begin(), column.end());
                for (std::size_t i = 1; i + 1 < n; ++i) value += column[i] - column[1];
                value = column[1] + value / static_cast<double>(n - 2);
                break;
            }
            case CombinationScheme::dmspe:
                for (std::size_t i = 0; i < n; ++i) value += weights[t][i] * (column[i] - column[0]);
                value += column[0];
                break;
        }
        out.model[t] = value;
    }
    return out;
}

OosReport evaluate(const ForecastTrack& track, const RegimeCalendar* calendar, bool report_truncated) {
    OosReport rep;
    rep.label = track.label;
    rep.r2_os = r2_os(track);
    if (report_truncated) rep.r2_os_truncated = r2_os(truncate_forecasts(track));
    if (calendar && !calendar->empty() && calendar->covers(track.months)) {
        const auto regimes = regime_r2_os(track, *calendar);
        rep.r2_os_up = regimes.up;
        rep.r2_os_down = regimes.down;
    }
    rep.cw = clark_west(track);
    rep.csfe = csfe_difference(track);
    return rep;
}

}  // namespace mci::oos
