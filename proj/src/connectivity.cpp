#include "mci/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "mci/parallel.hpp"
#include "mci/stats.hpp"

namespace mci {

std::string_view to_string(ToneVariant v) {
    switch (v) {
        case ToneVariant::opt: return "opt";
        case ToneVariant::pos: return "pos";
        case ToneVariant::neg: return "neg";
    }
    return "?";
}

ToneVariant parse_tone_variant(std::string_view text) {
    if (text == "opt") return ToneVariant::opt;
    if (text == "pos") return ToneVariant::pos;
    if (text == "neg") return ToneVariant::neg;
    throw std::invalid_argument("unknown tone variant '" + std::string(text) + "'");
}

ScoreType parse_score_type(int type) {
    if (type < 1 || type > 3) throw std::invalid_argument("score type must be 1, 2 or 3");
    return static_cast<ScoreType>(type);
}

double tone_scalar(const ToneTriple& tone, ToneVariant variant) {
    switch (variant) {
        case ToneVariant::opt: return tone.positive - tone.negative;
        case ToneVariant::pos: return tone.positive;
        case ToneVariant::neg: return tone.negative;
    }
    return 0.0;
}

std::vector<ScoreEntry> connection_scores(const NewsEvent& event, ToneVariant variant) {
    std::vector<ScoreEntry> out;
    out.reserve(3 * event.mentions.size() * event.mentions.size());
    for (const auto& a : event.mentions) {
        const double ta = tone_scalar(a.tone, variant);
        for (const auto& b : event.mentions) {
            const double tb = tone_scalar(b.tone, variant);
            out.push_back({ScoreType::sentiment, a.stock, b.stock, ta});
            out.push_back({ScoreType::comovement, a.stock, b.stock, ta * tb});
            out.push_back({ScoreType::coverage, a.stock, b.stock, 1.0});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

ConnectivityMatrix::ConnectivityMatrix(Day date, ScoreType type, std::optional<ToneVariant> variant,
                                       std::size_t n_stocks, std::vector<MatrixEntry> entries)
    : date_(date),
      type_(type),
      variant_(type == ScoreType::coverage ? std::nullopt : variant),
      n_stocks_(n_stocks),
      entries_(std::move(entries)) {}

double ConnectivityMatrix::at(StockIndex row, StockIndex col) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, col},
                               [](const MatrixEntry& e, const std::pair<StockIndex, StockIndex>& key) {
                                   return std::pair{e.row, e.col} < key;
                               });
    if (it == entries_.end() || it->row != row || it->col != col) return 0.0;
    return it->value;
}

double ConnectivityMatrix::offdiag_sum() const {
    double s = 0.0;
    for (const auto& e : entries_) {
        if (e.row != e.col) s += e.value;
    }
    return s;
}

double ConnectivityMatrix::total_sum() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.value;
    return s;
}

bool ConnectivityMatrix::symmetric() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [&](const MatrixEntry& e) { return at(e.col, e.row) == e.value; });
}

namespace {

constexpr std::size_t kDenseSlots = 1024;

struct Contribution {
    StockIndex row;
    StockIndex col;
    double value;
};

void append_scores(const NewsEvent& ev, ScoreType type, std::optional<ToneVariant> variant,
                   std::vector<Contribution>& out) {
    for (const auto& a : ev.mentions) {
        const double ta = type == ScoreType::coverage ? 1.0 : tone_scalar(a.tone, *variant);
        for (const auto& b : ev.mentions) {
            double v = 1.0;
            if (type == ScoreType::sentiment) v = ta;
            if (type == ScoreType::comovement) v = ta * tone_scalar(b.tone, *variant);
            out.push_back({a.stock, b.stock, v});
        }
    }
}

}  // namespace

ConnectivityMatrix daily_matrix(std::span<const NewsEvent> day_events, ScoreType type,
                                std::optional<ToneVariant> variant, std::size_t n_stocks, Day date, unsigned chunks) {
    if (type != ScoreType::coverage && !variant) {
        throw std::invalid_argument("score types 1 and 2 need a tone variant");
    }
    if (!day_events.empty()) date = day_events.front().date;
    for (const auto& ev : day_events) {
        if (ev.date != date) throw std::invalid_argument("daily_matrix: events span more than one day");
        for (const auto& m : ev.mentions) {
            if (m.stock >= n_stocks) throw std::out_of_range("daily_matrix: stock index beyond n_stocks");
        }
    }

    std::vector<std::size_t> order(day_events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (!std::is_sorted(day_events.begin(), day_events.end(),
                        [](const NewsEvent& a, const NewsEvent& b) { return a.article_id < b.article_id; })) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return day_events[a].article_id < day_events[b].article_id;
        });
    }

    // Each chunk lists its articles' contributions in article order and the
    // chunk lists are concatenated in chunk order, so folding them front to
    // back sums every entry in article order whatever the chunking.
    chunks = std::max(1u, std::min<unsigned>(chunks, static_cast<unsigned>(std::max<std::size_t>(1, order.size()))));
    const std::size_t block = (order.size() + chunks - 1) / chunks;
    std::vector<std::vector<Contribution>> partial(chunks);
    parallel_for(chunks, chunks, [&](std::size_t c) {
        const std::size_t lo = c * block;
        const std::size_t hi = std::min(order.size(), lo + block);
        for (std::size_t k = lo; k < hi; ++k) append_scores(day_events[order[k]], type, variant, partial[c]);
    });

    std::vector<MatrixEntry> entries;
    if (n_stocks <= kDenseSlots) {
        // Slot table indexed by row * n + col; reset after use.
        thread_local std::vector<std::int32_t> slot;
        if (slot.size() < n_stocks * n_stocks) slot.assign(n_stocks * n_stocks, -1);
        for (const auto& p : partial) {
            for (const auto& c : p) {
                auto& s = slot[c.row * n_stocks + c.col];
                if (s < 0) {
                    s = static_cast<std::int32_t>(entries.size());
                    entries.push_back({c.row, c.col, c.value});
                } else {
                    entries[static_cast<std::size_t>(s)].value += c.value;
                }
            }
        }
        for (const auto& e : entries) slot[e.row * n_stocks + e.col] = -1;
        std::sort(entries.begin(), entries.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
    } else {
        std::vector<Contribution> all;
        for (auto& p : partial) all.insert(all.end(), p.begin(), p.end());
        std::stable_sort(all.begin(), all.end(), [](const Contribution& a, const Contribution& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (const auto& c : all) {
            if (!entries.empty() && entries.back().row == c.row && entries.back().col == c.col) {
                entries.back().value += c.value;
            } else {
                entries.push_back({c.row, c.col, c.value});
            }
        }
    }
    return ConnectivityMatrix(date, type, variant, n_stocks, std::move(entries));
}

std::optional<double> offdiag_fraction(const ConnectivityMatrix& m, double epsilon) {
    const double total = m.total_sum();
    if (!(std::abs(total) >= epsilon)) return std::nullopt;
    return m.offdiag_sum() / total;
}

std::optional<double> mci_daily(std::optional<double> frac_t, std::optional<double> frac_prev) {
    if (!frac_t || !frac_prev) return std::nullopt;
    return *frac_t - *frac_prev;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Aggregation a) {
    switch (a) {
        case Aggregation::mean: return "mean";
        case Aggregation::last: return "last";
        case Aggregation::sum: return "sum";
    }
    return "?";
}

Aggregation parse_aggregation(std::string_view text) {
    if (text == "mean") return Aggregation::mean;
    if (text == "last") return Aggregation::last;
    if (text == "sum") return Aggregation::sum;
    throw std::invalid_argument("unknown aggregation '" + std::string(text) + "'");
}

std::string_view to_string(LagCount l) { return l == LagCount::per_day ? "per_day" : "literal"; }

LagCount parse_lag_count(std::string_view text) {
    if (text == "per_day") return LagCount::per_day;
    if (text == "literal") return LagCount::literal;
    throw std::invalid_argument("unknown lag count mode '" + std::string(text) + "'");
}

std::string mci_name(ScoreType type, std::optional<ToneVariant> variant) {
    std::string name = "MCI" + std::to_string(static_cast<int>(type));
    if (type != ScoreType::coverage && variant) name += "_" + std::string(to_string(*variant));
    return name;
}

std::string MciSeries::name() const { return mci_name(type, variant); }

PredictorSeries MciSeries::monthly_predictor() const {
    PredictorSeries p;
    p.name = name();
    for (const auto& mv : monthly) {
        p.months.push_back(mv.month);
        p.values.push_back(mv.value);
    }
    return p;
}

std::vector<std::span<const NewsEvent>> group_by_day(std::span<const NewsEvent> events) {
    std::vector<std::span<const NewsEvent>> days;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= events.size(); ++i) {
        if (i == events.size() || events[i].date != events[start].date) {
            if (i < events.size() && events[i].date < events[start].date) {
                throw std::invalid_argument("events are not sorted by date");
            }
            days.push_back(events.subspan(start, i - start));
            start = i;
        }
    }
    return days;
}

MciSeries build_mci_series(std::span<const NewsEvent> events, ScoreType type, std::optional<ToneVariant> variant,
                           std::size_t n_stocks, const MciOptions& options) {
    MciSeries series;
    series.type = type;
    series.variant = type == ScoreType::coverage ? std::nullopt : variant;

    const auto days = group_by_day(events);
    std::vector<std::optional<double>> fractions(days.size());
    parallel_for(days.size(), options.threads, [&](std::size_t d) {
        fractions[d] = offdiag_fraction(daily_matrix(days[d], type, variant, n_stocks), options.denominator_epsilon);
    });

    std::optional<std::size_t> prev;
    for (std::size_t d = 0; d < days.size(); ++d) {
        const Day date = days[d].front().date;
        if (!fractions[d]) {
            series.missing.push_back({date, "degenerate denominator"});
            continue;
        }
        if (!prev) {
            series.missing.push_back({date, "no earlier day with a defined fraction"});
            prev = d;
            continue;
        }
        std::optional<double> lagged = fractions[*prev];
        if (options.lag_count == LagCount::literal && days[*prev].size() > days[d].size()) {
            const auto truncated = days[*prev].first(days[d].size());
            lagged = offdiag_fraction(daily_matrix(truncated, type, variant, n_stocks), options.denominator_epsilon);
        }
        if (auto v = mci_daily(fractions[d], lagged)) {
            series.daily.push_back({date, *v});
        } else {
            series.missing.push_back({date, "lagged fraction undefined"});
        }
        prev = d;
    }
    if (series.daily.empty()) {
        series.missing.clear();
        return series;
    }

    std::size_t i = 0;
    while (i < series.daily.size()) {
        const Month m = month_of(series.daily[i].date);
        double sum = 0.0;
        std::size_t count = 0;
        double last = 0.0;
        for (; i < series.daily.size() && month_of(series.daily[i].date) == m; ++i) {
            sum += series.daily[i].value;
            last = series.daily[i].value;
            ++count;
        }
        double value = sum;
        if (options.aggregation == Aggregation::mean) value = sum / static_cast<double>(count);
        if (options.aggregation == Aggregation::last) value = last;
        series.monthly.push_back({m, value});
    }
    return series;
}

// ---------------------------------------------------------------------------

std::vector<std::optional<double>> standardize_series(std::span<const double> x, Standardization mode) {
    std::vector<std::optional<double>> out(x.size());
    if (mode == Standardization::full_sample) {
        if (x.size() < 2) throw std::invalid_argument("standardize: need at least 2 observations");
        const double m = stats::mean(x);
        const double var = stats::sample_variance(x);
        if (!(var > 0.0)) throw std::domain_error("standardize: zero variance");
        const double sd = std::sqrt(var);
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / sd;
        return out;
    }
    for (std::size_t t = 1; t < x.size(); ++t) {
        const auto prefix = x.first(t + 1);
        const double var = stats::sample_variance(prefix);
        if (!(var > 0.0)) continue;
        out[t] = (x[t] - stats::mean(prefix)) / std::sqrt(var);
    }
    return out;
}

std::vector<double> standardize_full(std::span<const double> x) {
    const auto z = standardize_series(x, Standardization::full_sample);
    std::vector<double> out;
    out.reserve(z.size());
    for (const auto& v : z) out.push_back(*v);
    return out;
}

std::vector<std::vector<double>> monthly_row_mass(std::span<const NewsEvent> events, ScoreType type,
                                                  std::optional<ToneVariant> variant, std::size_t n_stocks,
                                                  std::span<const Month> months) {
    if (type != ScoreType::coverage && !variant) {
        throw std::invalid_argument("score types 1 and 2 need a tone variant");
    }
    std::vector<std::vector<double>> mass(months.size(), std::vector<double>(n_stocks, 0.0));
    if (months.empty()) return mass;
    for (const auto& ev : events) {
        const int k = months_between(months.front(), month_of(ev.date));
        if (k < 0 || static_cast<std::size_t>(k) >= months.size() || months[static_cast<std::size_t>(k)] != month_of(ev.date)) {
            continue;
        }
        auto& row = mass[static_cast<std::size_t>(k)];
        for (const auto& a : ev.mentions) {
            const double ta = type == ScoreType::coverage ? 1.0 : tone_scalar(a.tone, *variant);
            for (const auto& b : ev.mentions) {
                if (a.stock == b.stock) continue;
                double v = 1.0;
                if (type == ScoreType::sentiment) v = ta;
                if (type == ScoreType::comovement) v = ta * tone_scalar(b.tone, *variant);
                row.at(a.stock) += v;
            }
        }
    }
    return mass;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("euclidean_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace mci
