#pragma once

// Connection scores, daily media connectivity matrices and the Media
// Connection Index (MCI) families built from them.
//
//   type 1 (sentiment):  score(i,j) = tone(i) * mention(j)
//   type 2 (co-movement): score(i,j) = tone(i) * tone(j)
//   type 3 (coverage):    score(i,j) = mention(i) * mention(j)
//
// A daily matrix sums one score type over the day's articles. The daily index
// is the change in the off-diagonal share of the matrix mass relative to the
// previous day that has a defined share.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mci/dates.hpp"
#include "mci/ingest.hpp"

namespace mci {

enum class ToneVariant { opt, pos, neg };
enum class ScoreType { sentiment = 1, comovement = 2, coverage = 3 };

std::string_view to_string(ToneVariant v);
ToneVariant parse_tone_variant(std::string_view text);
ScoreType parse_score_type(int type);

/// opt = positive - negative; pos = positive; neg = negative.
double tone_scalar(const ToneTriple& tone, ToneVariant variant);

struct ScoreEntry {
    ScoreType type;
    StockIndex row;
    StockIndex col;
    double value;
};

/// Scores of one article for every ordered pair of its mentioned stocks,
/// diagonal included, for all three types. Type 3 ignores the variant.
std::vector<ScoreEntry> connection_scores(const NewsEvent& event, ToneVariant variant);

struct MatrixEntry {
    StockIndex row;
    StockIndex col;
    double value;

    friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

/// Sparse daily accumulation of one score type. Entries are sorted by (row, col)
/// and only pairs of stocks mentioned together that day are present.
class ConnectivityMatrix {
public:
    ConnectivityMatrix(Day date, ScoreType type, std::optional<ToneVariant> variant, std::size_t n_stocks,
                       std::vector<MatrixEntry> entries);

    Day date() const { return date_; }
    ScoreType type() const { return type_; }
    std::optional<ToneVariant> variant() const { return variant_; }
    std::size_t n_stocks() const { return n_stocks_; }
    std::span<const MatrixEntry> entries() const { return entries_; }

    double at(StockIndex row, StockIndex col) const;
    double offdiag_sum() const;
    double total_sum() const;
    bool symmetric() const;

    friend bool operator==(const ConnectivityMatrix&, const ConnectivityMatrix&) = default;

private:
    Day date_;
    ScoreType type_;
    std::optional<ToneVariant> variant_;
    std::size_t n_stocks_;
    std::vector<MatrixEntry> entries_;
};

/// All events must share one date. Per-entry sums run in article-id order, so the
/// result is bit-identical for any `chunks` count. `date` is used when the day is empty.
ConnectivityMatrix daily_matrix(std::span<const NewsEvent> day_events, ScoreType type,
                                std::optional<ToneVariant> variant, std::size_t n_stocks, Day date = {},
                                unsigned chunks = 1);

inline constexpr double kDenominatorEpsilon = 1e-12;

/// Off-diagonal mass over total mass; nullopt when |total| < epsilon.
std::optional<double> offdiag_fraction(const ConnectivityMatrix& m, double epsilon = kDenominatorEpsilon);

/// frac_t - frac_prev, missing if either side is missing.
std::optional<double> mci_daily(std::optional<double> frac_t, std::optional<double> frac_prev);

enum class Aggregation { mean, last, sum };
/// per_day: the lagged fraction uses all articles of the previous day.
/// literal: the lagged fraction only sums that day's first K_t articles, K_t being
/// today's article count.
enum class LagCount { per_day, literal };

std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view text);
std::string_view to_string(LagCount l);
LagCount parse_lag_count(std::string_view text);

struct MciOptions {
    Aggregation aggregation = Aggregation::mean;
    LagCount lag_count = LagCount::per_day;
    double denominator_epsilon = kDenominatorEpsilon;
    unsigned threads = 1;
};

struct DailyValue {
    Day date;
    double value;
};

struct MonthlyValue {
    Month month;
    double value;
};

struct MissingDay {
    Day date;
    std::string reason;
};

struct MciSeries {
    ScoreType type = ScoreType::coverage;
    std::optional<ToneVariant> variant;
    std::vector<DailyValue> daily;
    std::vector<MonthlyValue> monthly;
    std::vector<MissingDay> missing;

    /// "MCI1_opt", "MCI2_neg", "MCI3".
    std::string name() const;
    PredictorSeries monthly_predictor() const;
};

std::string mci_name(ScoreType type, std::optional<ToneVariant> variant);

/// Splits date-sorted events into per-day runs.
std::vector<std::span<const NewsEvent>> group_by_day(std::span<const NewsEvent> events);

/// `events` must be sorted by (date, article_id). Fewer than two days with a
/// defined fraction yields an empty series.
MciSeries build_mci_series(std::span<const NewsEvent> events, ScoreType type, std::optional<ToneVariant> variant,
                           std::size_t n_stocks, const MciOptions& options = {});

enum class Standardization { full_sample, recursive };

/// full_sample: zero mean, unit (n-1) sd; throws std::domain_error on zero variance.
/// recursive: entry t uses only observations 0..t; missing while the prefix has
/// fewer than two points or no variation.
std::vector<std::optional<double>> standardize_series(std::span<const double> x, Standardization mode);
std::vector<double> standardize_full(std::span<const double> x);

/// Stock-level connection measure: for each month and stock i, the off-diagonal
/// row mass sum_{j != i} of the month's summed type-p matrices. Stocks without
/// news in a month get 0.
std::vector<std::vector<double>> monthly_row_mass(std::span<const NewsEvent> events, ScoreType type,
                                                  std::optional<ToneVariant> variant, std::size_t n_stocks,
                                                  std::span<const Month> months);

/// Euclidean distance between two tone vectors; used to contrast with the
/// co-movement score, which distinguishes same-sign from opposite-sign pairs.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mci
