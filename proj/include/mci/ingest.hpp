#pragma once

// Loaders and canonical writers for the news, returns, regime, predictor and
// stock-return inputs. Parsed datasets are immutable values.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mci/dates.hpp"
#include "mci/stats.hpp"

namespace mci {

struct ToneTriple {
    double positive = 0.0;
    double negative = 0.0;
    double neutral = 1.0;

    friend bool operator==(const ToneTriple&, const ToneTriple&) = default;
};

using StockIndex = std::uint32_t;

/// Opaque stock identifiers mapped to dense indices in first-appearance order.
class StockRegistry {
public:
    StockIndex intern(std::string_view id);
    std::optional<StockIndex> find(std::string_view id) const;
    const std::string& name(StockIndex index) const { return names_.at(index); }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    /// CSV `index,stock`.
    void write(std::ostream& out) const;
    static StockRegistry read(std::istream& in);

    friend bool operator==(const StockRegistry& a, const StockRegistry& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, StockIndex> index_;
};

struct Mention {
    StockIndex stock = 0;
    ToneTriple tone;

    friend bool operator==(const Mention&, const Mention&) = default;
};

struct NewsEvent {
    std::string article_id;
    Day date;
    std::vector<Mention> mentions;

    /// Connected news mentions at least two stocks; otherwise it is self-connected.
    bool connected() const { return mentions.size() >= 2; }

    friend bool operator==(const NewsEvent&, const NewsEvent&) = default;
};

struct ParseIssue {
    std::size_t line = 0;
    std::string reason;
};

struct NewsFormat {
    /// Allowed |pos + neg + neu - 1| when all three components are present.
    double tone_sum_tolerance = 1e-6;
};

struct NewsDataset {
    StockRegistry stocks;
    std::vector<NewsEvent> events;     // sorted by (date, article_id)
    std::vector<ParseIssue> rejected;  // per-record rejections, in line order
};

/// Parses one JSON object per line. Bad records are reported and skipped; a
/// duplicated article id rejects the whole file (std::invalid_argument).
/// `known` seeds the stock registry so indices stay stable across files.
NewsDataset parse_news(std::istream& in, const NewsFormat& format = {}, StockRegistry known = {});

/// Canonical line format; parse_news(write_news(x)) reproduces x and
/// write_news(parse_news(s)) reproduces a canonical s byte for byte.
void write_news(std::ostream& out, std::span<const NewsEvent> events, const StockRegistry& stocks);
std::string serialize_news(std::span<const NewsEvent> events, const StockRegistry& stocks);

struct ReturnSeries {
    std::vector<Month> months;
    std::vector<double> log_excess;
    std::vector<double> simple_excess;
    std::vector<double> risk_free;

    std::size_t size() const { return months.size(); }
    std::optional<std::size_t> index_of(Month m) const;
    stats::Summary summary_log_excess() const { return stats::summarize(log_excess); }
};

/// CSV `month,log_excess,simple_excess,risk_free`. Gaps or non-finite values throw.
ReturnSeries parse_return_series(std::istream& in);
void write_return_series(std::ostream& out, const ReturnSeries& series);

enum class Regime { expansion, recession };

class RegimeCalendar {
public:
    RegimeCalendar() = default;
    /// Entries may arrive in any order; duplicates and gaps throw.
    explicit RegimeCalendar(std::vector<std::pair<Month, Regime>> entries);

    std::optional<Regime> label_of(Month m) const;
    bool covers(std::span<const Month> months) const;

    /// 1 for expansion months, 0 otherwise; throws if a month is unlabeled.
    std::vector<int> expansion_indicator(std::span<const Month> months) const;
    std::vector<int> recession_indicator(std::span<const Month> months) const;

    const std::vector<std::pair<Month, Regime>>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    std::vector<std::pair<Month, Regime>> entries_;
};

/// CSV `month,label`, label in {expansion, recession}.
RegimeCalendar parse_regime_calendar(std::istream& in);
void write_regime_calendar(std::ostream& out, const RegimeCalendar& calendar);

struct PredictorSeries {
    std::string name;
    std::vector<Month> months;
    std::vector<double> values;

    std::optional<double> value_at(Month m) const;
};

/// CSV `month,<name1>,<name2>,...`. An empty cell leaves that month out of that series.
std::vector<PredictorSeries> parse_predictors(std::istream& in);
void write_predictors(std::ostream& out, std::span<const PredictorSeries> series);

/// Stock-level monthly simple returns, rows are months and columns stocks.
/// Missing observations are NaN.
struct StockReturnPanel {
    std::vector<Month> months;
    std::vector<std::string> stocks;
    std::vector<std::vector<double>> returns;
};

/// Long CSV `month,stock,return`.
StockReturnPanel parse_stock_returns(std::istream& in);
void write_stock_returns(std::ostream& out, const StockReturnPanel& panel);

}  // namespace mci
