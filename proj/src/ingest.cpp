#include "mci/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mci/csv.hpp"

namespace mci {

// ---------------------------------------------------------------------------
// StockRegistry

StockIndex StockRegistry::intern(std::string_view id) {
    std::string key(id);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    const auto idx = static_cast<StockIndex>(names_.size());
    names_.push_back(key);
    index_.emplace(std::move(key), idx);
    return idx;
}

std::optional<StockIndex> StockRegistry::find(std::string_view id) const {
    if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
    return std::nullopt;
}

void StockRegistry::write(std::ostream& out) const {
    out << "index,stock\n";
    for (std::size_t i = 0; i < names_.size(); ++i) out << i << ',' << names_[i] << '\n';
}

StockRegistry StockRegistry::read(std::istream& in) {
    const auto table = csv::read(in);
    if (table.header != std::vector<std::string>{"index", "stock"}) {
        throw std::invalid_argument("stock map: expected header index,stock");
    }
    StockRegistry reg;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][0] != std::to_string(r)) {
            throw std::invalid_argument("stock map: indices must be dense and ordered");
        }
        if (reg.find(table.rows[r][1])) throw std::invalid_argument("stock map: duplicate stock");
        reg.intern(table.rows[r][1]);
    }
    return reg;
}

// ---------------------------------------------------------------------------
// News

namespace {

struct RawMention {
    std::string stock;
    ToneTriple tone;
};

std::optional<double> tone_component(const nlohmann::json& m, const char* key) {
    auto it = m.find(key);
    if (it == m.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw std::invalid_argument(std::string("tone '") + key + "' is not a number");
    const double v = it->get<double>();
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw std::invalid_argument(std::string("tone '") + key + "' outside [0,1]");
    }
    return v;
}

ToneTriple read_tone(const nlohmann::json& m, double tolerance) {
    auto pos = tone_component(m, "pos");
    auto neg = tone_component(m, "neg");
    auto neu = tone_component(m, "neu");
    const int missing = !pos + !neg + !neu;
    if (missing > 1) throw std::invalid_argument("incomplete tone triple");
    if (missing == 0) {
        if (std::abs(*pos + *neg + *neu - 1.0) > tolerance) {
            throw std::invalid_argument("tone components do not sum to 1");
        }
        return {*pos, *neg, *neu};
    }
    if (!pos) return {std::max(0.0, 1.0 - *neg - *neu), *neg, *neu};
    if (!neg) return {*pos, std::max(0.0, 1.0 - *pos - *neu), *neu};
    return {*pos, *neg, std::max(0.0, 1.0 - *pos - *neg)};
}

struct RawEvent {
    std::string id;
    Day date;
    std::vector<RawMention> mentions;
};

RawEvent read_record(std::string_view line, double tolerance) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        throw std::invalid_argument("malformed JSON");
    }
    if (!j.is_object()) throw std::invalid_argument("record is not an object");
    auto id = j.find("id");
    auto date = j.find("date");
    auto mentions = j.find("mentions");
    if (id == j.end() || !id->is_string()) throw std::invalid_argument("missing id");
    if (date == j.end() || !date->is_string()) throw std::invalid_argument("missing date");
    if (mentions == j.end() || !mentions->is_array()) throw std::invalid_argument("missing mentions");

    RawEvent ev;
    ev.id = id->get<std::string>();
    if (ev.id.empty()) throw std::invalid_argument("empty id");
    ev.date = parse_day(date->get<std::string>());
    if (mentions->empty()) throw std::invalid_argument("empty mentions");
    std::set<std::string> seen;
    for (const auto& m : *mentions) {
        if (!m.is_object()) throw std::invalid_argument("mention is not an object");
        auto stock = m.find("stock");
        if (stock == m.end() || !stock->is_string() || stock->get<std::string>().empty()) {
            throw std::invalid_argument("mention without stock");
        }
        auto name = stock->get<std::string>();
        if (!seen.insert(name).second) throw std::invalid_argument("duplicate stock '" + name + "' in article");
        ev.mentions.push_back({std::move(name), read_tone(m, tolerance)});
    }
    return ev;
}

}  // namespace

NewsDataset parse_news(std::istream& in, const NewsFormat& format, StockRegistry known) {
    NewsDataset out;
    out.stocks = std::move(known);
    std::map<std::string, std::size_t> first_line;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
        RawEvent raw;
        try {
            raw = read_record(view, format.tone_sum_tolerance);
        } catch (const std::invalid_argument& e) {
            out.rejected.push_back({line_no, e.what()});
            continue;
        }
        auto [it, inserted] = first_line.emplace(raw.id, line_no);
        if (!inserted) {
            throw std::invalid_argument("duplicate article id '" + raw.id + "' at lines " +
                                        std::to_string(it->second) + " and " + std::to_string(line_no));
        }
        NewsEvent ev{std::move(raw.id), raw.date, {}};
        ev.mentions.reserve(raw.mentions.size());
        for (auto& m : raw.mentions) ev.mentions.push_back({out.stocks.intern(m.stock), m.tone});
        out.events.push_back(std::move(ev));
    }
    std::sort(out.events.begin(), out.events.end(), [](const NewsEvent& a, const NewsEvent& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.article_id < b.article_id;
    });
    return out;
}

void write_news(std::ostream& out, std::span<const NewsEvent> events, const StockRegistry& stocks) {
    for (const auto& ev : events) {
        out << "{\"id\":" << nlohmann::json(ev.article_id).dump() << ",\"date\":\"" << format_day(ev.date)
            << "\",\"mentions\":[";
        for (std::size_t k = 0; k < ev.mentions.size(); ++k) {
            const auto& m = ev.mentions[k];
            if (k) out << ',';
            out << "{\"stock\":" << nlohmann::json(stocks.name(m.stock)).dump()
                << ",\"pos\":" << csv::format_double(m.tone.positive)
                << ",\"neg\":" << csv::format_double(m.tone.negative)
                << ",\"neu\":" << csv::format_double(m.tone.neutral) << '}';
        }
        out << "]}\n";
    }
}

std::string serialize_news(std::span<const NewsEvent> events, const StockRegistry& stocks) {
    std::ostringstream os;
    write_news(os, events, stocks);
    return os.str();
}

// ---------------------------------------------------------------------------
// Returns

std::optional<std::size_t> ReturnSeries::index_of(Month m) const {
    if (months.empty()) return std::nullopt;
    const int k = months_between(months.front(), m);
    if (k < 0 || static_cast<std::size_t>(k) >= months.size()) return std::nullopt;
    return static_cast<std::size_t>(k);
}

namespace {

void require_header(const csv::Table& t, const std::vector<std::string>& expected, std::string_view what) {
    if (t.header != expected) {
        std::string h;
        for (const auto& e : expected) h += (h.empty() ? "" : ",") + e;
        throw std::invalid_argument(std::string(what) + ": expected header " + h);
    }
}

std::string at_line(const csv::Table& t, std::size_t row) {
    return "line " + std::to_string(t.line_numbers[row]) + ": ";
}

}  // namespace

ReturnSeries parse_return_series(std::istream& in) {
    const auto t = csv::read(in);
    require_header(t, {"month", "log_excess", "simple_excess", "risk_free"}, "returns file");
    ReturnSeries s;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        try {
            const Month m = parse_month(row[0]);
            if (!s.months.empty() && m != next_month(s.months.back())) {
                throw std::invalid_argument(m <= s.months.back() ? "months not increasing" : "gap before " + row[0]);
            }
            s.months.push_back(m);
            s.log_excess.push_back(csv::parse_double(row[1]));
            s.simple_excess.push_back(csv::parse_double(row[2]));
            s.risk_free.push_back(csv::parse_double(row[3]));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("returns file " + at_line(t, r) + e.what());
        }
    }
    if (s.months.empty()) throw std::invalid_argument("returns file: no rows");
    return s;
}

void write_return_series(std::ostream& out, const ReturnSeries& s) {
    out << "month,log_excess,simple_excess,risk_free\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format_month(s.months[i]) << ',' << csv::format_double(s.log_excess[i]) << ','
            << csv::format_double(s.simple_excess[i]) << ',' << csv::format_double(s.risk_free[i]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Regimes

RegimeCalendar::RegimeCalendar(std::vector<std::pair<Month, Regime>> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].first == entries_[i - 1].first) {
            throw std::invalid_argument("regime calendar: duplicate month " + format_month(entries_[i].first));
        }
        if (entries_[i].first != next_month(entries_[i - 1].first)) {
            throw std::invalid_argument("regime calendar: gap before " + format_month(entries_[i].first));
        }
    }
}

std::optional<Regime> RegimeCalendar::label_of(Month m) const {
    if (entries_.empty()) return std::nullopt;
    const int k = months_between(entries_.front().first, m);
    if (k < 0 || static_cast<std::size_t>(k) >= entries_.size()) return std::nullopt;
    return entries_[static_cast<std::size_t>(k)].second;
}

bool RegimeCalendar::covers(std::span<const Month> months) const {
    return std::all_of(months.begin(), months.end(), [&](Month m) { return label_of(m).has_value(); });
}

std::vector<int> RegimeCalendar::expansion_indicator(std::span<const Month> months) const {
    std::vector<int> out;
    out.reserve(months.size());
    for (Month m : months) {
        auto label = label_of(m);
        if (!label) throw std::invalid_argument("regime calendar does not label " + format_month(m));
        out.push_back(*label == Regime::expansion ? 1 : 0);
    }
    return out;
}

std::vector<int> RegimeCalendar::recession_indicator(std::span<const Month> months) const {
    auto up = expansion_indicator(months);
    for (int& v : up) v = 1 - v;
    return up;
}

RegimeCalendar parse_regime_calendar(std::istream& in) {
    const auto t = csv::read(in);
    require_header(t, {"month", "label"}, "regime file");
    std::vector<std::pair<Month, Regime>> entries;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        Regime label;
        if (row[1] == "expansion") {
            label = Regime::expansion;
        } else if (row[1] == "recession") {
            label = Regime::recession;
        } else {
            throw std::invalid_argument("regime file " + at_line(t, r) + "unknown label '" + row[1] + "'");
        }
        try {
            entries.emplace_back(parse_month(row[0]), label);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("regime file " + at_line(t, r) + e.what());
        }
    }
    return RegimeCalendar(std::move(entries));
}

void write_regime_calendar(std::ostream& out, const RegimeCalendar& calendar) {
    out << "month,label\n";
    for (const auto& [m, label] : calendar.entries()) {
        out << format_month(m) << ',' << (label == Regime::expansion ? "expansion" : "recession") << '\n';
    }
}

// ---------------------------------------------------------------------------
// Predictors

std::optional<double> PredictorSeries::value_at(Month m) const {
    auto it = std::lower_bound(months.begin(), months.end(), m);
    if (it == months.end() || *it != m) return std::nullopt;
    return values[static_cast<std::size_t>(it - months.begin())];
}

std::vector<PredictorSeries> parse_predictors(std::istream& in) {
    const auto t = csv::read(in);
    if (t.header.size() < 2 || t.header[0] != "month") {
        throw std::invalid_argument("predictor file: expected header month,<name>,...");
    }
    std::vector<PredictorSeries> out(t.header.size() - 1);
    for (std::size_t c = 1; c < t.header.size(); ++c) out[c - 1].name = t.header[c];
    std::optional<Month> prev;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        try {
            const Month m = parse_month(row[0]);
            if (prev && m <= *prev) throw std::invalid_argument("months not increasing");
            prev = m;
            for (std::size_t c = 1; c < row.size(); ++c) {
                if (row[c].empty()) continue;
                out[c - 1].months.push_back(m);
                out[c - 1].values.push_back(csv::parse_double(row[c]));
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("predictor file " + at_line(t, r) + e.what());
        }
    }
    return out;
}

void write_predictors(std::ostream& out, std::span<const PredictorSeries> series) {
    std::set<Month> all;
    for (const auto& s : series) all.insert(s.months.begin(), s.months.end());
    out << "month";
    for (const auto& s : series) out << ',' << s.name;
    out << '\n';
    for (Month m : all) {
        out << format_month(m);
        for (const auto& s : series) {
            out << ',';
            if (auto v = s.value_at(m)) out << csv::format_double(*v);
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Stock returns

StockReturnPanel parse_stock_returns(std::istream& in) {
    const auto t = csv::read(in);
    require_header(t, {"month", "stock", "return"}, "stock returns file");
    std::map<Month, std::map<std::string, double>> cells;
    std::vector<std::string> stocks;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        try {
            const Month m = parse_month(row[0]);
            if (seen.insert(row[1]).second) stocks.push_back(row[1]);
            if (!cells[m].emplace(row[1], csv::parse_double(row[2])).second) {
                throw std::invalid_argument("duplicate (month, stock)");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("stock returns file " + at_line(t, r) + e.what());
        }
    }
    StockReturnPanel panel;
    panel.stocks = stocks;
    if (cells.empty()) return panel;
    for (Month m = cells.begin()->first; m <= cells.rbegin()->first; m = next_month(m)) {
        panel.months.push_back(m);
        std::vector<double> row(stocks.size(), std::nan(""));
        if (auto it = cells.find(m); it != cells.end()) {
            for (std::size_t s = 0; s < stocks.size(); ++s) {
                if (auto c = it->second.find(stocks[s]); c != it->second.end()) row[s] = c->second;
            }
        }
        panel.returns.push_back(std::move(row));
    }
    return panel;
}

void write_stock_returns(std::ostream& out, const StockReturnPanel& panel) {
    out << "month,stock,return\n";
    for (std::size_t t = 0; t < panel.months.size(); ++t) {
        for (std::size_t s = 0; s < panel.stocks.size(); ++s) {
            const double v = panel.returns[t][s];
            if (std::isnan(v)) continue;
            out << format_month(panel.months[t]) << ',' << panel.stocks[s] << ',' << csv::format_double(v) << '\n';
        }
    }
}

}  // namespace mci
