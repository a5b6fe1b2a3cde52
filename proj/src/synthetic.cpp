#include "mci/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "mci/csv.hpp"
#include "mci/stats.hpp"

namespace mci::synth {

void SyntheticConfig::validate() const {
    if (n_stocks < 1) throw std::invalid_argument("synthetic: n_stocks must be positive");
    if (connected_share < 0.0 || connected_share > 1.0) throw std::invalid_argument("synthetic: connected_share outside [0,1]");
    if (connected_share > 0.0 && n_stocks < 2) {
        throw std::invalid_argument("synthetic: connected news needs at least 2 stocks");
    }
    if (n_months < 2) throw std::invalid_argument("synthetic: need at least 2 months");
    if (!(articles_per_day > 0.0)) throw std::invalid_argument("synthetic: articles_per_day must be positive");
    if (max_mentions < 2) throw std::invalid_argument("synthetic: max_mentions below 2");
    if (!(tail_dof > 4.0)) throw std::invalid_argument("synthetic: tail_dof must exceed 4");
    if (!(return_sd > 0.0)) throw std::invalid_argument("synthetic: return_sd must be positive");
    if (stock_panel && n_stocks < 10) throw std::invalid_argument("synthetic: stock panel needs at least 10 stocks");
    if (recession_entry < 0 || recession_entry > 1 || recession_exit < 0 || recession_exit > 1) {
        throw std::invalid_argument("synthetic: regime switching probabilities outside [0,1]");
    }
}

SyntheticConfig synthetic_config_from(const KeyValueConfig& kv) {
    kv.reject_unknown({"n_stocks", "start", "n_months", "articles_per_day", "connected_share", "share_ramp",
                       "max_mentions", "tone_signal", "tone_common_sd", "tone_idio_sd", "self_tone_sd",
                       "planted_beta", "return_mean", "return_sd", "tail_dof", "rf_mean", "rf_sd",
                       "rf_persistence", "signal_type", "signal_variant", "recession_entry", "recession_exit",
                       "n_control_predictors", "stock_panel", "sort_type", "sort_variant", "cross_section_beta",
                       "stock_idio_sd", "seed"});
    SyntheticConfig c;
    c.n_stocks = static_cast<std::size_t>(kv.get_int("n_stocks", static_cast<long long>(c.n_stocks)));
    if (auto s = kv.get("start")) c.start = parse_month(*s);
    c.n_months = static_cast<std::size_t>(kv.get_int("n_months", static_cast<long long>(c.n_months)));
    c.articles_per_day = kv.get_double("articles_per_day", c.articles_per_day);
    c.connected_share = kv.get_double("connected_share", c.connected_share);
    c.share_ramp = kv.get_double("share_ramp", c.share_ramp);
    c.max_mentions = static_cast<std::size_t>(kv.get_int("max_mentions", static_cast<long long>(c.max_mentions)));
    c.tone_signal = kv.get_double("tone_signal", c.tone_signal);
    c.tone_common_sd = kv.get_double("tone_common_sd", c.tone_common_sd);
    c.tone_idio_sd = kv.get_double("tone_idio_sd", c.tone_idio_sd);
    c.self_tone_sd = kv.get_double("self_tone_sd", c.self_tone_sd);
    c.planted_beta = kv.get_double("planted_beta", c.planted_beta);
    c.return_mean = kv.get_double("return_mean", c.return_mean);
    c.return_sd = kv.get_double("return_sd", c.return_sd);
    c.tail_dof = kv.get_double("tail_dof", c.tail_dof);
    c.rf_mean = kv.get_double("rf_mean", c.rf_mean);
    c.rf_sd = kv.get_double("rf_sd", c.rf_sd);
    c.rf_persistence = kv.get_double("rf_persistence", c.rf_persistence);
    c.signal_type = parse_score_type(static_cast<int>(kv.get_int("signal_type", static_cast<int>(c.signal_type))));
    c.signal_variant = parse_tone_variant(kv.get_or("signal_variant", std::string(to_string(c.signal_variant))));
    c.recession_entry = kv.get_double("recession_entry", c.recession_entry);
    c.recession_exit = kv.get_double("recession_exit", c.recession_exit);
    c.n_control_predictors =
        static_cast<std::size_t>(kv.get_int("n_control_predictors", static_cast<long long>(c.n_control_predictors)));
    c.stock_panel = kv.get_bool("stock_panel", c.stock_panel);
    c.sort_type = parse_score_type(static_cast<int>(kv.get_int("sort_type", static_cast<int>(c.sort_type))));
    c.sort_variant = parse_tone_variant(kv.get_or("sort_variant", std::string(to_string(c.sort_variant))));
    c.cross_section_beta = kv.get_double("cross_section_beta", c.cross_section_beta);
    c.stock_idio_sd = kv.get_double("stock_idio_sd", c.stock_idio_sd);
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
    c.validate();
    return c;
}

namespace {

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

ToneTriple tone_from_optimism(double opt, Rng& rng) {
    opt = round4(std::clamp(opt, -0.95, 0.95));
    std::uniform_real_distribution<double> unif(0.0, 0.8);
    const double neutral = round4(unif(rng) * (1.0 - std::abs(opt)));
    const double pos = round4(0.5 * (1.0 - neutral + opt));
    const double neg = round4(std::max(0.0, 1.0 - neutral - pos));
    return {pos, neg, round4(std::max(0.0, 1.0 - pos - neg))};
}

std::vector<Day> weekdays_of(Month m) {
    using namespace std::chrono;
    std::vector<Day> days;
    const auto last = year_month_day_last{m.year(), month_day_last{m.month()}};
    for (unsigned d = 1; d <= static_cast<unsigned>(last.day()); ++d) {
        const Day day{m.year(), m.month(), std::chrono::day{d}};
        const weekday w{sys_days{day}};
        if (w != Saturday && w != Sunday) days.push_back(day);
    }
    return days;
}

std::string stock_name(std::size_t i, std::size_t n) {
    const int width = n > 999 ? 5 : 3;
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%0*zu", width, i + 1);
    return buf;
}

std::string article_id(std::size_t n) {
    char digits[24];
    const auto end = std::to_chars(digits, digits + sizeof digits, n).ptr;
    const auto len = static_cast<std::size_t>(end - digits);
    std::string id = "N";
    if (len < 8) id.append(8 - len, '0');
    id.append(digits, len);
    return id;
}

void generate_news(const SyntheticConfig& c, const std::vector<double>& latent, NewsDataset& out) {
    Rng rng = make_rng(c.seed, 1);
    std::poisson_distribution<int> n_articles(c.articles_per_day);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::geometric_distribution<int> extra(0.5);

    for (std::size_t i = 0; i < c.n_stocks; ++i) out.stocks.intern(stock_name(i, c.n_stocks));
    std::vector<StockIndex> pool(c.n_stocks);
    std::iota(pool.begin(), pool.end(), StockIndex{0});
    std::size_t article = 0;
    out.events.reserve(static_cast<std::size_t>(c.articles_per_day * 22.0 * static_cast<double>(c.n_months)));

    for (std::size_t m = 0; m < c.n_months; ++m) {
        const auto days = weekdays_of(c.start + std::chrono::months{static_cast<int>(m)});
        for (std::size_t d = 0; d < days.size(); ++d) {
            const double position = (static_cast<double>(d) + 0.5) / static_cast<double>(days.size()) - 0.5;
            double share = c.connected_share;
            if (c.connected_share > 0.0 && c.connected_share < 1.0) {
                share = std::clamp(c.connected_share + c.share_ramp * latent[m] * position, 0.02, 0.98);
            }
            const double common = c.tone_signal * latent[m] + c.tone_common_sd * normal(rng);
            const int k = n_articles(rng);
            for (int a = 0; a < k; ++a) {
                const bool connected = c.n_stocks >= 2 && unif(rng) < share;
                std::size_t n_mentions = 1;
                if (connected) {
                    n_mentions = std::min<std::size_t>(2 + static_cast<std::size_t>(extra(rng)),
                                                       std::min(c.max_mentions, c.n_stocks));
                }
                NewsEvent ev;
                ev.article_id = article_id(++article);
                ev.date = days[d];
                ev.mentions.reserve(n_mentions);
                for (std::size_t p = 0; p < n_mentions; ++p) {
                    std::uniform_int_distribution<std::size_t> pick(p, c.n_stocks - 1);
                    std::swap(pool[p], pool[pick(rng)]);
                    const double opt = connected ? common + c.tone_idio_sd * normal(rng) : c.self_tone_sd * normal(rng);
                    ev.mentions.push_back({pool[p], tone_from_optimism(opt, rng)});
                }
                out.events.push_back(std::move(ev));
            }
        }
    }
}

}  // namespace

Universe generate_universe(const SyntheticConfig& config, unsigned threads) {
    config.validate();
    Universe u;
    u.config = config;
    const std::size_t T = config.n_months;

    Rng state_rng = make_rng(config.seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto& truth = u.truth;
    Regime regime = Regime::expansion;
    std::vector<std::pair<Month, Regime>> labels;
    for (std::size_t m = 0; m < T; ++m) {
        truth.months.push_back(config.start + std::chrono::months{static_cast<int>(m)});
        truth.latent.push_back(normal(state_rng));
        const double u01 = unif(state_rng);
        if (m > 0) {
            if (regime == Regime::expansion && u01 < config.recession_entry) regime = Regime::recession;
            else if (regime == Regime::recession && u01 < config.recession_exit) regime = Regime::expansion;
        }
        truth.regimes.push_back(regime);
        labels.emplace_back(truth.months.back(), regime);
    }
    u.regimes = RegimeCalendar(std::move(labels));

    generate_news(config, truth.latent, u.news);

    MciOptions opts;
    opts.threads = threads;
    const auto series = build_mci_series(u.news.events, config.signal_type, config.signal_variant,
                                         u.news.stocks.size(), opts);
    truth.mci.assign(T, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> defined;
    for (const auto& mv : series.monthly) {
        const int k = months_between(config.start, mv.month);
        truth.mci[static_cast<std::size_t>(k)] = mv.value;
        defined.push_back(mv.value);
    }
    truth.signal.assign(T, 0.0);
    if (defined.size() >= 2 && stats::sample_variance(defined) > 0.0) {
        const double mean = stats::mean(defined);
        const double sd = std::sqrt(stats::sample_variance(defined));
        for (std::size_t m = 0; m < T; ++m) {
            if (std::isfinite(truth.mci[m])) truth.signal[m] = (truth.mci[m] - mean) / sd;
        }
    }

    // Market returns and the risk-free rate.
    Rng ret_rng = make_rng(config.seed, 2);
    std::student_t_distribution<double> student(config.tail_dof);
    const double t_scale = std::sqrt((config.tail_dof - 2.0) / config.tail_dof);
    const double innovation_sd = config.return_sd / std::sqrt(1.0 + config.planted_beta * config.planted_beta);
    const double rf_shock = config.rf_sd * std::sqrt(1.0 - config.rf_persistence * config.rf_persistence);
    double rf_dev = config.rf_sd * normal(ret_rng);
    auto& r = u.returns;
    for (std::size_t m = 0; m < T; ++m) {
        const double z = m > 0 ? truth.signal[m - 1] : 0.0;
        const double log_excess =
            config.return_mean + innovation_sd * (config.planted_beta * z + t_scale * student(ret_rng));
        rf_dev = config.rf_persistence * rf_dev + rf_shock * normal(ret_rng);
        const double rf = std::max(0.0, config.rf_mean + rf_dev);
        r.months.push_back(truth.months[m]);
        r.log_excess.push_back(log_excess);
        r.simple_excess.push_back((1.0 + rf) * std::expm1(log_excess));
        r.risk_free.push_back(rf);
    }

    // Control predictors: AR(1) series unrelated to returns.
    static const char* kNames[] = {"dp", "tbl", "svar", "ltr", "infl"};
    static const double kPersistence[] = {0.95, 0.98, 0.7, 0.0, 0.4};
    Rng pred_rng = make_rng(config.seed, 3);
    for (std::size_t p = 0; p < config.n_control_predictors; ++p) {
        PredictorSeries s;
        s.name = p < 5 ? kNames[p] : "z" + std::to_string(p + 1);
        const double phi = kPersistence[p % 5];
        double x = normal(pred_rng);
        for (std::size_t m = 0; m < T; ++m) {
            x = phi * x + std::sqrt(1.0 - phi * phi) * normal(pred_rng);
            s.months.push_back(truth.months[m]);
            s.values.push_back(x);
        }
        u.predictors.push_back(std::move(s));
    }

    if (config.stock_panel) {
        Rng stock_rng = make_rng(config.seed, 4);
        const auto mass = monthly_row_mass(u.news.events, config.sort_type, config.sort_variant,
                                           u.news.stocks.size(), truth.months);
        auto& panel = u.stock_returns;
        panel.months = truth.months;
        panel.stocks = u.news.stocks.names();
        for (std::size_t m = 0; m < T; ++m) {
            std::vector<double> z(config.n_stocks, 0.0);
            if (m > 0) {
                const auto& prev = mass[m - 1];
                const double mean = stats::mean(prev);
                const double var = stats::population_variance(prev);
                if (var > 0.0) {
                    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (prev[i] - mean) / std::sqrt(var);
                }
            }
            std::vector<double> row(config.n_stocks);
            for (std::size_t i = 0; i < row.size(); ++i) {
                row[i] = r.simple_excess[m] + r.risk_free[m] + config.cross_section_beta * z[i] +
                         config.stock_idio_sd * normal(stock_rng);
            }
            panel.returns.push_back(std::move(row));
        }
    }
    return u;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

nlohmann::ordered_json nullable(const std::vector<double>& v) {
    auto arr = nlohmann::ordered_json::array();
    for (double x : v) {
        if (std::isfinite(x)) arr.push_back(x);
        else arr.push_back(nullptr);
    }
    return arr;
}

}  // namespace

void write_universe(const Universe& u, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "news.jsonl");
        write_news(out, u.news.events, u.news.stocks);
    }
    {
        auto out = open_out(dir / "stocks.csv");
        u.news.stocks.write(out);
    }
    {
        auto out = open_out(dir / "returns.csv");
        write_return_series(out, u.returns);
    }
    {
        auto out = open_out(dir / "regime.csv");
        write_regime_calendar(out, u.regimes);
    }
    if (!u.predictors.empty()) {
        auto out = open_out(dir / "predictors.csv");
        write_predictors(out, u.predictors);
    }
    if (!u.stock_returns.months.empty()) {
        auto out = open_out(dir / "stock_returns.csv");
        write_stock_returns(out, u.stock_returns);
    }
    {
        const auto& c = u.config;
        nlohmann::ordered_json j;
        j["seed"] = c.seed;
        j["n_stocks"] = c.n_stocks;
        j["start"] = format_month(c.start);
        j["n_months"] = c.n_months;
        j["articles"] = u.news.events.size();
        j["planted_beta"] = c.planted_beta;
        j["signal"] = mci_name(c.signal_type, c.signal_variant);
        j["cross_section_beta"] = c.cross_section_beta;
        j["sort_measure"] = mci_name(c.sort_type, c.sort_variant);
        auto months = nlohmann::ordered_json::array();
        auto regimes = nlohmann::ordered_json::array();
        for (std::size_t m = 0; m < u.truth.months.size(); ++m) {
            months.push_back(format_month(u.truth.months[m]));
            regimes.push_back(u.truth.regimes[m] == Regime::expansion ? "expansion" : "recession");
        }
        j["months"] = months;
        j["latent"] = nullable(u.truth.latent);
        j["mci"] = nullable(u.truth.mci);
        j["signal_z"] = nullable(u.truth.signal);
        j["regime"] = regimes;
        auto out = open_out(dir / "truth.json");
        out << j.dump(1) << '\n';
    }
    {
        const std::size_t T = u.config.n_months;
        const std::size_t r = T >= 120 ? 96 : std::max<std::size_t>(24, T / 2);
        auto out = open_out(dir / "pipeline.cfg");
        out << "# Runs the full analysis on the generated universe.\n"
            << "news = news.jsonl\n"
            << "stock_map = stocks.csv\n"
            << "returns = returns.csv\n"
            << "regime = regime.csv\n";
        if (!u.predictors.empty()) out << "predictors = predictors.csv\n";
        if (!u.stock_returns.months.empty()) out << "stock_returns = stock_returns.csv\n";
        out << "oos_start = " << format_month(u.config.start + std::chrono::months{static_cast<int>(r)}) << '\n';
    }
}

}  // namespace mci::synth
