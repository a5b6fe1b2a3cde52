#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mci/connectivity.hpp"
#include "mci/synthetic.hpp"
#include "oracles.hpp"

using namespace mci;

namespace {

const Day kDay = parse_day("2004-01-05");

// Tone triple with the requested optimism; the neutral share absorbs the rest.
ToneTriple with_opt(double opt) {
    return opt >= 0 ? ToneTriple{opt, 0.0, 1.0 - opt} : ToneTriple{0.0, -opt, 1.0 + opt};
}

NewsEvent article(std::string id, std::vector<std::pair<StockIndex, double>> opt, Day day = kDay) {
    NewsEvent e{std::move(id), day, {}};
    for (auto [s, o] : opt) e.mentions.push_back({s, with_opt(o)});
    return e;
}

double score(const std::vector<ScoreEntry>& s, ScoreType t, StockIndex i, StockIndex j) {
    for (const auto& e : s) {
        if (e.type == t && e.row == i && e.col == j) return e.value;
    }
    return 0.0;
}

}  // namespace

TEST_CASE("tone variants") {
    CHECK(tone_scalar({1, 0, 0}, ToneVariant::opt) == 1.0);
    CHECK(tone_scalar({0.2, 0.3, 0.5}, ToneVariant::opt) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(tone_scalar({0.2, 0.3, 0.5}, ToneVariant::neg) == 0.3);
    CHECK(tone_scalar({0.2, 0.3, 0.5}, ToneVariant::pos) == 0.2);
}

TEST_CASE("self-connected article only touches the diagonal") {
    const auto s = connection_scores(article("a", {{0, 0.5}}), ToneVariant::opt);
    CHECK(s.size() == 3);
    CHECK(score(s, ScoreType::sentiment, 0, 0) == 0.5);
    CHECK(score(s, ScoreType::comovement, 0, 0) == 0.25);
    CHECK(score(s, ScoreType::coverage, 0, 0) == 1.0);
}

TEST_CASE("co-movement scores of the worked example") {
    const auto s1 = connection_scores(article("n1", {{0, 0.8}, {1, 0.2}}), ToneVariant::opt);
    CHECK(score(s1, ScoreType::comovement, 0, 1) == doctest::Approx(0.16).epsilon(1e-15));
    const auto s2 = connection_scores(article("n2", {{2, -0.6}, {3, -0.2}}), ToneVariant::opt);
    CHECK(score(s2, ScoreType::comovement, 2, 3) == doctest::Approx(0.12).epsilon(1e-15));
    CHECK(score(s2, ScoreType::comovement, 2, 3) > 0.0);
    // Sentiment uses the row stock's tone only.
    CHECK(score(s1, ScoreType::sentiment, 0, 1) == 0.8);
    CHECK(score(s1, ScoreType::sentiment, 1, 0) == 0.2);
}

TEST_CASE("per-article identity: co-movement equals sentiment times column tone") {
    std::mt19937_64 rng(3);
    for (const auto& e : oracle::random_events(rng, 5, 20, 15)) {
        for (auto q : {ToneVariant::opt, ToneVariant::pos, ToneVariant::neg}) {
            const auto s = connection_scores(e, q);
            for (const auto& a : e.mentions) {
                for (const auto& b : e.mentions) {
                    CHECK(score(s, ScoreType::comovement, a.stock, b.stock) ==
                          score(s, ScoreType::sentiment, a.stock, b.stock) * tone_scalar(b.tone, q));
                }
            }
        }
    }
}

TEST_CASE("daily matrix of the two-news two-stock example") {
    const std::vector<NewsEvent> day{article("n1", {{0, 0.8}, {1, 0.2}}), article("n2", {{0, 0.2}, {1, 0.8}})};
    const auto m = daily_matrix(day, ScoreType::comovement, ToneVariant::opt, 2);
    CHECK(m.at(0, 1) == doctest::Approx(0.32).epsilon(1e-15));
    CHECK(m.at(1, 0) == m.at(0, 1));
    CHECK(m.symmetric());
}

TEST_CASE("empty day and off-diagonal fractions") {
    const auto empty = daily_matrix({}, ScoreType::coverage, std::nullopt, 5, kDay);
    CHECK(empty.entries().empty());
    CHECK(empty.total_sum() == 0.0);
    CHECK_FALSE(offdiag_fraction(empty));

    const std::vector<NewsEvent> self{article("a", {{0, 0.3}}), article("b", {{1, -0.3}})};
    CHECK(offdiag_fraction(daily_matrix(self, ScoreType::coverage, std::nullopt, 2)) == 0.0);

    const std::vector<NewsEvent> one{article("a", {{0, 0.3}, {1, 0.1}})};
    const auto m = daily_matrix(one, ScoreType::coverage, std::nullopt, 2);
    CHECK(m.offdiag_sum() == 2.0);
    CHECK(m.total_sum() == 4.0);
    CHECK(offdiag_fraction(m) == 0.5);

    // Tone-weighted mass can cancel to zero.
    const std::vector<NewsEvent> cancel{article("a", {{0, 0.5}}), article("b", {{1, -0.5}})};
    CHECK_FALSE(offdiag_fraction(daily_matrix(cancel, ScoreType::sentiment, ToneVariant::opt, 2)));
}

TEST_CASE("daily index is a difference of fractions") {
    CHECK(mci_daily(0.5, 0.5) == 0.0);
    CHECK(*mci_daily(0.6, 0.5) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK_FALSE(mci_daily(std::nullopt, 0.5));
    CHECK_FALSE(mci_daily(0.5, std::nullopt));
}

TEST_CASE("chunked accumulation is bit-identical to serial accumulation") {
    std::mt19937_64 rng(9);
    const auto events = oracle::random_events(rng, 1, 1000, 30, 6);
    for (auto t : {ScoreType::sentiment, ScoreType::comovement, ScoreType::coverage}) {
        const auto serial = daily_matrix(events, t, ToneVariant::opt, 30, {}, 1);
        for (unsigned chunks : {2u, 3u, 8u}) CHECK(daily_matrix(events, t, ToneVariant::opt, 30, {}, chunks) == serial);
        // Input order does not matter either: articles are summed in id order.
        auto shuffled = events;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(daily_matrix(shuffled, t, ToneVariant::opt, 30, {}, 8) == serial);
    }
}

TEST_CASE("matrix structure invariants") {
    std::mt19937_64 rng(17);
    const auto events = oracle::random_events(rng, 1, 300, 25, 5);
    const auto m2 = daily_matrix(events, ScoreType::comovement, ToneVariant::opt, 25);
    const auto m3 = daily_matrix(events, ScoreType::coverage, std::nullopt, 25);
    CHECK(m2.symmetric());
    CHECK(m3.symmetric());
    CHECK_FALSE(m3.variant());
    for (StockIndex i = 0; i < 25; ++i) {
        int mentions = 0;
        for (const auto& e : events) {
            for (const auto& m : e.mentions) mentions += m.stock == i;
        }
        CHECK(m3.at(i, i) == mentions);
    }
    for (const auto& e : m3.entries()) CHECK(e.value == std::round(e.value));
    const auto f3 = offdiag_fraction(m3);
    REQUIRE(f3);
    CHECK(*f3 >= 0.0);
    CHECK(*f3 < 1.0);
    for (auto q : {ToneVariant::pos, ToneVariant::neg}) {
        for (const auto& e : daily_matrix(events, ScoreType::comovement, q, 25).entries()) CHECK(e.value >= 0.0);
    }
    CHECK_FALSE(daily_matrix(events, ScoreType::sentiment, ToneVariant::opt, 25).symmetric());
}

TEST_CASE("daily matrix rejects mixed dates and unknown stocks") {
    const std::vector<NewsEvent> mixed{article("a", {{0, 0.1}}), article("b", {{0, 0.1}}, parse_day("2004-01-06"))};
    CHECK_THROWS(daily_matrix(mixed, ScoreType::coverage, std::nullopt, 2));
    const std::vector<NewsEvent> out_of_range{article("a", {{5, 0.1}})};
    CHECK_THROWS(daily_matrix(out_of_range, ScoreType::coverage, std::nullopt, 2));
}

TEST_CASE("series matches a single-pass brute-force recomputation") {
    std::mt19937_64 rng(21);
    const auto events = oracle::random_events(rng, 100, 30, 20, 5);
    for (auto t : {ScoreType::sentiment, ScoreType::comovement, ScoreType::coverage}) {
        for (auto q : {ToneVariant::opt, ToneVariant::pos, ToneVariant::neg}) {
            const auto s = build_mci_series(events, t, q, 20);
            const auto b = oracle::brute_force_mci(events, t, q);
            REQUIRE(s.daily.size() == b.daily.size());
            for (const auto& d : s.daily) CHECK(std::abs(d.value - b.daily.at(d.date)) < 1e-10);
            REQUIRE(s.monthly.size() == b.monthly.size());
            for (const auto& m : s.monthly) CHECK(std::abs(m.value - b.monthly.at(m.month)) < 1e-10);
        }
    }
}

TEST_CASE("co-movement index equals a tone-weighted coverage index") {
    std::mt19937_64 rng(22);
    const auto events = oracle::random_events(rng, 100, 25, 20, 5);
    for (auto q : {ToneVariant::opt, ToneVariant::pos, ToneVariant::neg}) {
        const auto s = build_mci_series(events, ScoreType::comovement, q, 20);
        const auto w = oracle::weighted_coverage_daily(events, q);
        REQUIRE(s.daily.size() == w.size());
        for (const auto& d : s.daily) CHECK(std::abs(d.value - w.at(d.date)) < 1e-10);
    }
}

TEST_CASE("identical news every day gives a zero index") {
    std::vector<NewsEvent> events;
    Day d = parse_day("2004-01-01");
    for (int k = 0; k < 60; ++k) {
        events.push_back(article("a" + std::to_string(100 + k), {{0, 0.4}, {1, -0.2}}, d));
        events.push_back(article("b" + std::to_string(100 + k), {{2, 0.1}}, d));
        d = std::chrono::sys_days{d} + std::chrono::days{1};
    }
    for (auto t : {ScoreType::sentiment, ScoreType::comovement, ScoreType::coverage}) {
        const auto s = build_mci_series(events, t, ToneVariant::opt, 3);
        CHECK(s.daily.size() == 59);
        for (const auto& v : s.daily) CHECK(v.value == 0.0);
        for (const auto& v : s.monthly) CHECK(v.value == 0.0);
    }
}

TEST_CASE("previous day skips days without a defined fraction") {
    std::vector<NewsEvent> events{article("a", {{0, 0.5}, {1, 0.5}}, parse_day("2004-01-05")),
                                  article("b", {{0, 0.5}}, parse_day("2004-01-06")),
                                  article("c", {{1, -0.5}}, parse_day("2004-01-06")),
                                  article("d", {{0, 0.5}}, parse_day("2004-01-07"))};
    const auto s = build_mci_series(events, ScoreType::sentiment, ToneVariant::opt, 2);
    REQUIRE(s.daily.size() == 1);
    CHECK(s.daily[0].date == parse_day("2004-01-07"));
    CHECK(s.daily[0].value == doctest::Approx(0.0 - 0.5));
    // The first day has no predecessor; the second has a zero tone-weighted total.
    REQUIRE(s.missing.size() == 2);
    CHECK(s.missing[0].date == parse_day("2004-01-05"));
    CHECK(s.missing[1].date == parse_day("2004-01-06"));
    CHECK(s.missing[0].reason != s.missing[1].reason);
}

TEST_CASE("fewer than two defined days gives an empty series") {
    const std::vector<NewsEvent> one{article("a", {{0, 0.5}, {1, 0.5}})};
    const auto s = build_mci_series(one, ScoreType::coverage, std::nullopt, 2);
    CHECK(s.daily.empty());
    CHECK(s.monthly.empty());
}

TEST_CASE("rising connected share within a month gives a positive coverage index") {
    std::vector<NewsEvent> events;
    Day d = parse_day("2004-03-01");
    int id = 0;
    for (int k = 0; k < 31; ++k) {
        // Day k has k connected articles out of 40.
        for (int a = 0; a < 40; ++a) {
            const StockIndex s = static_cast<StockIndex>(a % 10);
            if (a < k) events.push_back(article("x" + std::to_string(10000 + id++), {{s, 0.1}, {StockIndex(s + 10), 0.1}}, d));
            else events.push_back(article("x" + std::to_string(10000 + id++), {{s, 0.1}}, d));
        }
        d = std::chrono::sys_days{d} + std::chrono::days{1};
    }
    const auto s = build_mci_series(events, ScoreType::coverage, std::nullopt, 20);
    REQUIRE(s.monthly.size() == 1);
    CHECK(s.monthly[0].value > 0.0);
    const auto b = oracle::brute_force_mci(events, ScoreType::coverage, ToneVariant::opt);
    CHECK(std::abs(s.monthly[0].value - b.monthly.begin()->second) < 1e-12);
}

TEST_CASE("aggregation and lag-count options") {
    std::mt19937_64 rng(5);
    auto events = oracle::random_events(rng, 40, 10, 12, 4);
    // Make day sizes differ so the literal lag truncates.
    events.erase(std::remove_if(events.begin(), events.end(),
                                [](const NewsEvent& e) { return e.date.day() == std::chrono::day{3} && e.article_id.back() > '4'; }),
                 events.end());
    const auto mean = build_mci_series(events, ScoreType::coverage, std::nullopt, 12);
    MciOptions o;
    o.aggregation = Aggregation::last;
    const auto last = build_mci_series(events, ScoreType::coverage, std::nullopt, 12, o);
    o.aggregation = Aggregation::sum;
    const auto sum = build_mci_series(events, ScoreType::coverage, std::nullopt, 12, o);
    REQUIRE(mean.monthly.size() == last.monthly.size());
    for (std::size_t m = 0; m < mean.monthly.size(); ++m) {
        double total = 0.0;
        int n = 0;
        double final_value = 0.0;
        for (const auto& d : mean.daily) {
            if (month_of(d.date) != mean.monthly[m].month) continue;
            total += d.value;
            final_value = d.value;
            ++n;
        }
        CHECK(sum.monthly[m].value == doctest::Approx(total).epsilon(1e-12));
        CHECK(mean.monthly[m].value == doctest::Approx(total / n).epsilon(1e-12));
        CHECK(last.monthly[m].value == final_value);
    }
    o.aggregation = Aggregation::mean;
    o.lag_count = LagCount::literal;
    const auto literal = build_mci_series(events, ScoreType::coverage, std::nullopt, 12, o);
    REQUIRE(literal.daily.size() == mean.daily.size());
    bool differs = false;
    for (std::size_t k = 0; k < literal.daily.size(); ++k) differs |= literal.daily[k].value != mean.daily[k].value;
    CHECK(differs);
    CHECK(parse_aggregation("last") == Aggregation::last);
    CHECK_THROWS(parse_lag_count("k_t"));
}

TEST_CASE("threaded series construction is bit-identical") {
    std::mt19937_64 rng(8);
    const auto events = oracle::random_events(rng, 60, 20, 15, 4);
    MciOptions o;
    const auto serial = build_mci_series(events, ScoreType::comovement, ToneVariant::neg, 15, o);
    o.threads = 4;
    const auto threaded = build_mci_series(events, ScoreType::comovement, ToneVariant::neg, 15, o);
    REQUIRE(serial.daily.size() == threaded.daily.size());
    for (std::size_t k = 0; k < serial.daily.size(); ++k) CHECK(serial.daily[k].value == threaded.daily[k].value);
}

TEST_CASE("relabeling stocks leaves every index unchanged") {
    std::mt19937_64 rng(31);
    const auto events = oracle::random_events(rng, 30, 15, 10, 4);
    std::vector<StockIndex> perm{3, 7, 1, 9, 0, 2, 8, 5, 4, 6};
    auto relabeled = events;
    for (auto& e : relabeled) {
        for (auto& m : e.mentions) m.stock = perm[m.stock];
    }
    for (auto t : {ScoreType::sentiment, ScoreType::comovement, ScoreType::coverage}) {
        const auto a = build_mci_series(events, t, ToneVariant::opt, 10);
        const auto b = build_mci_series(relabeled, t, ToneVariant::opt, 10);
        REQUIRE(a.daily.size() == b.daily.size());
        for (std::size_t k = 0; k < a.daily.size(); ++k) CHECK(std::abs(a.daily[k].value - b.daily[k].value) < 1e-12);
    }
}

TEST_CASE("standardization") {
    const std::vector<double> x{1, 2, 3};
    const auto z = standardize_full(x);
    CHECK(z == std::vector<double>{-1, 0, 1});
    CHECK_THROWS_AS(standardize_full(std::vector<double>{2, 2, 2}), std::domain_error);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> r(40);
    for (auto& v : r) v = n(rng);
    const auto full = standardize_full(r);
    double m = 0.0, ss = 0.0;
    for (double v : full) m += v / 40.0;
    for (double v : full) ss += (v - m) * (v - m);
    CHECK(std::abs(m) < 1e-15);
    CHECK(ss / 39.0 == doctest::Approx(1.0).epsilon(1e-14));

    const auto rec = standardize_series(r, Standardization::recursive);
    CHECK_FALSE(rec[0]);
    for (std::size_t t = 1; t < r.size(); ++t) {
        const std::vector<double> prefix(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(t + 1));
        const auto zp = standardize_full(prefix);
        REQUIRE(rec[t]);
        CHECK(*rec[t] == doctest::Approx(zp.back()).epsilon(1e-12));
        if (t + 1 < r.size()) CHECK(*rec[t] != full[t]);
    }
}

TEST_CASE("monthly row mass is the off-diagonal row sum of summed matrices") {
    std::mt19937_64 rng(13);
    const auto events = oracle::random_events(rng, 45, 12, 8, 4);
    const std::vector<Month> months{parse_month("2001-01"), parse_month("2001-02"), parse_month("2001-05")};
    const auto mass = monthly_row_mass(events, ScoreType::coverage, std::nullopt, 8, months);
    REQUIRE(mass.size() == 3);
    for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> expect(8, 0.0);
        for (const auto& e : events) {
            if (month_of(e.date) != months[k]) continue;
            for (const auto& a : e.mentions) expect[a.stock] += static_cast<double>(e.mentions.size() - 1);
        }
        for (std::size_t s = 0; s < 8; ++s) CHECK(mass[k][s] == expect[s]);
    }
    for (double v : mass[2]) CHECK(v == 0.0);
}

TEST_CASE("euclidean tone distance cannot tell same-sign from opposite-sign pairs") {
    const std::vector<double> a{0.8, 0.2}, b{0.2, 0.8};
    CHECK(euclidean_distance(a, b) == doctest::Approx(std::sqrt(0.72)));
    CHECK(euclidean_distance(a, a) == 0.0);
}

TEST_CASE("generator's recorded index is reproduced from its own news") {
    synth::SyntheticConfig cfg;
    cfg.n_months = 36;
    cfg.articles_per_day = 12;
    cfg.stock_panel = false;
    const auto u = synth::generate_universe(cfg);
    const auto s = build_mci_series(u.news.events, cfg.signal_type, cfg.signal_variant, u.news.stocks.size());
    std::size_t matched = 0;
    for (const auto& mv : s.monthly) {
        const auto k = static_cast<std::size_t>(months_between(u.truth.months.front(), mv.month));
        CHECK(std::abs(mv.value - u.truth.mci[k]) < 1e-10);
        ++matched;
    }
    CHECK(matched == 36);
}
