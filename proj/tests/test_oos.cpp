#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mci/oos.hpp"
#include "mci/synthetic.hpp"
#include "oracles.hpp"

using namespace mci;
using namespace mci::oos;

namespace {

std::vector<Month> months_from(Month start, std::size_t n) {
    std::vector<Month> m;
    for (std::size_t t = 0; t < n; ++t) m.push_back(start + std::chrono::months{static_cast<int>(t)});
    return m;
}

ForecastTrack random_track(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 0.04), f(0.005, 0.01);
    ForecastTrack t;
    t.months = months_from(parse_month("2004-01"), n);
    for (std::size_t k = 0; k < n; ++k) {
        t.actual.push_back(d(rng));
        t.benchmark.push_back(f(rng));
        t.model.push_back(f(rng));
    }
    return t;
}

ForecastTrack fixed_track(std::vector<double> actual, std::vector<double> model, std::vector<double> bench) {
    ForecastTrack t;
    t.months = months_from(parse_month("2004-01"), actual.size());
    t.actual = std::move(actual);
    t.model = std::move(model);
    t.benchmark = std::move(bench);
    return t;
}

}  // namespace

TEST_CASE("historical mean is a running mean") {
    const std::vector<double> r{1, 2, 3, 4, 5, 6};
    CHECK(historical_mean_forecasts(r, 1) == std::vector<double>{1, 1.5, 2, 2.5, 3});
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d(0.008, 0.05);
    std::vector<double> x(10000);
    for (auto& v : x) v = d(rng);
    const auto hm = historical_mean_forecasts(x, 24);
    CHECK(hm == oracle::prefix_mean(x, 24));
    CHECK(std::abs(hm.back() - 0.008) < 4 * 0.05 / std::sqrt(10000.0));
    CHECK_THROWS(historical_mean_forecasts(x, 0));
}

TEST_CASE("constant returns are forecast exactly") {
    const std::size_t n = 60;
    const std::vector<double> r(n, 0.0123);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> d;
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    const auto track = recursive_forecasts(months_from(parse_month("2000-01"), n), r, x, 24);
    for (double f : track.model) CHECK(f == 0.0123);
    // The benchmark is a plain running sum over j, exact up to rounding.
    for (double f : track.benchmark) CHECK(f == doctest::Approx(0.0123).epsilon(1e-15));
}

TEST_CASE("forecasts never read data after the forecast origin") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(0.0, 1.0);
    const std::size_t n = 120;
    std::vector<double> r(n), x(n);
    for (std::size_t t = 0; t < n; ++t) {
        x[t] = d(rng);
        r[t] = 0.01 + (t ? -0.01 * x[t - 1] : 0.0) + 0.04 * d(rng);
    }
    const auto months = months_from(parse_month("2000-01"), n);
    const auto base = recursive_forecasts(months, r, x, 30);
    for (std::size_t cut : {40u, 70u, 110u}) {
        auto r2 = r, x2 = x;
        for (std::size_t t = cut; t < n; ++t) {
            r2[t] = 100.0 * d(rng);
            x2[t] = -50.0;
        }
        const auto other = recursive_forecasts(months, r2, x2, 30);
        // Forecast for target j uses returns < j and predictor < j.
        for (std::size_t j = 30; j <= cut; ++j) {
            CHECK(other.model[j - 30] == base.model[j - 30]);
            CHECK(other.benchmark[j - 30] == base.benchmark[j - 30]);
        }
    }
}

TEST_CASE("training floor and missing predictor fallback") {
    const std::size_t n = 50;
    std::vector<double> r(n, 0.01), x(n, 1.0);
    for (std::size_t t = 0; t < n; ++t) r[t] += 0.001 * static_cast<double>(t % 3);
    const auto months = months_from(parse_month("2000-01"), n);
    CHECK_THROWS(recursive_forecasts(months, r, x, 10));
    // Constant predictor: every fit is degenerate, so the benchmark is used and logged.
    const auto flat = recursive_forecasts(months, r, x, 24);
    CHECK(flat.model == flat.benchmark);
    CHECK(flat.notes.size() == flat.size());
    for (std::size_t t = 0; t < n; ++t) x[t] = static_cast<double>(t % 5);
    x[30] = std::nan("");
    const auto gap = recursive_forecasts(months, r, x, 24);
    CHECK(gap.model[31 - 24] == gap.benchmark[31 - 24]);
    CHECK(gap.notes.size() == 1);
}

TEST_CASE("zero-slope predictor converges to the historical mean") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d(0.0, 1.0);
    const std::size_t n = 2000;
    std::vector<double> r(n), x(n);
    for (std::size_t t = 0; t < n; ++t) {
        x[t] = d(rng);
        r[t] = 0.008 + 0.05 * d(rng);
    }
    const auto track = recursive_forecasts(months_from(parse_month("1900-01"), n), r, x, 24);
    double early = 0.0, late = 0.0;
    const std::size_t s = track.size(), q = s / 4;
    for (std::size_t t = 0; t < q; ++t) early += std::abs(track.model[t] - track.benchmark[t]) / static_cast<double>(q);
    for (std::size_t t = s - q; t < s; ++t) late += std::abs(track.model[t] - track.benchmark[t]) / static_cast<double>(q);
    CHECK(late < 0.5 * early);
}

TEST_CASE("truncation") {
    const auto t = fixed_track({0.01, 0.02, 0.03}, {0.01, -0.02, 0.0}, {0.0, 0.0, 0.0});
    const auto tr = truncate_forecasts(t);
    CHECK(tr.model == std::vector<double>{0.01, 0.0, 0.0});
    CHECK(tr.benchmark == t.benchmark);
    const auto pos = fixed_track({0.01, 0.02}, {0.01, 0.03}, {0.0, 0.0});
    CHECK(truncate_forecasts(pos).model == pos.model);
}

TEST_CASE("R2 OS identities and hand fixture") {
    std::mt19937_64 rng(5);
    auto t = random_track(rng, 50);
    t.model = t.benchmark;
    CHECK(r2_os(t) == 0.0);
    t.model = t.actual;
    CHECK(r2_os(t) == 1.0);
    // SSE model 8, SSE benchmark 10.
    const auto h = fixed_track({0, 0}, {2, 2}, {std::sqrt(5.0), std::sqrt(5.0)});
    CHECK(r2_os(h) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK_THROWS(r2_os(fixed_track({1}, {1}, {1})));
    CHECK_THROWS_AS(r2_os(fixed_track({1, 2}, {0, 0}, {1, 2})), std::domain_error);
}

TEST_CASE("regime R2 OS") {
    const auto t = fixed_track({0.02, -0.01}, {0.01, 0.0}, {0.0, 0.01});
    const std::vector<std::pair<Month, Regime>> split{{t.months[0], Regime::expansion}, {t.months[1], Regime::recession}};
    const auto r = regime_r2_os(t, RegimeCalendar(split));
    CHECK(*r.up == doctest::Approx(1.0 - 0.0001 / 0.0004).epsilon(1e-13));
    CHECK(*r.down == doctest::Approx(1.0 - 0.0001 / 0.0004).epsilon(1e-13));

    std::mt19937_64 rng(6);
    const auto big = random_track(rng, 120);
    std::vector<std::pair<Month, Regime>> all;
    for (const auto& m : big.months) all.emplace_back(m, Regime::expansion);
    const auto single = regime_r2_os(big, RegimeCalendar(all));
    CHECK(*single.up == doctest::Approx(r2_os(big)).epsilon(1e-13));
    CHECK_FALSE(single.down);

    // Components recombine with benchmark-SSE weights.
    std::vector<std::pair<Month, Regime>> mixed;
    for (std::size_t k = 0; k < big.size(); ++k) mixed.emplace_back(big.months[k], k % 7 < 2 ? Regime::recession : Regime::expansion);
    const auto parts = regime_r2_os(big, RegimeCalendar(mixed));
    double sb_up = 0.0, sb_dn = 0.0;
    for (std::size_t k = 0; k < big.size(); ++k) {
        const double e = std::pow(big.actual[k] - big.benchmark[k], 2);
        (k % 7 < 2 ? sb_dn : sb_up) += e;
    }
    const double combined = (sb_up * *parts.up + sb_dn * *parts.down) / (sb_up + sb_dn);
    CHECK(std::abs(combined - r2_os(big)) < 1e-12);
}

TEST_CASE("Clark-West matches the direct formula") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(50 + seed);
        const auto t = random_track(rng, 50);
        const auto cw = clark_west(t);
        const double direct = oracle::clark_west_stat(t.actual, t.benchmark, t.model);
        CHECK(std::abs(cw.statistic - direct) < 1e-12);
        CHECK(cw.p_value == doctest::Approx(1.0 - stats::normal_cdf(direct)).epsilon(1e-14));
    }
    std::mt19937_64 rng(7);
    auto same = random_track(rng, 30);
    same.model = same.benchmark;
    const auto cw = clark_west(same);
    CHECK(cw.statistic == 0.0);
    CHECK(cw.p_value == 0.5);
    CHECK_THROWS(clark_west(random_track(rng, 9)));
}

TEST_CASE("Clark-West can reject while R2 OS is negative") {
    // A model that tracks the signal with a noisy, overscaled slope: higher MSFE,
    // yet the adjusted statistic credits the correlation.
    std::mt19937_64 rng(8);
    std::normal_distribution<double> d;
    int both = 0;
    for (int rep = 0; rep < 50; ++rep) {
        ForecastTrack t;
        t.months = months_from(parse_month("2004-01"), 132);
        for (int k = 0; k < 132; ++k) {
            const double signal = 0.01 * d(rng);
            t.actual.push_back(signal + 0.04 * d(rng));
            t.benchmark.push_back(0.0);
            t.model.push_back(3.5 * signal + 0.01 * d(rng));
        }
        if (r2_os(t) < 0.0 && clark_west(t).p_value < 0.10) ++both;
    }
    CHECK(both > 0);
}

TEST_CASE("CSFE difference") {
    std::mt19937_64 rng(9);
    auto t = random_track(rng, 40);
    auto same = t;
    same.model = same.benchmark;
    for (double v : csfe_difference(same)) CHECK(v == 0.0);
    const auto c = csfe_difference(t);
    double sb = 0.0, sm = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        sb += std::pow(t.actual[k] - t.benchmark[k], 2);
        sm += std::pow(t.actual[k] - t.model[k], 2);
    }
    CHECK(c.back() == doctest::Approx(sb - sm).epsilon(1e-12));
    // Model strictly closer to the outcome every period.
    auto better = t;
    for (std::size_t k = 0; k < t.size(); ++k) better.model[k] = 0.5 * (t.actual[k] + t.benchmark[k]);
    const auto inc = csfe_difference(better);
    for (std::size_t k = 1; k < inc.size(); ++k) CHECK(inc[k] > inc[k - 1]);
}

TEST_CASE("sign of R2 OS agrees with the final CSFE difference") {
    std::mt19937_64 rng(10);
    for (int k = 0; k < 1000; ++k) {
        const auto t = random_track(rng, 24);
        CHECK((r2_os(t) > 0.0) == (csfe_difference(t).back() > 0.0));
    }
}

TEST_CASE("combinations of identical members reproduce the member") {
    std::mt19937_64 rng(11);
    const auto t = random_track(rng, 40);
    const std::vector<ForecastTrack> members{t, t, t};
    for (const char* scheme : {"mean", "median", "trimmed_mean", "dmspe:1", "dmspe:0.9", "dmspe:0.5"}) {
        const auto c = combine_forecasts(members, parse_combination(scheme));
        CHECK(c.model == t.model);
    }
}

TEST_CASE("trimmed mean drops one forecast per tail") {
    auto base = fixed_track({0, 0, 0}, {1, 1, 1}, {0, 0, 0});
    auto b = base, c = base;
    b.model = {2, 2, 2};
    c.model = {100, 100, 100};
    const std::vector<ForecastTrack> members{base, c, b};
    CHECK(combine_forecasts(members, parse_combination("trimmed_mean")).model == std::vector<double>{2, 2, 2});
    CHECK(combine_forecasts(members, parse_combination("median")).model == std::vector<double>{2, 2, 2});
    CHECK(combine_forecasts(members, parse_combination("mean")).model[0] == doctest::Approx(103.0 / 3.0));
    CHECK_THROWS(combine_forecasts(std::vector<ForecastTrack>{base, b}, parse_combination("trimmed_mean")));
}

TEST_CASE("DMSPE weights") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> d;
    const std::size_t s = 400;
    ForecastTrack a, b;
    a.months = b.months = months_from(parse_month("1980-01"), s);
    for (std::size_t k = 0; k < s; ++k) {
        const double y = d(rng);
        a.actual.push_back(y);
        b.actual.push_back(y);
        a.benchmark.push_back(0.0);
        b.benchmark.push_back(0.0);
        // Member b's errors have four times the variance of member a's.
        a.model.push_back(y + d(rng));
        b.model.push_back(y + 2.0 * d(rng));
    }
    const std::vector<ForecastTrack> members{a, b};
    const auto w = dmspe_weights(members, 1.0, 12);
    for (std::size_t k = 0; k < 12; ++k) CHECK(w[k] == std::vector<double>{0.5, 0.5});
    for (const auto& row : w) {
        CHECK(std::abs(row[0] + row[1] - 1.0) < 1e-12);
        CHECK(row[0] >= 0.0);
        CHECK(row[1] >= 0.0);
    }
    CHECK(std::abs(w.back()[0] - 0.8) < 0.05);

    // Theta = 1 is plain inverse cumulative squared error.
    for (std::size_t k = 12; k < s; ++k) {
        double sa = 0.0, sb = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            sa += std::pow(a.actual[j] - a.model[j], 2);
            sb += std::pow(b.actual[j] - b.model[j], 2);
        }
        CHECK(std::abs(w[k][0] - (1 / sa) / (1 / sa + 1 / sb)) < 1e-12);
    }

    // Discounted weights against a direct power sum.
    const auto wd = dmspe_weights(members, 0.9, 12);
    for (std::size_t k : {12u, 50u, 399u}) {
        double pa = 0.0, pb = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double disc = std::pow(0.9, static_cast<double>(k - 1 - j));
            pa += disc * std::pow(a.actual[j] - a.model[j], 2);
            pb += disc * std::pow(b.actual[j] - b.model[j], 2);
        }
        CHECK(std::abs(wd[k][0] - (1 / pa) / (1 / pa + 1 / pb)) < 1e-12);
    }

    // Relabeling members permutes the weights.
    const std::vector<ForecastTrack> swapped{b, a};
    const auto ws = dmspe_weights(swapped, 0.9, 12);
    for (std::size_t k = 0; k < s; ++k) CHECK(std::abs(ws[k][0] - wd[k][1]) < 1e-15);
    CHECK(combine_forecasts(swapped, parse_combination("median")).model ==
          combine_forecasts(members, parse_combination("median")).model);
}

TEST_CASE("combination input validation") {
    std::mt19937_64 rng(13);
    const auto a = random_track(rng, 30);
    auto b = random_track(rng, 30);
    CHECK_THROWS(combine_forecasts(std::vector<ForecastTrack>{a}, parse_combination("mean")));
    CHECK_THROWS(combine_forecasts(std::vector<ForecastTrack>{a, b}, parse_combination("mean")));
    CHECK_THROWS(parse_combination("dmspe:0"));
    CHECK_THROWS(parse_combination("dmspe:1.5"));
    CHECK_THROWS(parse_combination("geometric"));
    CHECK(parse_combination("dmspe:0.9").name() == "dmspe_0.9");
}

TEST_CASE("planted signal beats the historical mean out of sample") {
    int wins = 0, truncation_helps = 0, with_negatives = 0;
    const int seeds = 30;
    for (int seed = 1; seed <= seeds; ++seed) {
        synth::SyntheticConfig cfg;
        cfg.articles_per_day = 6;
        cfg.stock_panel = false;
        cfg.seed = static_cast<std::uint64_t>(seed);
        const auto u = synth::generate_universe(cfg);
        const auto mci = build_mci_series(u.news.events, cfg.signal_type, cfg.signal_variant, u.news.stocks.size());
        const auto track = recursive_forecasts(u.returns, mci.monthly_predictor(), parse_month("2004-01"));
        CHECK(track.size() == 132);
        double sm = 0.0, sb = 0.0;
        for (std::size_t k = 0; k < track.size(); ++k) {
            sm += std::pow(track.actual[k] - track.model[k], 2);
            sb += std::pow(track.actual[k] - track.benchmark[k], 2);
        }
        wins += sm < sb;
        // Weak-signal variant where truncation matters: many negative forecasts from noise.
        cfg.planted_beta = -0.1;
        const auto w = synth::generate_universe(cfg);
        const auto wm = build_mci_series(w.news.events, cfg.signal_type, cfg.signal_variant, w.news.stocks.size());
        const auto wt = recursive_forecasts(w.returns, wm.monthly_predictor(), parse_month("2004-01"));
        const auto negatives = std::count_if(wt.model.begin(), wt.model.end(), [](double f) { return f < 0.0; });
        if (negatives >= 10) {
            ++with_negatives;
            truncation_helps += r2_os(truncate_forecasts(wt)) >= r2_os(wt);
        }
    }
    CHECK(wins >= 0.8 * seeds);
    REQUIRE(with_negatives > 0);
    CHECK(truncation_helps * 2 > with_negatives);
}

TEST_CASE("evaluate bundles every statistic") {
    std::mt19937_64 rng(14);
    const auto t = random_track(rng, 40);
    const auto rep = evaluate(t, nullptr);
    CHECK(rep.r2_os == r2_os(t));
    REQUIRE(rep.r2_os_truncated);
    CHECK(*rep.r2_os_truncated == r2_os(truncate_forecasts(t)));
    CHECK_FALSE(rep.r2_os_up);
    CHECK(rep.csfe.size() == 40);
    CHECK_FALSE(evaluate(t, nullptr, false).r2_os_truncated);
}
