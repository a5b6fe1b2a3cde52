#pragma once

// Synthetic news/returns universe with a planted return-predictability signal.
//
// Each month draws a latent state that tilts the connected-news share within
// the month and the common tone of connected articles. The monthly MCI of the
// signal type is then computed from the generated news itself, standardized,
// and next-month log excess returns are
//
//     r_{t+1} = mean + s (planted_beta * z_t + e_{t+1}),   s = sd / sqrt(1 + planted_beta^2)
//
// with e unit-variance Student-t noise, so planted_beta is the slope in units
// of the return innovation sd per one-sd move in the index, and the
// unconditional mean and sd of returns match `return_mean` and `return_sd`.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mci/config.hpp"
#include "mci/connectivity.hpp"
#include "mci/dates.hpp"
#include "mci/ingest.hpp"

namespace mci::synth {

struct SyntheticConfig {
    std::size_t n_stocks = 50;
    Month start{std::chrono::year{1996}, std::chrono::January};
    std::size_t n_months = 228;

    double articles_per_day = 42.0;  // Poisson mean, weekdays only
    double connected_share = 0.35;   // mean probability an article mentions >= 2 stocks
    double share_ramp = 0.4;         // latent-driven within-month drift of the connected share
    std::size_t max_mentions = 5;
    double tone_signal = 0.3;        // latent shift of the common tone of connected news
    double tone_common_sd = 0.2;
    double tone_idio_sd = 0.25;
    double self_tone_sd = 0.35;

    double planted_beta = -0.8;
    double return_mean = 0.0082;
    double return_sd = 0.0507;
    double tail_dof = 7.0;  // Student-t degrees of freedom (> 4), kurtosis near 5
    double rf_mean = 0.0021;
    double rf_sd = 0.0018;
    double rf_persistence = 0.98;

    ScoreType signal_type = ScoreType::comovement;
    ToneVariant signal_variant = ToneVariant::opt;

    double recession_entry = 0.02;  // monthly expansion -> recession probability
    double recession_exit = 0.12;

    std::size_t n_control_predictors = 5;

    bool stock_panel = true;
    ScoreType sort_type = ScoreType::coverage;
    ToneVariant sort_variant = ToneVariant::opt;
    double cross_section_beta = -0.004;  // next-month stock return per cross-sectional sd of the measure
    double stock_idio_sd = 0.08;

    std::uint64_t seed = 1;

    void validate() const;
};

SyntheticConfig synthetic_config_from(const KeyValueConfig& kv);

struct GroundTruth {
    std::vector<Month> months;
    std::vector<double> latent;
    std::vector<double> mci;             // raw monthly index of the signal type (NaN if undefined)
    std::vector<double> signal;          // standardized index that drives next-month returns
    std::vector<Regime> regimes;
};

struct Universe {
    SyntheticConfig config;
    NewsDataset news;
    ReturnSeries returns;
    RegimeCalendar regimes;
    std::vector<PredictorSeries> predictors;
    StockReturnPanel stock_returns;
    GroundTruth truth;
};

/// Deterministic for a given config (seed included) and any thread count.
Universe generate_universe(const SyntheticConfig& config, unsigned threads = 1);

/// Writes news.jsonl, stocks.csv, returns.csv, regime.csv, predictors.csv,
/// stock_returns.csv (when generated), truth.json and a pipeline.cfg that runs
/// the full analysis on these files.
void write_universe(const Universe& universe, const std::filesystem::path& dir);

}  // namespace mci::synth
