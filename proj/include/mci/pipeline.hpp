#pragma once

// End-to-end run: ingest -> connectivity -> {in-sample, out-of-sample} ->
// allocation and sorted portfolios, emitting a CSV bundle plus summary.txt.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mci/config.hpp"
#include "mci/connectivity.hpp"
#include "mci/oos.hpp"
#include "mci/portfolio.hpp"

namespace mci {

/// Failure in one pipeline stage; what() starts with "[stage] ".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PipelineConfig {
    std::filesystem::path news;
    std::filesystem::path returns;
    std::optional<std::filesystem::path> regime;
    std::optional<std::filesystem::path> predictors;
    std::optional<std::filesystem::path> stock_returns;
    std::optional<std::filesystem::path> stock_map;

    std::vector<ScoreType> types{ScoreType::sentiment, ScoreType::comovement, ScoreType::coverage};
    std::vector<ToneVariant> variants{ToneVariant::opt, ToneVariant::pos, ToneVariant::neg};
    Aggregation aggregation = Aggregation::mean;
    LagCount lag_count = LagCount::per_day;

    std::optional<Month> oos_start;  // defaults to 96 months after the first return
    std::optional<std::size_t> nw_lag;
    std::vector<double> gammas{1.0, 3.0, 5.0};
    std::vector<oos::Combination> combinations;
    std::vector<std::string> combination_members;  // empty: every external predictor
    std::vector<std::string> controls;             // empty: every external predictor
    bool truncate_combinations = false;
    portfolio::AllocationConfig allocation;

    ScoreType sort_type = ScoreType::coverage;
    ToneVariant sort_variant = ToneVariant::opt;

    unsigned threads = 1;
    std::filesystem::path output_dir;

    /// Defaults for the combination list.
    PipelineConfig();
};

/// Relative paths resolve against `base_dir`.
PipelineConfig pipeline_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir);

struct PipelineOutcome {
    std::vector<std::filesystem::path> files;  // written, in order
    std::size_t articles = 0;
    std::size_t rejected_records = 0;
};

/// Throws StageError on the first failing stage.
PipelineOutcome run_pipeline(const PipelineConfig& config);

/// Human-readable tables built from the CSV bundle in `dir`.
std::string summarize_bundle(const std::filesystem::path& dir);

}  // namespace mci
