#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "mci/config.hpp"
#include "mci/parallel.hpp"
#include "mci/pipeline.hpp"
#include "mci/synthetic.hpp"

namespace {

int generate(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
             unsigned threads) {
    auto kv = mci::KeyValueConfig::load(config_path);
    if (seed) kv.set("seed", std::to_string(*seed));
    const auto cfg = mci::synth::synthetic_config_from(kv);
    const auto universe = mci::synth::generate_universe(cfg, threads);
    mci::synth::write_universe(universe, out);
    std::cout << "generated " << universe.news.events.size() << " articles, " << universe.returns.size()
              << " months in " << out << '\n';
    return 0;
}

int run(const std::string& config_path, const std::string& out, std::optional<unsigned> threads) {
    const auto kv = mci::KeyValueConfig::load(config_path);
    auto cfg = mci::pipeline_config_from(kv, std::filesystem::path(config_path).parent_path());
    if (!out.empty()) cfg.output_dir = out;
    if (threads) cfg.threads = *threads;
    const auto outcome = mci::run_pipeline(cfg);
    std::cout << "processed " << outcome.articles << " articles (" << outcome.rejected_records
              << " rejected); wrote " << outcome.files.size() << " files to " << cfg.output_dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Media connection index pipeline"};
    app.require_subcommand(1);
    std::optional<unsigned> threads;
    app.add_option("--threads", threads, "Worker threads (default: MCI_THREADS or 1)");

    std::string config, out, in;
    std::optional<std::uint64_t> seed;
    auto* gen = app.add_subcommand("generate", "Write a synthetic universe with planted signal");
    gen->add_option("--config", config, "Generator config file")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", out, "Output directory")->required();
    gen->add_option("--seed", seed, "Override the config seed");

    auto* runc = app.add_subcommand("run", "Run the full pipeline");
    runc->add_option("--config", config, "Pipeline config file")->required()->check(CLI::ExistingFile);
    runc->add_option("--out", out, "Output directory (overrides the config)");

    auto* sum = app.add_subcommand("summarize", "Print the text report of an output directory");
    sum->add_option("--in", in, "Output directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    const unsigned n_threads = threads.value_or(mci::thread_count_from_env(1));
    try {
        if (*gen) return generate(config, out, seed, n_threads);
        if (*runc) return run(config, out, n_threads);
        if (*sum) {
            std::cout << mci::summarize_bundle(in);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
