#include "mci/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <span>

#include "mci/csv.hpp"
#include "mci/econometrics.hpp"
#include "mci/ingest.hpp"
#include "mci/parallel.hpp"

namespace mci {

PipelineConfig::PipelineConfig() {
    for (const char* c : {"mean", "median", "trimmed_mean", "dmspe:1", "dmspe:0.9"}) {
        combinations.push_back(oos::parse_combination(c));
    }
}

PipelineConfig pipeline_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
    kv.reject_unknown({"news", "returns", "regime", "predictors", "stock_returns", "stock_map", "types", "variants",
                       "aggregation", "lag_count", "oos_start", "nw_lag", "gammas", "combinations",
                       "combination_holdout", "combination_members", "controls", "truncate_combinations",
                       "tc_bps", "weight_lower", "weight_upper", "variance_window", "min_variance_window",
                       "turnover", "sort_type", "sort_variant", "threads", "out"});
    PipelineConfig c;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    auto required = [&](const char* key) {
        auto v = kv.get(key);
        if (!v || v->empty()) throw std::invalid_argument(std::string("config: missing required key '") + key + "'");
        return resolve(*v);
    };
    c.news = required("news");
    c.returns = required("returns");
    for (auto [key, slot] : {std::pair{"regime", &c.regime}, std::pair{"predictors", &c.predictors},
                             std::pair{"stock_returns", &c.stock_returns}, std::pair{"stock_map", &c.stock_map}}) {
        if (auto v = kv.get(key); v && !v->empty()) *slot = resolve(*v);
    }
    if (kv.has("types")) {
        c.types.clear();
        for (const auto& t : kv.get_list("types", {})) c.types.push_back(parse_score_type(std::stoi(t)));
    }
    if (kv.has("variants")) {
        c.variants.clear();
        for (const auto& v : kv.get_list("variants", {})) c.variants.push_back(parse_tone_variant(v));
    }
    c.aggregation = parse_aggregation(kv.get_or("aggregation", "mean"));
    c.lag_count = parse_lag_count(kv.get_or("lag_count", "per_day"));
    if (auto v = kv.get("oos_start")) c.oos_start = parse_month(*v);
    if (auto v = kv.get("nw_lag"); v && *v != "auto") c.nw_lag = static_cast<std::size_t>(kv.get_int("nw_lag", 0));
    if (kv.has("gammas")) {
        c.gammas.clear();
        for (const auto& g : kv.get_list("gammas", {})) c.gammas.push_back(csv::parse_double(g));
    }
    const auto holdout = static_cast<std::size_t>(kv.get_int("combination_holdout", 12));
    c.combinations.clear();
    for (const auto& s : kv.get_list("combinations", {"mean", "median", "trimmed_mean", "dmspe:1", "dmspe:0.9"})) {
        c.combinations.push_back(oos::parse_combination(s, holdout));
    }
    c.combination_members = kv.get_list("combination_members", {});
    c.controls = kv.get_list("controls", {});
    c.truncate_combinations = kv.get_bool("truncate_combinations", false);
    auto& a = c.allocation;
    a.tc_bps = kv.get_double("tc_bps", a.tc_bps);
    a.weight_lower = kv.get_double("weight_lower", a.weight_lower);
    a.weight_upper = kv.get_double("weight_upper", a.weight_upper);
    a.variance_window = static_cast<std::size_t>(kv.get_int("variance_window", static_cast<long long>(a.variance_window)));
    a.min_variance_window =
        static_cast<std::size_t>(kv.get_int("min_variance_window", static_cast<long long>(a.min_variance_window)));
    const auto turnover = kv.get_or("turnover", "drifted");
    if (turnover == "drifted") a.turnover = portfolio::TurnoverMode::drifted;
    else if (turnover == "simple") a.turnover = portfolio::TurnoverMode::simple;
    else throw std::invalid_argument("config: turnover must be drifted or simple");
    a.validate();
    c.sort_type = parse_score_type(static_cast<int>(kv.get_int("sort_type", 3)));
    c.sort_variant = parse_tone_variant(kv.get_or("sort_variant", "opt"));
    c.threads = static_cast<unsigned>(kv.get_int("threads", thread_count_from_env(1)));
    if (auto v = kv.get("out")) c.output_dir = resolve(*v);
    if (c.types.empty()) throw std::invalid_argument("config: no predictor enabled");
    return c;
}

namespace {

std::string fmt(double v) { return csv::format_double(v); }
std::string fmt(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return in;
}

struct Inputs {
    NewsDataset news;
    ReturnSeries returns;
    std::optional<RegimeCalendar> regimes;
    std::vector<PredictorSeries> external;
    std::optional<StockReturnPanel> stock_returns;
};

Inputs load_inputs(const PipelineConfig& c) {
    Inputs in;
    StockRegistry known;
    if (c.stock_map) {
        auto s = open_in(*c.stock_map);
        known = StockRegistry::read(s);
    }
    {
        auto s = open_in(c.news);
        in.news = parse_news(s, {}, std::move(known));
    }
    {
        auto s = open_in(c.returns);
        in.returns = parse_return_series(s);
    }
    if (c.regime && std::filesystem::exists(*c.regime)) {
        auto s = open_in(*c.regime);
        in.regimes = parse_regime_calendar(s);
    }
    if (c.predictors) {
        auto s = open_in(*c.predictors);
        in.external = parse_predictors(s);
    }
    if (c.stock_returns) {
        auto s = open_in(*c.stock_returns);
        in.stock_returns = parse_stock_returns(s);
    }
    return in;
}

class Bundle {
public:
    explicit Bundle(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
        files_.push_back(path);
    }

    const std::vector<std::filesystem::path>& files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
};

std::vector<const PredictorSeries*> select(const std::vector<PredictorSeries>& all,
                                           const std::vector<std::string>& names) {
    std::vector<const PredictorSeries*> out;
    if (names.empty()) {
        for (const auto& p : all) out.push_back(&p);
        return out;
    }
    for (const auto& n : names) {
        auto it = std::find_if(all.begin(), all.end(), [&](const PredictorSeries& p) { return p.name == n; });
        if (it == all.end()) throw std::invalid_argument("unknown predictor '" + n + "'");
        out.push_back(&*it);
    }
    return out;
}

}  // namespace

PipelineOutcome run_pipeline(const PipelineConfig& config) {
    if (config.output_dir.empty()) throw StageError("config", "no output directory");
    const unsigned threads = std::max(1u, config.threads);
    Inputs in = stage("ingest", [&] { return load_inputs(config); });
    Bundle bundle(config.output_dir);
    PipelineOutcome outcome;
    outcome.articles = in.news.events.size();
    outcome.rejected_records = in.news.rejected.size();
    const RegimeCalendar* calendar = in.regimes ? &*in.regimes : nullptr;

    // ---- connectivity
    std::vector<MciSeries> mci = stage("connectivity", [&] {
        std::vector<std::pair<ScoreType, std::optional<ToneVariant>>> jobs;
        for (auto t : config.types) {
            if (t == ScoreType::coverage) {
                jobs.emplace_back(t, std::nullopt);
            } else {
                for (auto v : config.variants) jobs.emplace_back(t, v);
            }
        }
        MciOptions opts;
        opts.aggregation = config.aggregation;
        opts.lag_count = config.lag_count;
        opts.threads = threads;
        std::vector<MciSeries> out;
        for (const auto& [t, v] : jobs) {
            out.push_back(build_mci_series(in.news.events, t, v, in.news.stocks.size(), opts));
            if (out.back().monthly.size() < 2) {
                throw std::runtime_error(out.back().name() + " has fewer than two monthly values");
            }
        }
        std::ostringstream daily, monthly, missing;
        daily << "date,type,variant,value\n";
        monthly << "month,type,variant,value\n";
        missing << "date,type,variant,reason\n";
        for (const auto& s : out) {
            const std::string tag = std::to_string(static_cast<int>(s.type)) + "," +
                                    (s.variant ? std::string(to_string(*s.variant)) : std::string("none"));
            for (const auto& d : s.daily) daily << format_day(d.date) << ',' << tag << ',' << fmt(d.value) << '\n';
            for (const auto& m : s.monthly) {
                monthly << format_month(m.month) << ',' << tag << ',' << fmt(m.value) << '\n';
            }
            for (const auto& m : s.missing) missing << format_day(m.date) << ',' << tag << ',' << m.reason << '\n';
        }
        bundle.write("mci_daily.csv", daily.str());
        bundle.write("mci_monthly.csv", monthly.str());
        bundle.write("mci_missing.csv", missing.str());
        return out;
    });

    std::vector<PredictorSeries> mci_predictors;
    for (const auto& s : mci) mci_predictors.push_back(s.monthly_predictor());
    std::vector<const PredictorSeries*> all_predictors;
    for (const auto& p : mci_predictors) all_predictors.push_back(&p);
    for (const auto& p : in.external) all_predictors.push_back(&p);

    // ---- in-sample
    stage("insample", [&] {
        const auto controls = select(in.external, config.controls);
        struct Task {
            const PredictorSeries* x;
            const PredictorSeries* z;
        };
        std::vector<Task> tasks;
        for (const auto* p : all_predictors) tasks.push_back({p, nullptr});
        for (const auto& p : mci_predictors) {
            for (const auto* z : controls) tasks.push_back({&p, z});
        }
        econ::RegressionOptions opts;
        opts.nw_lag = config.nw_lag;
        std::vector<econ::RegressionResult> results(tasks.size());
        parallel_for(tasks.size(), threads, [&](std::size_t i) {
            const auto& t = tasks[i];
            results[i] = t.z ? econ::bivariate_regression(in.returns, *t.x, *t.z, calendar, opts)
                             : econ::predictive_regression(in.returns, *t.x, calendar, opts);
        });
        std::ostringstream os;
        os << "predictor,control,beta,phi,t_beta,t_phi,r2,r2_up,r2_down,n\n";
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const auto& r = results[i];
            os << tasks[i].x->name << ',' << (tasks[i].z ? tasks[i].z->name : "") << ',' << fmt(r.beta()) << ','
               << fmt(r.phi()) << ',' << fmt(r.t_beta()) << ',' << fmt(r.t_phi()) << ',' << fmt(r.r2) << ','
               << fmt(r.r2_up) << ',' << fmt(r.r2_down) << ',' << r.n_obs << '\n';
        }
        bundle.write("insample.csv", os.str());
        return 0;
    });

    // ---- out-of-sample
    const Month oos_start = config.oos_start.value_or(in.returns.months.front() + std::chrono::months{96});
    struct Tracks {
        std::vector<oos::ForecastTrack> log_tracks;
        std::vector<oos::ForecastTrack> simple_tracks;
    };
    Tracks tracks = stage("oos", [&] {
        Tracks t;
        t.log_tracks.resize(all_predictors.size());
        t.simple_tracks.resize(all_predictors.size());
        parallel_for(all_predictors.size(), threads, [&](std::size_t i) {
            t.log_tracks[i] = oos::recursive_forecasts(in.returns, *all_predictors[i], oos_start);
            t.simple_tracks[i] =
                oos::recursive_forecasts(in.returns, *all_predictors[i], oos_start, econ::ReturnColumn::simple_excess);
        });
        const auto members = select(in.external, config.combination_members);
        if (members.size() >= 2) {
            auto member_tracks = [&](const std::vector<oos::ForecastTrack>& src) {
                std::vector<oos::ForecastTrack> m;
                for (const auto* p : members) {
                    const auto idx = static_cast<std::size_t>(
                        std::find(all_predictors.begin(), all_predictors.end(), p) - all_predictors.begin());
                    m.push_back(src[idx]);
                }
                return m;
            };
            const auto log_members = member_tracks(t.log_tracks);
            const auto simple_members = member_tracks(t.simple_tracks);
            for (const auto& comb : config.combinations) {
                if (comb.scheme == oos::CombinationScheme::trimmed_mean && members.size() < 3) continue;
                t.log_tracks.push_back(oos::combine_forecasts(log_members, comb));
                t.log_tracks.back().label = "combo_" + comb.name();
                t.simple_tracks.push_back(oos::combine_forecasts(simple_members, comb));
                t.simple_tracks.back().label = "combo_" + comb.name();
            }
        }
        std::ostringstream os, csfe;
        os << "predictor,r2_os,r2_os_trunc,r2_os_up,r2_os_down,cw_stat,cw_p\n";
        csfe << "month,predictor,csfe_diff\n";
        for (std::size_t i = 0; i < t.log_tracks.size(); ++i) {
            const auto& tr = t.log_tracks[i];
            const bool combo = i >= all_predictors.size();
            const auto rep = oos::evaluate(tr, calendar, !combo || config.truncate_combinations);
            os << tr.label << ',' << fmt(rep.r2_os) << ',' << fmt(rep.r2_os_truncated) << ',' << fmt(rep.r2_os_up)
               << ',' << fmt(rep.r2_os_down) << ',' << fmt(rep.cw.statistic) << ',' << fmt(rep.cw.p_value) << '\n';
            for (std::size_t k = 0; k < tr.size(); ++k) {
                csfe << format_month(tr.months[k]) << ',' << tr.label << ',' << fmt(rep.csfe[k]) << '\n';
            }
        }
        bundle.write("oos.csv", os.str());
        bundle.write("csfe.csv", csfe.str());
        return t;
    });

    // ---- allocation
    stage("allocation", [&] {
        const auto& ref = tracks.simple_tracks.front();
        const auto r = *in.returns.index_of(oos_start);
        const auto variances = portfolio::variance_forecast(in.returns.simple_excess, r,
                                                            config.allocation.variance_window,
                                                            config.allocation.min_variance_window);
        const std::vector<double> excess(in.returns.simple_excess.begin() + static_cast<std::ptrdiff_t>(r),
                                         in.returns.simple_excess.end());
        const std::vector<double> rf(in.returns.risk_free.begin() + static_cast<std::ptrdiff_t>(r),
                                     in.returns.risk_free.end());
        struct Row {
            std::optional<double> sharpe, test;
            double gain = 0.0, p = 1.0;
        };
        // A strategy that never leaves cash has no Sharpe ratio; report it as missing.
        auto row = [&](std::span<const double> model, std::span<const double> bench, double gamma) {
            Row out;
            const auto cer = portfolio::cer_and_gain(model, bench, gamma, config.allocation.annualization);
            out.gain = cer.gain;
            out.p = cer.p_value;
            try {
                const auto sr = portfolio::sharpe_and_test(model, bench, rf);
                out.sharpe = sr.sharpe_model;
                out.test = sr.statistic;
            } catch (const std::domain_error&) {
            }
            return out;
        };
        const std::size_t n_gammas = config.gammas.size();
        std::vector<portfolio::StrategyResult> bench(n_gammas);
        for (std::size_t gi = 0; gi < n_gammas; ++gi) {
            auto cfg = config.allocation;
            cfg.gamma = config.gammas[gi];
            bench[gi] = portfolio::run_strategy(ref.benchmark, variances, excess, rf, cfg);
        }
        const std::size_t n_tracks = tracks.simple_tracks.size();
        const std::size_t n_rows = (n_tracks + 1) * n_gammas;
        std::vector<Row> net_rows(n_rows), gross_rows(n_rows);
        parallel_for(n_rows, threads, [&](std::size_t k) {
            const std::size_t i = k / n_gammas, gi = k % n_gammas;
            const auto& b = bench[gi].returns;
            if (i == 0) {
                net_rows[k] = row(b.net, b.net, config.gammas[gi]);
                gross_rows[k] = row(b.gross, b.gross, config.gammas[gi]);
                return;
            }
            auto cfg = config.allocation;
            cfg.gamma = config.gammas[gi];
            const auto m = portfolio::run_strategy(tracks.simple_tracks[i - 1].model, variances, excess, rf, cfg);
            net_rows[k] = row(m.returns.net, b.net, cfg.gamma);
            gross_rows[k] = row(m.returns.gross, b.gross, cfg.gamma);
        });
        std::ostringstream net, gross;
        const char* header = "predictor,gamma,sharpe,sharpe_test,cer_gain,cer_p\n";
        net << header;
        gross << header;
        for (std::size_t k = 0; k < n_rows; ++k) {
            const std::size_t i = k / n_gammas, gi = k % n_gammas;
            const std::string label = i == 0 ? "historical_mean" : tracks.simple_tracks[i - 1].label;
            for (auto [os, r] : {std::pair{&net, &net_rows[k]}, std::pair{&gross, &gross_rows[k]}}) {
                *os << label << ',' << fmt(config.gammas[gi]) << ',' << fmt(r->sharpe) << ',' << fmt(r->test) << ','
                    << fmt(r->gain) << ',' << fmt(r->p) << '\n';
            }
        }
        bundle.write("allocation.csv", net.str());
        bundle.write("allocation_gross.csv", gross.str());
        return 0;
    });

    // ---- sorted portfolios
    if (in.stock_returns) {
        stage("sorted", [&] {
            const auto& panel = *in.stock_returns;
            std::vector<Month> holding, formation;
            for (const auto& m : tracks.log_tracks.front().months) {
                holding.push_back(m);
                formation.push_back(m - std::chrono::months{1});
            }
            const auto mass = monthly_row_mass(in.news.events, config.sort_type, config.sort_variant,
                                               in.news.stocks.size(), formation);
            std::vector<std::vector<double>> measure, next;
            for (std::size_t t = 0; t < holding.size(); ++t) {
                const auto row = std::find(panel.months.begin(), panel.months.end(), holding[t]);
                if (row == panel.months.end()) continue;
                const auto& rets = panel.returns[static_cast<std::size_t>(row - panel.months.begin())];
                std::vector<double> m(panel.stocks.size());
                for (std::size_t s = 0; s < panel.stocks.size(); ++s) {
                    const auto idx = in.news.stocks.find(panel.stocks[s]);
                    m[s] = idx ? mass[t][*idx] : 0.0;
                }
                measure.push_back(std::move(m));
                next.push_back(rets);
            }
            std::vector<Month> used;
            for (const auto& m : holding) {
                if (std::find(panel.months.begin(), panel.months.end(), m) != panel.months.end()) used.push_back(m);
            }
            const auto sorted = portfolio::sort_connection_portfolios(measure, next, used);
            std::ostringstream os;
            os << "month,group,cum_return\n";
            for (std::size_t t = 0; t < sorted.months.size(); ++t) {
                const auto m = format_month(sorted.months[t]);
                os << m << ",high," << fmt(sorted.cum_high[t]) << '\n'
                   << m << ",median," << fmt(sorted.cum_median[t]) << '\n'
                   << m << ",low," << fmt(sorted.cum_low[t]) << '\n'
                   << m << ",low_minus_high," << fmt(sorted.spread[t]) << '\n';
            }
            bundle.write("sorted.csv", os.str());
            return 0;
        });
    }

    stage("report", [&] {
        bundle.write("summary.txt", summarize_bundle(config.output_dir));
        return 0;
    });
    outcome.files = bundle.files();
    return outcome;
}

}  // namespace mci
