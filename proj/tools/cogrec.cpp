// cogrec — command-line driver for the cognitive activity recognition
// pipeline: synthetic corpus generation, feature extraction, LOOCV
// evaluation and probability-trace export.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogrec/eval.hpp"
#include "cogrec/pipeline.hpp"
#include "cogrec/session_io.hpp"
#include "cogrec/synthetic.hpp"

namespace {

std::vector<cogrec::SignalSet> parse_signal_sets(const std::vector<std::string>& names) {
    std::vector<cogrec::SignalSet> out;
    for (const auto& n : names) {
        const auto s = cogrec::signal_set_from_name(n);
        if (!s) throw CLI::ValidationError("--signals", "unknown signal set '" + n + "'");
        out.push_back(*s);
    }
    if (out.empty())
        out = {cogrec::SignalSet::Sig1, cogrec::SignalSet::Sig2, cogrec::SignalSet::Sig3};
    return out;
}

std::vector<cogrec::Scenario> parse_scenarios(const std::string& name) {
    using cogrec::Scenario;
    if (name == "all")
        return {Scenario::PlayerIndependent, Scenario::PlayerDependent, Scenario::Biometric};
    const auto s = cogrec::scenario_from_name(name);
    if (!s) throw CLI::ValidationError("--scenario", "unknown scenario '" + name + "'");
    return {*s};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cognitive activity recognition from physiological signals"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags override file values");

    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int threads = 1;
    app.add_option("--seed", seed, "master seed; all component seeds derive from it");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (results are thread-count invariant)")
        ->check(CLI::Range(1, 256));

    // ---- generate ------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "write a synthetic corpus");
    int players = 20;
    int rounds_per_game = 4;
    double round_len = 300.0, pause_len = 60.0;
    gen->add_option("--players", players, "number of players")->check(CLI::PositiveNumber);
    gen->add_option("--rounds-per-game", rounds_per_game, "rounds of each game")
        ->check(CLI::PositiveNumber);
    gen->add_option("--round-len", round_len, "round length, seconds")
        ->check(CLI::PositiveNumber);
    gen->add_option("--pause-len", pause_len, "pause length, seconds")
        ->check(CLI::PositiveNumber);

    // ---- features ------------------------------------------------------
    auto* feat = app.add_subcommand("features", "extract windowed feature CSVs");
    std::string corpus_dir;
    std::vector<std::string> signal_names;
    bool normalize = false;
    feat->add_option("--corpus", corpus_dir, "corpus directory")->required();
    feat->add_option("--signals", signal_names, "signal sets (SIG-1 SIG-2 SIG-3)")
        ->delimiter(',');
    feat->add_flag("--normalize", normalize, "apply per-subject z-scoring");

    // ---- evaluate ------------------------------------------------------
    auto* eval = app.add_subcommand("evaluate", "run LOOCV scenarios and write reports");
    std::string eval_corpus, scenario_name_opt = "all", features_dir;
    std::vector<std::string> eval_signal_names;
    cogrec::GBTParams gbt;
    int biometric_pairs = 100;
    bool save_models = false, no_traces = false;
    eval->add_option("--corpus", eval_corpus, "corpus directory")->required();
    eval->add_option("--features-dir", features_dir,
                     "reuse feature CSVs from this directory instead of re-extracting");
    eval->add_option("--scenario", scenario_name_opt,
                     "independent | dependent | biometric | all");
    eval->add_option("--signals", eval_signal_names, "signal sets (SIG-1 SIG-2 SIG-3)")
        ->delimiter(',');
    eval->add_option("--rounds", gbt.n_rounds, "boosting rounds")->check(CLI::PositiveNumber);
    eval->add_option("--depth", gbt.max_depth, "maximum tree depth")
        ->check(CLI::Range(1, 14));
    eval->add_option("--learning-rate", gbt.learning_rate, "shrinkage per round");
    eval->add_option("--lambda", gbt.lambda_l2, "L2 leaf regularization");
    eval->add_option("--min-child-weight", gbt.min_child_weight, "min hessian per child");
    eval->add_option("--gamma", gbt.gamma_min_gain, "min split gain");
    eval->add_option("--subsample", gbt.subsample, "row subsample per round");
    eval->add_option("--biometric-pairs", biometric_pairs,
                     "cap on sampled (positive, negative) pairs; 0 = all");
    eval->add_flag("--save-models", save_models, "write the fold-0 model per run");
    eval->add_flag("--no-traces", no_traces, "skip per-window probability traces");

    // ---- trace ---------------------------------------------------------
    auto* trace = app.add_subcommand("trace", "export one player's probability trace");
    std::string report_path, trace_player;
    trace->add_option("--report", report_path, "report JSON from evaluate")->required();
    trace->add_option("--player", trace_player, "player id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            cogrec::SyntheticConfig cfg;
            cfg.n_players = players;
            cfg.rounds_per_game = rounds_per_game;
            cfg.round_len = round_len;
            cfg.pause_len = pause_len;
            cfg.seed = seed;
            cfg.validate();
            std::filesystem::create_directories(out_dir);
            long long total_windows = 0;
            for (int i = 0; i < cfg.n_players; ++i) {
                const auto session = cogrec::generate_session(cfg, i);
                cogrec::save_session(session, std::filesystem::path(out_dir) /
                                                  ("session_" + session.player_id));
                total_windows += cogrec::count_windows(session.labels,
                                                       session.recorded_start(),
                                                       session.recorded_end());
            }
            std::printf("wrote %d sessions to %s\n", cfg.n_players, out_dir.c_str());
            std::printf("schedule: %d intervals/session, %.0f s/session, %lld windows total\n",
                        cogrec::expected_interval_count(cfg), cogrec::expected_duration(cfg),
                        total_windows);
        } else if (*feat) {
            const auto corpus = cogrec::load_corpus(corpus_dir);
            const auto sets = parse_signal_sets(signal_names);
            const auto raw = cogrec::extract_corpus_features(corpus, threads);
            std::filesystem::create_directories(out_dir);
            for (const auto set : sets) {
                auto vectors = cogrec::restrict_to_set(raw, set);
                if (normalize) {
                    const auto stats = cogrec::fit_subject_stats(vectors);
                    vectors = cogrec::apply_normalization(std::move(vectors), stats);
                }
                const auto path = std::filesystem::path(out_dir) /
                                  ("features_" + std::string(cogrec::signal_set_name(set)) +
                                   ".csv");
                cogrec::write_feature_csv(vectors, set, path);
                std::printf("%s: %zu rows, %zu feature columns\n", path.c_str(),
                            vectors.size(), cogrec::feature_count(set));
            }
        } else if (*eval) {
            const auto corpus = cogrec::load_corpus(eval_corpus);
            cogrec::ExperimentOptions opt;
            opt.signal_sets = parse_signal_sets(eval_signal_names);
            opt.scenarios = parse_scenarios(scenario_name_opt);
            gbt.seed = seed;
            opt.params = gbt;
            opt.threads = threads;
            opt.biometric_pair_cap = biometric_pairs;
            opt.collect_traces = !no_traces;
            opt.output_dir = out_dir;
            opt.save_models = save_models;

            cogrec::ExperimentResult result;
            if (!features_dir.empty()) {
                // reuse raw SIG-3 vectors from a previous `features` run
                const auto path = std::filesystem::path(features_dir) / "features_SIG-3.csv";
                const auto raw = cogrec::read_feature_csv(path);
                std::filesystem::create_directories(out_dir);
                for (auto scenario : opt.scenarios) {
                    std::vector<cogrec::EvaluationReport> row;
                    for (auto set : opt.signal_sets) {
                        const auto ds = cogrec::build_dataset(corpus, raw, set);
                        cogrec::LoocvOptions lo;
                        lo.threads = opt.threads;
                        lo.biometric_pair_cap = opt.biometric_pair_cap;
                        lo.collect_traces = opt.collect_traces;
                        row.push_back(cogrec::run_loocv(ds, scenario, opt.params, lo));
                    }
                    result.tables.push_back(cogrec::result_table(scenario, row));
                    result.reports.push_back(std::move(row));
                }
                for (std::size_t i = 0; i < result.reports.size(); ++i) {
                    for (const auto& r : result.reports[i]) {
                        const auto name =
                            "report_" + std::string(cogrec::scenario_name(r.scenario)) + "_" +
                            std::string(cogrec::signal_set_name(r.signal_set)) + ".json";
                        std::ofstream os(std::filesystem::path(out_dir) / name,
                                         std::ios::binary);
                        os << cogrec::report_to_json(r).dump(1) << '\n';
                    }
                }
            } else {
                result = cogrec::run_experiment(corpus, opt);
            }
            for (const auto& t : result.tables) std::printf("%s\n", t.c_str());
        } else if (*trace) {
            std::ifstream in(report_path);
            if (!in) throw cogrec::IoError("cannot open report " + report_path);
            nlohmann::json j;
            in >> j;
            const auto report = cogrec::report_from_json(j);
            const auto rows = cogrec::export_trace(report, trace_player);
            std::filesystem::create_directories(out_dir);
            const auto path =
                std::filesystem::path(out_dir) / ("trace_" + trace_player + ".csv");
            std::ofstream os(path, std::ios::binary);
            if (!os) throw cogrec::IoError("cannot create " + path.string());
            cogrec::write_trace_csv(rows, report.class_names, os);
            std::printf("%s: %zu rows\n", path.c_str(), rows.size());
        }
    } catch (const cogrec::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
