// pipeline.hpp — end-to-end wiring: corpus -> features -> model -> reports.
//
// Extraction always computes the full SIG-3 feature block once per
// session; smaller signal sets are prefixes of the canonical order, so a
// SIG-1/SIG-2 dataset is the exact column prefix of the SIG-3 one.
// Normalization is per-feature, which makes prefixing and normalizing
// commute.

#pragma once

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "cogrec/eval.hpp"
#include "cogrec/features.hpp"
#include "cogrec/session_io.hpp"
#include "cogrec/synthetic.hpp"

namespace cogrec {

/// Raw (un-normalized) SIG-3 vectors for a whole corpus, session order
/// following the sorted player ids. Parallel across sessions.
inline std::vector<FeatureVector> extract_corpus_features(const Corpus& corpus,
                                                          int threads = 1) {
    std::vector<std::vector<FeatureVector>> per_session(corpus.size());
    auto work = [&](std::size_t i) {
        per_session[i] = extract_features(corpus[i], SignalSet::Sig3);
    };
    if (threads > 1 && corpus.size() > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int nt = std::min<int>(threads, static_cast<int>(corpus.size()));
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < corpus.size();
                     i = next.fetch_add(1))
                    work(i);
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < corpus.size(); ++i) work(i);
    }
    std::vector<FeatureVector> all;
    for (auto& vs : per_session)
        all.insert(all.end(), std::make_move_iterator(vs.begin()),
                   std::make_move_iterator(vs.end()));
    return all;
}

/// Prefix-restriction of SIG-3 vectors to a smaller signal set.
inline std::vector<FeatureVector> restrict_to_set(const std::vector<FeatureVector>& sig3,
                                                  SignalSet set) {
    const std::size_t n = feature_count(set);
    std::vector<FeatureVector> out;
    out.reserve(sig3.size());
    for (const auto& v : sig3) {
        FeatureVector w;
        w.player_id = v.player_id;
        w.window = v.window;
        w.signal_set = set;
        w.values.assign(v.values.begin(),
                        v.values.begin() + static_cast<std::ptrdiff_t>(n));
        out.push_back(std::move(w));
    }
    return out;
}

/// Normalized dataset for one signal set, built from raw SIG-3 vectors.
inline FeatureDataset build_dataset(const Corpus& corpus,
                                    const std::vector<FeatureVector>& raw_sig3,
                                    SignalSet set) {
    auto vectors = restrict_to_set(raw_sig3, set);
    const auto stats = fit_subject_stats(vectors);
    vectors = apply_normalization(std::move(vectors), stats);
    std::map<std::string, LabelTrack> tracks;
    for (const auto& s : corpus) tracks[s.player_id] = s.labels;
    return FeatureDataset::from_vectors(set, std::move(vectors), std::move(tracks));
}

// ── Result tables ────────────────────────────────────────────────────

inline std::string format_fixed(double v, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::string scenario_title(Scenario s) {
    switch (s) {
        case Scenario::PlayerIndependent: return "Player-independent classification";
        case Scenario::PlayerDependent: return "Player-dependent classification";
        case Scenario::Biometric: return "Biometric player recognition";
    }
    return "";
}

/// Text table in the usual layout: a chance-level row, then one row per
/// signal set with balanced accuracy and macro precision/recall/F1.
inline std::string result_table(Scenario scenario,
                                const std::vector<EvaluationReport>& reports) {
    std::string out = scenario_title(scenario) + "\n";
    out += "signals    acc.   prec.   rec.    F1\n";
    if (!reports.empty()) {
        const auto& b = reports.front().random_baseline;
        out += "random     " + format_fixed(b.balanced_accuracy) + "   " +
               format_fixed(b.macro_precision) + "    " + format_fixed(b.macro_recall) +
               "    " + format_fixed(b.macro_f1) + "\n";
    }
    for (const auto& r : reports) {
        const auto& m = r.metrics;
        out += std::string(signal_set_name(r.signal_set)) + "      " +
               format_fixed(m.balanced_accuracy) + "   " + format_fixed(m.macro_precision) +
               "    " + format_fixed(m.macro_recall) + "    " + format_fixed(m.macro_f1) +
               "\n";
    }
    return out;
}

// ── Experiment driver ────────────────────────────────────────────────

struct ExperimentOptions {
    std::vector<SignalSet> signal_sets = {SignalSet::Sig1, SignalSet::Sig2, SignalSet::Sig3};
    std::vector<Scenario> scenarios = {Scenario::PlayerIndependent, Scenario::PlayerDependent,
                                       Scenario::Biometric};
    GBTParams params;
    int threads = 1;
    int biometric_pair_cap = 100;
    bool collect_traces = true;
    std::filesystem::path output_dir;  // empty: nothing written
    bool save_models = false;
};

struct ExperimentResult {
    // reports[i][j]: scenarios[i] x signal_sets[j]
    std::vector<std::vector<EvaluationReport>> reports;
    std::vector<std::string> tables;  // one per scenario
};

/// Runs the requested scenario x signal-set grid over a corpus and
/// optionally writes reports, tables and fold-0 models to output_dir.
inline ExperimentResult run_experiment(const Corpus& corpus, const ExperimentOptions& opt) {
    if (!opt.output_dir.empty()) std::filesystem::create_directories(opt.output_dir);
    const auto raw = extract_corpus_features(corpus, opt.threads);

    ExperimentResult result;
    for (Scenario scenario : opt.scenarios) {
        std::vector<EvaluationReport> row;
        for (SignalSet set : opt.signal_sets) {
            const auto ds = build_dataset(corpus, raw, set);
            LoocvOptions lo;
            lo.threads = opt.threads;
            lo.biometric_pair_cap = opt.biometric_pair_cap;
            lo.collect_traces = opt.collect_traces;
            if (opt.save_models && !opt.output_dir.empty())
                lo.save_first_model =
                    opt.output_dir / ("model_" + std::string(scenario_name(scenario)) + "_" +
                                      std::string(signal_set_name(set)) + "_fold0.json");
            row.push_back(run_loocv(ds, scenario, opt.params, lo));
        }
        result.tables.push_back(result_table(scenario, row));
        result.reports.push_back(std::move(row));
    }

    if (!opt.output_dir.empty()) {
        std::filesystem::create_directories(opt.output_dir);
        for (std::size_t i = 0; i < result.reports.size(); ++i) {
            for (const auto& r : result.reports[i]) {
                const auto name = "report_" + std::string(scenario_name(r.scenario)) + "_" +
                                  std::string(signal_set_name(r.signal_set)) + ".json";
                std::ofstream out(opt.output_dir / name, std::ios::binary);
                if (!out) throw IoError("cannot create report " + name);
                out << report_to_json(r).dump(1) << '\n';
            }
            const auto tname =
                "table_" + std::string(scenario_name(opt.scenarios[i])) + ".txt";
            std::ofstream out(opt.output_dir / tname, std::ios::binary);
            out << result.tables[i];
        }
    }
    return result;
}

}  // namespace cogrec
