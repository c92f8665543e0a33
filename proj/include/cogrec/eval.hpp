// eval.hpp — evaluation scenarios, LOOCV driver and metrics.
//
// Three scenarios over a corpus of feature vectors:
//   PlayerIndependent  test player fully held out
//   PlayerDependent    test player's last round per game and every second
//                      pause held out, the rest of their data trains
//   Biometric          binary player recognition over ordered
//                      (positive, negative) player pairs
//
// Predictions from all folds are pooled into one confusion matrix before
// metrics are computed. Folds are independent; running them on several
// threads yields byte-identical reports.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cogrec/features.hpp"
#include "cogrec/gbt.hpp"
#include "cogrec/types.hpp"
#include "cogrec/util.hpp"

namespace cogrec {

// ── Scenario and dataset ─────────────────────────────────────────────

enum class Scenario : int { PlayerIndependent = 0, PlayerDependent = 1, Biometric = 2 };

inline constexpr std::array<std::string_view, 3> kScenarioNames = {"independent", "dependent",
                                                                   "biometric"};

inline std::string_view scenario_name(Scenario s) {
    return kScenarioNames[static_cast<std::size_t>(s)];
}

inline std::optional<Scenario> scenario_from_name(std::string_view name) {
    for (int i = 0; i < 3; ++i)
        if (kScenarioNames[static_cast<std::size_t>(i)] == name)
            return static_cast<Scenario>(i);
    return std::nullopt;
}

/// Feature vectors of a whole corpus plus each player's label intervals
/// (the split rules need round boundaries, which single windows do not
/// carry). Vectors are expected in (player, center) order.
struct FeatureDataset {
    SignalSet set = SignalSet::Sig3;
    std::vector<FeatureVector> vectors;
    std::map<std::string, LabelTrack> tracks;
    std::vector<std::string> players;  // sorted, distinct

    static FeatureDataset from_vectors(SignalSet set, std::vector<FeatureVector> vectors,
                                       std::map<std::string, LabelTrack> tracks) {
        FeatureDataset ds;
        ds.set = set;
        ds.vectors = std::move(vectors);
        ds.tracks = std::move(tracks);
        std::set<std::string> names;
        for (const auto& v : ds.vectors) names.insert(v.player_id);
        ds.players.assign(names.begin(), names.end());
        return ds;
    }
};

struct ScenarioSplit {
    Scenario scenario = Scenario::PlayerIndependent;
    std::vector<std::size_t> train, test;
    std::vector<int> train_labels, test_labels;  // class codes; biometric 1 = positive
    std::string test_player;                     // game scenarios
    std::string positive_player, negative_player;
};

// ── Split construction ───────────────────────────────────────────────

namespace eval_detail {

inline void require_player(const FeatureDataset& ds, const std::string& player) {
    if (!std::binary_search(ds.players.begin(), ds.players.end(), player))
        throw UnknownPlayer("player '" + player + "' not in corpus");
}

/// Per-interval test flags for the player-dependent rule: the last round
/// of each game and every second pause (second, fourth, ... in time
/// order) are held out.
inline std::vector<char> dependent_test_intervals(const LabelTrack& track,
                                                  const std::string& player) {
    const auto& ivs = track.intervals;
    std::array<int, kNumLabels> round_count{};
    for (const auto& iv : ivs) ++round_count[static_cast<std::size_t>(iv.label)];
    for (int g = 0; g < kNumLabels; ++g) {
        if (static_cast<ActivityLabel>(g) == ActivityLabel::Pause) continue;
        if (round_count[static_cast<std::size_t>(g)] < 2)
            throw InsufficientRounds("player '" + player + "' has fewer than 2 rounds of " +
                                     std::string(kLabelNames[static_cast<std::size_t>(g)]));
    }

    std::vector<char> is_test(ivs.size(), 0);
    std::array<int, kNumLabels> last_idx;
    last_idx.fill(-1);
    for (std::size_t i = 0; i < ivs.size(); ++i)
        if (is_game(ivs[i].label)) last_idx[static_cast<std::size_t>(ivs[i].label)] =
            static_cast<int>(i);
    for (int g = 0; g < kNumLabels; ++g)
        if (last_idx[static_cast<std::size_t>(g)] >= 0)
            is_test[static_cast<std::size_t>(last_idx[static_cast<std::size_t>(g)])] = 1;
    int pause_no = 0;
    for (std::size_t i = 0; i < ivs.size(); ++i)
        if (ivs[i].label == ActivityLabel::Pause) {
            if (pause_no % 2 == 1) is_test[i] = 1;  // second, fourth, ...
            ++pause_no;
        }
    return is_test;
}

/// Index of the interval containing time t (half-open), or -1.
inline int interval_index_at(const LabelTrack& track, double t) {
    const auto& ivs = track.intervals;
    for (std::size_t i = 0; i < ivs.size(); ++i)
        if (t >= ivs[i].start && t < ivs[i].end) return static_cast<int>(i);
    return -1;
}

/// Partitions one player's vector indices into train/test under the
/// dependent rule, dropping windows whose 15 s span touches intervals of
/// both assignments.
struct DependentPartition {
    std::vector<std::size_t> train, test;
};

inline DependentPartition partition_dependent(const FeatureDataset& ds,
                                              const std::string& player) {
    const auto it = ds.tracks.find(player);
    if (it == ds.tracks.end())
        throw UnknownPlayer("no label track for player '" + player + "'");
    const LabelTrack& track = it->second;
    const auto is_test = dependent_test_intervals(track, player);
    const auto& ivs = track.intervals;

    DependentPartition out;
    for (std::size_t vi = 0; vi < ds.vectors.size(); ++vi) {
        const auto& v = ds.vectors[vi];
        if (v.player_id != player) continue;
        const int own = interval_index_at(track, v.window.center);
        if (own < 0) continue;  // centre in a label gap: no assignment
        const char own_side = is_test[static_cast<std::size_t>(own)];
        const double ws = v.window.start(), we = v.window.end();
        bool crosses = false;
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            if (ivs[i].end <= ws) continue;
            if (ivs[i].start >= we) break;
            if (is_test[i] != own_side) {
                crosses = true;
                break;
            }
        }
        if (crosses) continue;
        (own_side ? out.test : out.train).push_back(vi);
    }
    return out;
}

}  // namespace eval_detail

inline ScenarioSplit split_player_independent(const FeatureDataset& ds,
                                              const std::string& test_player) {
    eval_detail::require_player(ds, test_player);
    if (ds.players.size() < 2)
        throw SinglePlayerCorpus("player-independent split needs at least 2 players");
    ScenarioSplit s;
    s.scenario = Scenario::PlayerIndependent;
    s.test_player = test_player;
    for (std::size_t i = 0; i < ds.vectors.size(); ++i) {
        const int label = static_cast<int>(ds.vectors[i].window.label);
        if (ds.vectors[i].player_id == test_player) {
            s.test.push_back(i);
            s.test_labels.push_back(label);
        } else {
            s.train.push_back(i);
            s.train_labels.push_back(label);
        }
    }
    return s;
}

inline ScenarioSplit split_player_dependent(const FeatureDataset& ds,
                                            const std::string& test_player) {
    eval_detail::require_player(ds, test_player);
    ScenarioSplit s;
    s.scenario = Scenario::PlayerDependent;
    s.test_player = test_player;
    const auto part = eval_detail::partition_dependent(ds, test_player);
    std::set<std::size_t> own_train(part.train.begin(), part.train.end());
    std::set<std::size_t> own_test(part.test.begin(), part.test.end());
    for (std::size_t i = 0; i < ds.vectors.size(); ++i) {
        const int label = static_cast<int>(ds.vectors[i].window.label);
        if (ds.vectors[i].player_id == test_player) {
            if (own_test.count(i)) {
                s.test.push_back(i);
                s.test_labels.push_back(label);
            } else if (own_train.count(i)) {
                s.train.push_back(i);
                s.train_labels.push_back(label);
            }
            // otherwise: dropped boundary window
        } else {
            s.train.push_back(i);
            s.train_labels.push_back(label);
        }
    }
    return s;
}

inline ScenarioSplit split_biometric(const FeatureDataset& ds, const std::string& positive,
                                     const std::string& negative) {
    if (positive == negative)
        throw SamePlayer("positive and negative player must differ ('" + positive + "')");
    eval_detail::require_player(ds, positive);
    eval_detail::require_player(ds, negative);

    ScenarioSplit s;
    s.scenario = Scenario::Biometric;
    s.positive_player = positive;
    s.negative_player = negative;
    const auto part = eval_detail::partition_dependent(ds, positive);
    std::set<std::size_t> pos_train(part.train.begin(), part.train.end());
    std::set<std::size_t> pos_test(part.test.begin(), part.test.end());

    for (std::size_t i = 0; i < ds.vectors.size(); ++i) {
        const auto& pid = ds.vectors[i].player_id;
        if (pid == positive) {
            if (pos_test.count(i)) {
                s.test.push_back(i);
                s.test_labels.push_back(1);
            } else if (pos_train.count(i)) {
                s.train.push_back(i);
                s.train_labels.push_back(1);
            }
        } else if (pid == negative) {
            s.test.push_back(i);
            s.test_labels.push_back(0);
        } else {
            s.train.push_back(i);
            s.train_labels.push_back(0);
        }
    }
    return s;
}

// ── Metrics ──────────────────────────────────────────────────────────

struct Metrics {
    double balanced_accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

using ConfusionMatrix = std::vector<std::vector<std::int64_t>>;

/// Balanced accuracy is the unweighted mean of per-class recall; macro
/// metrics are unweighted class means. Classes with no test examples are
/// excluded; a class never predicted contributes zero precision.
inline Metrics compute_metrics(const ConfusionMatrix& cm) {
    const std::size_t k = cm.size();
    std::int64_t total = 0;
    for (const auto& row : cm)
        for (std::int64_t v : row) total += v;
    if (total == 0) throw EmptyMatrix("confusion matrix has no entries");

    Metrics m;
    std::size_t n_classes = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t row_sum = 0, col_sum = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row_sum += cm[c][j];
            col_sum += cm[j][c];
        }
        if (row_sum == 0) continue;
        ++n_classes;
        const double tp = static_cast<double>(cm[c][c]);
        const double recall = tp / static_cast<double>(row_sum);
        const double precision = col_sum > 0 ? tp / static_cast<double>(col_sum) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        m.balanced_accuracy += recall;
        m.macro_recall += recall;
        m.macro_precision += precision;
        m.macro_f1 += f1;
    }
    const auto n = static_cast<double>(n_classes);
    m.balanced_accuracy /= n;
    m.macro_recall /= n;
    m.macro_precision /= n;
    m.macro_f1 /= n;
    return m;
}

// ── LOOCV ────────────────────────────────────────────────────────────

struct TraceRow {
    std::string player;
    double center_s = 0.0;
    std::vector<double> probs;  // class order = report class order
    int true_label = 0;
};

struct FoldReport {
    std::string name;  // test player, or "pos>neg" for biometric pairs
    ConfusionMatrix confusion;
    Metrics metrics;
};

struct EvaluationReport {
    Scenario scenario = Scenario::PlayerIndependent;
    SignalSet signal_set = SignalSet::Sig3;
    std::vector<std::string> class_names;
    ConfusionMatrix confusion;  // pooled over folds
    Metrics metrics;
    Metrics random_baseline;  // pooled predictions vs. seed-shuffled labels
    std::vector<FoldReport> folds;
    std::vector<TraceRow> traces;
};

struct LoocvOptions {
    int threads = 1;
    int biometric_pair_cap = 100;  // 0 disables the cap
    bool collect_traces = true;
    std::filesystem::path save_first_model;  // fold-0 model file; empty = skip
};

inline EvaluationReport run_loocv(const FeatureDataset& ds, Scenario scenario,
                                  const GBTParams& params, const LoocvOptions& options = {}) {
    if (ds.players.size() < 2) throw SinglePlayerCorpus("LOOCV needs at least 2 players");
    if (ds.vectors.empty()) throw EmptyDataset("no feature vectors");

    const bool biometric = scenario == Scenario::Biometric;
    const std::size_t K = biometric ? 2 : static_cast<std::size_t>(kNumLabels);
    const std::size_t n_features = ds.vectors.front().values.size();

    // fold list
    std::vector<std::pair<std::string, std::string>> folds;  // (player, "") or (pos, neg)
    if (!biometric) {
        for (const auto& p : ds.players) folds.emplace_back(p, "");
    } else {
        for (const auto& a : ds.players)
            for (const auto& b : ds.players)
                if (a != b) folds.emplace_back(a, b);
        if (options.biometric_pair_cap > 0 &&
            folds.size() > static_cast<std::size_t>(options.biometric_pair_cap)) {
            std::mt19937_64 rng(derive_seed(params.seed, 40));
            std::shuffle(folds.begin(), folds.end(), rng);
            folds.resize(static_cast<std::size_t>(options.biometric_pair_cap));
            std::sort(folds.begin(), folds.end());
        }
    }

    struct FoldOutcome {
        FoldReport report;
        std::vector<TraceRow> traces;
        std::vector<std::pair<int, int>> pooled;  // (true, predicted)
    };
    std::vector<FoldOutcome> outcomes(folds.size());

    auto run_fold = [&](std::size_t fi) {
        const auto& [a, b] = folds[fi];
        ScenarioSplit split;
        switch (scenario) {
            case Scenario::PlayerIndependent: split = split_player_independent(ds, a); break;
            case Scenario::PlayerDependent: split = split_player_dependent(ds, a); break;
            case Scenario::Biometric: split = split_biometric(ds, a, b); break;
        }

        DataMatrix X;
        X.n_rows = split.train.size();
        X.n_cols = n_features;
        X.values.reserve(X.n_rows * X.n_cols);
        for (std::size_t i : split.train) {
            const auto& v = ds.vectors[i].values;
            X.values.insert(X.values.end(), v.begin(), v.end());
        }
        const auto weights = compute_example_weights(split.train_labels);

        GBTParams fold_params = params;
        fold_params.seed = derive_seed(params.seed, 41, fi);
        std::vector<std::string> names;
        if (n_features == feature_count(ds.set)) {
            for (const auto& n : feature_names(ds.set)) names.emplace_back(n);
        } else {
            for (std::size_t f = 0; f < n_features; ++f)
                names.push_back("f" + std::to_string(f));
        }
        const auto model =
            train_gbt(X, split.train_labels, weights, fold_params,
                      biometric ? Objective::Logistic : Objective::Softmax,
                      static_cast<int>(K), std::move(names), 1);
        if (fi == 0 && !options.save_first_model.empty())
            save_model(model, options.save_first_model);

        FoldOutcome out;
        out.report.name = biometric ? a + ">" + b : a;
        out.report.confusion.assign(K, std::vector<std::int64_t>(K, 0));
        for (std::size_t t = 0; t < split.test.size(); ++t) {
            const auto& v = ds.vectors[split.test[t]];
            auto probs = model.predict_proba(v.values);
            if (biometric) probs = {1.0 - probs[0], probs[0]};
            const int pred = model.predict_class(v.values);
            const int truth = split.test_labels[t];
            ++out.report.confusion[static_cast<std::size_t>(truth)]
                                  [static_cast<std::size_t>(pred)];
            out.pooled.emplace_back(truth, pred);
            if (options.collect_traces)
                out.traces.push_back(TraceRow{v.player_id, v.window.center, std::move(probs),
                                              truth});
        }
        out.report.metrics = compute_metrics(out.report.confusion);
        outcomes[fi] = std::move(out);
    };

    if (options.threads > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int nt = std::min<int>(options.threads, static_cast<int>(folds.size()));
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&] {
                for (std::size_t fi = next.fetch_add(1); fi < folds.size();
                     fi = next.fetch_add(1))
                    run_fold(fi);
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t fi = 0; fi < folds.size(); ++fi) run_fold(fi);
    }

    EvaluationReport report;
    report.scenario = scenario;
    report.signal_set = ds.set;
    if (biometric) {
        report.class_names = {"negative", "positive"};
    } else {
        for (const auto& n : kLabelNames) report.class_names.emplace_back(n);
    }
    report.confusion.assign(K, std::vector<std::int64_t>(K, 0));
    std::vector<std::pair<int, int>> pooled;
    for (auto& out : outcomes) {
        for (std::size_t r = 0; r < K; ++r)
            for (std::size_t c = 0; c < K; ++c)
                report.confusion[r][c] += out.report.confusion[r][c];
        pooled.insert(pooled.end(), out.pooled.begin(), out.pooled.end());
        report.traces.insert(report.traces.end(),
                             std::make_move_iterator(out.traces.begin()),
                             std::make_move_iterator(out.traces.end()));
        report.folds.push_back(std::move(out.report));
    }
    report.metrics = compute_metrics(report.confusion);

    // chance-level reference: same predictions scored against labels
    // shuffled with the run seed
    {
        std::vector<int> shuffled;
        shuffled.reserve(pooled.size());
        for (const auto& [truth, pred] : pooled) shuffled.push_back(truth);
        std::mt19937_64 rng(derive_seed(params.seed, 42));
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        ConfusionMatrix cm(K, std::vector<std::int64_t>(K, 0));
        for (std::size_t i = 0; i < pooled.size(); ++i)
            ++cm[static_cast<std::size_t>(shuffled[i])]
                [static_cast<std::size_t>(pooled[i].second)];
        report.random_baseline = compute_metrics(cm);
    }
    return report;
}

// ── Traces ───────────────────────────────────────────────────────────

/// Time-ordered probability trace of one player's test windows.
inline std::vector<TraceRow> export_trace(const EvaluationReport& report,
                                          const std::string& player) {
    std::vector<TraceRow> rows;
    for (const auto& t : report.traces)
        if (t.player == player) rows.push_back(t);
    if (rows.empty())
        throw UnknownPlayer("player '" + player + "' has no trace rows in this report");
    std::stable_sort(rows.begin(), rows.end(),
                     [](const TraceRow& a, const TraceRow& b) { return a.center_s < b.center_s; });
    return rows;
}

inline void write_trace_csv(const std::vector<TraceRow>& rows,
                            const std::vector<std::string>& class_names, std::ostream& out) {
    out << "center_s";
    for (const auto& c : class_names) out << ",p_" << c;
    out << ",true_label\n";
    for (const auto& r : rows) {
        out << format_double(r.center_s);
        for (double p : r.probs) out << ',' << format_double(p);
        out << ',' << class_names[static_cast<std::size_t>(r.true_label)] << '\n';
    }
}

// ── Report serialization ─────────────────────────────────────────────

inline nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"balanced_accuracy", m.balanced_accuracy},
            {"macro_precision", m.macro_precision},
            {"macro_recall", m.macro_recall},
            {"macro_f1", m.macro_f1}};
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
    Metrics m;
    m.balanced_accuracy = j.at("balanced_accuracy").get<double>();
    m.macro_precision = j.at("macro_precision").get<double>();
    m.macro_recall = j.at("macro_recall").get<double>();
    m.macro_f1 = j.at("macro_f1").get<double>();
    return m;
}

inline nlohmann::json report_to_json(const EvaluationReport& r) {
    nlohmann::json j;
    j["scenario"] = std::string(scenario_name(r.scenario));
    j["signal_set"] = std::string(signal_set_name(r.signal_set));
    j["class_names"] = r.class_names;
    j["confusion"] = r.confusion;
    j["metrics"] = metrics_to_json(r.metrics);
    j["random_baseline"] = metrics_to_json(r.random_baseline);
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : r.folds)
        folds.push_back({{"name", f.name},
                         {"confusion", f.confusion},
                         {"metrics", metrics_to_json(f.metrics)}});
    j["folds"] = std::move(folds);
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& t : r.traces)
        traces.push_back({{"player", t.player},
                          {"center_s", t.center_s},
                          {"probs", t.probs},
                          {"true_label", t.true_label}});
    j["traces"] = std::move(traces);
    return j;
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
    EvaluationReport r;
    const auto sc = scenario_from_name(j.at("scenario").get<std::string>());
    const auto ss = signal_set_from_name(j.at("signal_set").get<std::string>());
    if (!sc || !ss) throw Error("bad scenario or signal set in report JSON");
    r.scenario = *sc;
    r.signal_set = *ss;
    r.class_names = j.at("class_names").get<std::vector<std::string>>();
    r.confusion = j.at("confusion").get<ConfusionMatrix>();
    r.metrics = metrics_from_json(j.at("metrics"));
    r.random_baseline = metrics_from_json(j.at("random_baseline"));
    for (const auto& jf : j.at("folds")) {
        FoldReport f;
        f.name = jf.at("name").get<std::string>();
        f.confusion = jf.at("confusion").get<ConfusionMatrix>();
        f.metrics = metrics_from_json(jf.at("metrics"));
        r.folds.push_back(std::move(f));
    }
    for (const auto& jt : j.at("traces")) {
        TraceRow t;
        t.player = jt.at("player").get<std::string>();
        t.center_s = jt.at("center_s").get<double>();
        t.probs = jt.at("probs").get<std::vector<double>>();
        t.true_label = jt.at("true_label").get<int>();
        r.traces.push_back(std::move(t));
    }
    return r;
}

}  // namespace cogrec
