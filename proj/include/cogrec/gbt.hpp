// gbt.hpp — gradient-boosted decision trees, built from scratch.
//
// Second-order boosting: each round fits one regression tree per class
// (softmax) or a single tree (logistic) to the gradient/hessian of the
// weighted loss. Splits are exact greedy over presorted feature columns;
// split gain is 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma and
// leaf weight -G/(H+l), applied scaled by the learning rate. Rows with a
// missing (NaN) feature follow a per-split default branch learned as the
// branch that maximizes gain with the missing rows assigned to it.
//
// Determinism: split ties break toward the lowest feature index, then the
// lowest threshold; with both default directions equal the row goes left.
// Feature-parallel split search reduces in feature order and is therefore
// identical to the serial result.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cogrec/errors.hpp"
#include "cogrec/util.hpp"

namespace cogrec {

// ── Parameters and model types ───────────────────────────────────────

struct GBTParams {
    int n_rounds = 200;
    double learning_rate = 0.1;
    int max_depth = 4;
    double min_child_weight = 1.0;
    double lambda_l2 = 1.0;
    double gamma_min_gain = 0.0;
    double subsample = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_rounds < 1) throw Error("n_rounds must be >= 1");
        if (learning_rate <= 0.0) throw Error("learning_rate must be > 0");
        if (max_depth < 1 || max_depth > 14) throw Error("max_depth must be in [1, 14]");
        if (min_child_weight < 0.0) throw Error("min_child_weight must be >= 0");
        if (lambda_l2 < 0.0) throw Error("lambda_l2 must be >= 0");
        if (gamma_min_gain < 0.0) throw Error("gamma_min_gain must be >= 0");
        if (!(subsample > 0.0 && subsample <= 1.0)) throw Error("subsample must be in (0, 1]");
    }
};

enum class Objective { Softmax, Logistic };

/// Either an internal split or a leaf. Leaves carry the weight already
/// scaled by the learning rate.
struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    bool default_left = true;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double weight = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double leaf_value(std::span<const double> x) const {
        std::int32_t i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(i)];
            const double v = x[static_cast<std::size_t>(nd.feature)];
            if (std::isnan(v))
                i = nd.default_left ? nd.left : nd.right;
            else
                i = v < nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(i)].weight;
    }
};

// ── Objectives ───────────────────────────────────────────────────────
// Exposed so tests can check the analytic gradients against finite
// differences of the loss.

namespace objective {

inline double softmax_loss(std::span<const double> margins, int label) {
    double mx = margins[0];
    for (double m : margins) mx = std::max(mx, m);
    double sum = 0.0;
    for (double m : margins) sum += std::exp(m - mx);
    const double log_p = margins[static_cast<std::size_t>(label)] - mx - std::log(sum);
    return -log_p;
}

inline void softmax_grad_hess(std::span<const double> margins, int label, std::span<double> g,
                              std::span<double> h) {
    double mx = margins[0];
    for (double m : margins) mx = std::max(mx, m);
    double sum = 0.0;
    for (double m : margins) sum += std::exp(m - mx);
    for (std::size_t k = 0; k < margins.size(); ++k) {
        const double p = std::exp(margins[k] - mx) / sum;
        g[k] = p - (static_cast<int>(k) == label ? 1.0 : 0.0);
        h[k] = p * (1.0 - p);
    }
}

inline double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

inline double logistic_loss(double margin, int label) {
    // numerically stable -[y log p + (1-y) log(1-p)]
    const double z = label == 1 ? margin : -margin;
    if (z > 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

inline void logistic_grad_hess(double margin, int label, double& g, double& h) {
    const double p = sigmoid(margin);
    g = p - (label == 1 ? 1.0 : 0.0);
    h = p * (1.0 - p);
}

}  // namespace objective

// ── Model ────────────────────────────────────────────────────────────

struct GBTModel {
    Objective obj = Objective::Softmax;
    int n_classes = 0;  // softmax classes; 2 for logistic
    GBTParams params;
    std::vector<std::string> feature_names;
    std::vector<double> base_score;         // per-class margin offset
    std::vector<std::vector<Tree>> rounds;  // rounds[r][k]; logistic k == 0 only
    std::vector<double> training_loss;      // weighted loss after each round

    std::size_t n_margins() const { return obj == Objective::Softmax
                                               ? static_cast<std::size_t>(n_classes)
                                               : 1; }

    std::vector<double> predict_margin(std::span<const double> x) const {
        std::vector<double> m(base_score.begin(), base_score.end());
        for (const auto& round : rounds)
            for (std::size_t k = 0; k < round.size(); ++k) m[k] += round[k].leaf_value(x);
        return m;
    }

    /// Softmax: K probabilities summing to 1. Logistic: one probability.
    std::vector<double> predict_proba(std::span<const double> x) const {
        check_width(x);
        auto m = predict_margin(x);
        if (obj == Objective::Logistic) return {objective::sigmoid(m[0])};
        double mx = m[0];
        for (double v : m) mx = std::max(mx, v);
        double sum = 0.0;
        for (double& v : m) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : m) v /= sum;
        return m;
    }

    /// Argmax class; ties break toward the lowest code. Logistic is
    /// positive only for p strictly above 0.5.
    int predict_class(std::span<const double> x) const {
        check_width(x);
        const auto m = predict_margin(x);
        if (obj == Objective::Logistic) return m[0] > 0.0 ? 1 : 0;
        std::size_t best = 0;
        for (std::size_t k = 1; k < m.size(); ++k)
            if (m[k] > m[best]) best = k;
        return static_cast<int>(best);
    }

private:
    void check_width(std::span<const double> x) const {
        if (x.size() != feature_names.size())
            throw FeatureOrderMismatch("expected " + std::to_string(feature_names.size()) +
                                       " features, got " + std::to_string(x.size()));
    }
};

// ── Class-balancing weights ──────────────────────────────────────────

/// weight(class c) = N / (K_present * n_c); the mean weight is 1.
inline std::vector<double> compute_example_weights(std::span<const int> labels) {
    if (labels.empty()) throw EmptyDataset("no examples to weight");
    int max_label = 0;
    for (int l : labels) max_label = std::max(max_label, l);
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_label) + 1, 0);
    for (int l : labels) {
        if (l < 0) throw LabelOutOfRange("negative label");
        ++counts[static_cast<std::size_t>(l)];
    }
    std::size_t k_present = 0;
    for (std::size_t c : counts) k_present += c > 0 ? 1 : 0;
    const double n = static_cast<double>(labels.size());
    std::vector<double> w(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        w[i] = n / (static_cast<double>(k_present) *
                    static_cast<double>(counts[static_cast<std::size_t>(labels[i])]));
    return w;
}

// ── Training ─────────────────────────────────────────────────────────

/// Row-major dense matrix; NaN marks a missing value.
struct DataMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // n_rows * n_cols

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * n_cols, n_cols};
    }
};

namespace gbt_detail {

struct SortedEntry {
    float value;
    std::uint32_t row;
};

struct SplitCandidate {
    double gain = 0.0;
    std::int32_t feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    double left_g = 0.0, left_h = 0.0, right_g = 0.0, right_h = 0.0;
};

inline double split_gain(double gl, double hl, double gr, double hr, double lambda,
                         double parent_score) {
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score);
}

/// Tie-tolerant gain comparison. Gains that agree to within accumulated
/// floating-point noise count as equal, so the earlier candidate (lower
/// feature index, lower threshold, missing-left before missing-right)
/// wins and equivalent datasets produce identical trees.
inline bool gain_improves(double gain, double best) {
    return gain > best + 1e-10 * best + 1e-13;
}

/// All presorted state reused across rounds of one training run.
struct TrainContext {
    const DataMatrix* X = nullptr;
    std::vector<std::vector<SortedEntry>> cols;   // per feature, NaN excluded
    std::vector<std::vector<std::uint32_t>> nans; // per feature

    void build(const DataMatrix& m) {
        X = &m;
        cols.resize(m.n_cols);
        nans.resize(m.n_cols);
        for (std::size_t f = 0; f < m.n_cols; ++f) {
            auto& col = cols[f];
            col.reserve(m.n_rows);
            for (std::size_t r = 0; r < m.n_rows; ++r) {
                const double v = m.at(r, f);
                if (std::isnan(v))
                    nans[f].push_back(static_cast<std::uint32_t>(r));
                else
                    col.push_back({static_cast<float>(v), static_cast<std::uint32_t>(r)});
            }
            std::sort(col.begin(), col.end(), [](const SortedEntry& a, const SortedEntry& b) {
                if (a.value != b.value) return a.value < b.value;
                return a.row < b.row;
            });
        }
    }
};

struct NodeScratch {
    double gl = 0.0, hl = 0.0;
    float last_value = 0.0f;
    bool seen = false;
};

/// Best split of every active node for one feature.
inline void scan_feature(const TrainContext& ctx, std::size_t f,
                         std::span<const std::int16_t> row_node,
                         std::span<const char> node_active, std::span<const double> node_g,
                         std::span<const double> node_h, std::span<const double> grad,
                         std::span<const double> hess, const GBTParams& p,
                         std::span<SplitCandidate> best) {
    const std::size_t max_nodes = node_active.size();
    std::vector<double> nan_g(max_nodes, 0.0), nan_h(max_nodes, 0.0);
    for (std::uint32_t r : ctx.nans[f]) {
        const std::int16_t n = row_node[r];
        if (n >= 0 && node_active[static_cast<std::size_t>(n)]) {
            nan_g[static_cast<std::size_t>(n)] += grad[r];
            nan_h[static_cast<std::size_t>(n)] += hess[r];
        }
    }

    std::vector<NodeScratch> scratch(max_nodes);
    const double lambda = p.lambda_l2;
    const double mcw = p.min_child_weight;

    auto consider = [&](std::size_t n, const NodeScratch& sc, double thr) {
        const double gt = node_g[n], ht = node_h[n];
        const double parent = gt * gt / (ht + lambda);
        SplitCandidate& b = best[n];
        const double gn = nan_g[n], hn = nan_h[n];
        if (gn == 0.0 && hn == 0.0) {
            const double gl = sc.gl, hl = sc.hl;
            const double gr = gt - gl, hr = ht - hl;
            if (hl < mcw || hr < mcw) return;
            const double gain = split_gain(gl, hl, gr, hr, lambda, parent) - p.gamma_min_gain;
            if (gain_improves(gain, b.gain)) b = {gain, static_cast<std::int32_t>(f), thr,
                                                  true, gl, hl, gr, hr};
            return;
        }
        {  // missing rows join the left child
            const double gl = sc.gl + gn, hl = sc.hl + hn;
            const double gr = gt - gl, hr = ht - hl;
            if (hl >= mcw && hr >= mcw) {
                const double gain =
                    split_gain(gl, hl, gr, hr, lambda, parent) - p.gamma_min_gain;
                if (gain_improves(gain, b.gain)) b = {gain, static_cast<std::int32_t>(f), thr,
                                                      true, gl, hl, gr, hr};
            }
        }
        {  // missing rows join the right child
            const double gl = sc.gl, hl = sc.hl;
            const double gr = gt - gl, hr = ht - hl;
            if (hl >= mcw && hr >= mcw) {
                const double gain =
                    split_gain(gl, hl, gr, hr, lambda, parent) - p.gamma_min_gain;
                if (gain_improves(gain, b.gain)) b = {gain, static_cast<std::int32_t>(f), thr,
                                                      false, gl, hl, gr, hr};
            }
        }
    };

    for (const SortedEntry e : ctx.cols[f]) {
        const std::int16_t n16 = row_node[e.row];
        if (n16 < 0) continue;
        const auto n = static_cast<std::size_t>(n16);
        if (!node_active[n]) continue;
        NodeScratch& sc = scratch[n];
        if (sc.seen && e.value > sc.last_value) {
            const double thr =
                0.5 * (static_cast<double>(sc.last_value) + static_cast<double>(e.value));
            consider(n, sc, thr);
        }
        sc.gl += grad[e.row];
        sc.hl += hess[e.row];
        sc.last_value = e.value;
        sc.seen = true;
    }
}

/// One regression tree on (grad, hess). row_node holds -1 for rows not in
/// this round's subsample and is reset by the caller each round.
inline Tree build_tree(const TrainContext& ctx, std::span<std::int16_t> row_node,
                       std::span<const double> grad, std::span<const double> hess,
                       const GBTParams& p, int n_threads) {
    const std::size_t n_rows = ctx.X->n_rows;
    const std::size_t n_cols = ctx.X->n_cols;
    const std::size_t max_nodes = (std::size_t{2} << p.max_depth) - 1;

    Tree tree;
    tree.nodes.reserve(max_nodes);
    tree.nodes.push_back({});
    std::vector<char> node_active(max_nodes, 0);
    std::vector<double> node_g(max_nodes, 0.0), node_h(max_nodes, 0.0);
    std::vector<std::int32_t> active = {0};
    node_active[0] = 1;

    for (int depth = 0; depth < p.max_depth && !active.empty(); ++depth) {
        // node totals from current row assignment
        for (std::int32_t n : active) {
            node_g[static_cast<std::size_t>(n)] = 0.0;
            node_h[static_cast<std::size_t>(n)] = 0.0;
        }
        for (std::size_t r = 0; r < n_rows; ++r) {
            const std::int16_t n = row_node[r];
            if (n >= 0 && node_active[static_cast<std::size_t>(n)]) {
                node_g[static_cast<std::size_t>(n)] += grad[r];
                node_h[static_cast<std::size_t>(n)] += hess[r];
            }
        }

        // per-feature split search, reduced in feature order
        std::vector<std::vector<SplitCandidate>> feat_best(n_cols);
        auto run = [&](std::size_t f) {
            feat_best[f].assign(max_nodes, SplitCandidate{});
            scan_feature(ctx, f, row_node, node_active, node_g, node_h, grad, hess, p,
                         feat_best[f]);
        };
        if (n_threads > 1) {
            std::vector<std::thread> pool;
            std::atomic<std::size_t> next{0};
            for (int t = 0; t < n_threads; ++t)
                pool.emplace_back([&] {
                    for (std::size_t f = next.fetch_add(1); f < n_cols;
                         f = next.fetch_add(1))
                        run(f);
                });
            for (auto& th : pool) th.join();
        } else {
            for (std::size_t f = 0; f < n_cols; ++f) run(f);
        }

        std::vector<SplitCandidate> best(max_nodes);
        for (std::size_t f = 0; f < n_cols; ++f)
            for (std::int32_t n : active) {
                const auto& c = feat_best[f][static_cast<std::size_t>(n)];
                if (c.feature >= 0 && gain_improves(c.gain, best[static_cast<std::size_t>(n)].gain))
                    best[static_cast<std::size_t>(n)] = c;
            }

        // grow accepted splits, finalize the rest as leaves
        std::vector<std::int32_t> next_active;
        std::vector<std::int32_t> split_map(max_nodes, -1);
        for (std::int32_t n : active) {
            const auto ni = static_cast<std::size_t>(n);
            const auto& c = best[ni];
            if (c.feature < 0 || c.gain <= 0.0) {
                node_active[ni] = 0;
                tree.nodes[ni].feature = -1;
                tree.nodes[ni].weight = -node_g[ni] / (node_h[ni] + p.lambda_l2) *
                                        p.learning_rate;
                continue;
            }
            const auto left = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.push_back({});
            const auto right = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.push_back({});
            auto& nd = tree.nodes[ni];
            nd.feature = c.feature;
            nd.threshold = c.threshold;
            nd.default_left = c.default_left;
            nd.left = left;
            nd.right = right;
            node_active[ni] = 0;
            node_active[static_cast<std::size_t>(left)] = 1;
            node_active[static_cast<std::size_t>(right)] = 1;
            next_active.push_back(left);
            next_active.push_back(right);
            split_map[ni] = n;
        }

        // route rows of split nodes to their children
        for (std::size_t r = 0; r < n_rows; ++r) {
            const std::int16_t n = row_node[r];
            if (n < 0 || split_map[static_cast<std::size_t>(n)] < 0) continue;
            const auto& nd = tree.nodes[static_cast<std::size_t>(n)];
            const double v = ctx.X->at(r, static_cast<std::size_t>(nd.feature));
            bool go_left;
            if (std::isnan(v))
                go_left = nd.default_left;
            else
                go_left = v < nd.threshold;
            row_node[r] = static_cast<std::int16_t>(go_left ? nd.left : nd.right);
        }
        active = std::move(next_active);
    }

    // depth limit reached: remaining active nodes become leaves
    if (!active.empty()) {
        for (std::int32_t n : active) {
            const auto ni = static_cast<std::size_t>(n);
            node_g[ni] = 0.0;
            node_h[ni] = 0.0;
        }
        for (std::size_t r = 0; r < ctx.X->n_rows; ++r) {
            const std::int16_t n = row_node[r];
            if (n >= 0 && node_active[static_cast<std::size_t>(n)]) {
                node_g[static_cast<std::size_t>(n)] += grad[r];
                node_h[static_cast<std::size_t>(n)] += hess[r];
            }
        }
        for (std::int32_t n : active) {
            const auto ni = static_cast<std::size_t>(n);
            tree.nodes[ni].feature = -1;
            tree.nodes[ni].weight =
                -node_g[ni] / (node_h[ni] + p.lambda_l2) * p.learning_rate;
            node_active[ni] = 0;
        }
    }
    return tree;
}

}  // namespace gbt_detail

/// Trains a boosted ensemble. Softmax labels must lie in [0, n_classes);
/// logistic labels must be 0 or 1. Feature-parallel split search with
/// n_threads > 1 produces output identical to the serial run.
inline GBTModel train_gbt(const DataMatrix& X, std::span<const int> labels,
                          std::span<const double> weights, const GBTParams& params,
                          Objective obj, int n_classes,
                          std::vector<std::string> feature_names, int n_threads = 1) {
    params.validate();
    if (X.n_rows == 0 || labels.empty()) throw EmptyDataset("no training examples");
    if (labels.size() != X.n_rows || weights.size() != X.n_rows)
        throw Error("labels/weights size mismatch");
    if (feature_names.size() != X.n_cols) throw Error("feature name count mismatch");
    const int k_max = obj == Objective::Softmax ? n_classes : 2;
    for (int l : labels)
        if (l < 0 || l >= k_max)
            throw LabelOutOfRange("label " + std::to_string(l) + " outside [0, " +
                                  std::to_string(k_max) + ")");

    GBTModel model;
    model.obj = obj;
    model.n_classes = obj == Objective::Softmax ? n_classes : 2;
    model.params = params;
    model.feature_names = std::move(feature_names);

    const std::size_t K = model.n_margins();
    const std::size_t N = X.n_rows;

    // base score from weighted class priors
    {
        double wsum = 0.0;
        std::vector<double> wk(static_cast<std::size_t>(k_max), 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            wsum += weights[i];
            wk[static_cast<std::size_t>(labels[i])] += weights[i];
        }
        if (obj == Objective::Softmax) {
            model.base_score.resize(K);
            for (std::size_t k = 0; k < K; ++k)
                model.base_score[k] =
                    std::log(std::clamp(wk[k] / wsum, 1e-6, 1.0));
        } else {
            const double p = std::clamp(wk[1] / wsum, 1e-6, 1.0 - 1e-6);
            model.base_score = {std::log(p / (1.0 - p))};
        }
    }

    gbt_detail::TrainContext ctx;
    ctx.build(X);

    std::vector<double> margins(N * K);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < K; ++k) margins[i * K + k] = model.base_score[k];

    std::vector<double> grad(N), hess(N);
    std::vector<double> g_all, h_all;
    if (obj == Objective::Softmax) {
        g_all.resize(N * K);
        h_all.resize(N * K);
    }
    std::vector<std::int16_t> row_node(N);
    std::mt19937_64 rng(params.seed);

    model.rounds.reserve(static_cast<std::size_t>(params.n_rounds));
    model.training_loss.reserve(static_cast<std::size_t>(params.n_rounds));

    for (int round = 0; round < params.n_rounds; ++round) {
        // one subsample per round, shared by the class trees
        std::vector<std::int16_t> base_assign(N, 0);
        if (params.subsample < 1.0) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t i = 0; i < N; ++i)
                base_assign[i] = u(rng) < params.subsample ? std::int16_t{0}
                                                           : std::int16_t{-1};
        }

        std::vector<Tree> round_trees;
        if (obj == Objective::Softmax) {
            for (std::size_t i = 0; i < N; ++i) {
                std::span<const double> m(margins.data() + i * K, K);
                std::span<double> gi(g_all.data() + i * K, K);
                std::span<double> hi(h_all.data() + i * K, K);
                objective::softmax_grad_hess(m, labels[i], gi, hi);
                for (std::size_t k = 0; k < K; ++k) {
                    gi[k] *= weights[i];
                    hi[k] *= weights[i];
                }
            }
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t i = 0; i < N; ++i) {
                    grad[i] = g_all[i * K + k];
                    hess[i] = h_all[i * K + k];
                }
                std::copy(base_assign.begin(), base_assign.end(), row_node.begin());
                round_trees.push_back(
                    gbt_detail::build_tree(ctx, row_node, grad, hess, params, n_threads));
            }
        } else {
            for (std::size_t i = 0; i < N; ++i) {
                double g, h;
                objective::logistic_grad_hess(margins[i], labels[i], g, h);
                grad[i] = g * weights[i];
                hess[i] = h * weights[i];
            }
            std::copy(base_assign.begin(), base_assign.end(), row_node.begin());
            round_trees.push_back(
                gbt_detail::build_tree(ctx, row_node, grad, hess, params, n_threads));
        }

        // margin update for every row, sampled or not
        for (std::size_t i = 0; i < N; ++i) {
            const auto row = X.row(i);
            for (std::size_t k = 0; k < K; ++k)
                margins[i * K + k] += round_trees[k].leaf_value(row);
        }
        model.rounds.push_back(std::move(round_trees));

        double loss = 0.0;
        if (obj == Objective::Softmax) {
            for (std::size_t i = 0; i < N; ++i)
                loss += weights[i] * objective::softmax_loss(
                                         std::span(margins.data() + i * K, K), labels[i]);
        } else {
            for (std::size_t i = 0; i < N; ++i)
                loss += weights[i] * objective::logistic_loss(margins[i], labels[i]);
        }
        model.training_loss.push_back(loss);
    }
    return model;
}

// ── Serialization ────────────────────────────────────────────────────

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const GBTModel& m) {
    nlohmann::json j;
    j["format"] = "cogrec-gbt";
    j["version"] = kModelFormatVersion;
    j["objective"] = m.obj == Objective::Softmax ? "multi:softmax" : "binary:logistic";
    j["n_classes"] = m.n_classes;
    j["params"] = {{"n_rounds", m.params.n_rounds},
                   {"learning_rate", m.params.learning_rate},
                   {"max_depth", m.params.max_depth},
                   {"min_child_weight", m.params.min_child_weight},
                   {"lambda_l2", m.params.lambda_l2},
                   {"gamma_min_gain", m.params.gamma_min_gain},
                   {"subsample", m.params.subsample},
                   {"seed", m.params.seed}};
    j["feature_names"] = m.feature_names;
    j["base_score"] = m.base_score;
    j["training_loss"] = m.training_loss;
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : m.rounds) {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : round) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& nd : t.nodes)
                nodes.push_back({nd.feature, nd.threshold, nd.default_left ? 1 : 0, nd.left,
                                 nd.right, nd.weight});
            trees.push_back(std::move(nodes));
        }
        rounds.push_back(std::move(trees));
    }
    j["trees"] = std::move(rounds);
    return j;
}

inline void save_model(const GBTModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path.string());
    out << model_to_json(m).dump(1) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

inline GBTModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "cogrec-gbt")
            throw CorruptModel("not a cogrec-gbt model file");
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw VersionMismatch("unsupported model version " +
                                  std::to_string(j.at("version").get<int>()));
        GBTModel m;
        const auto obj = j.at("objective").get<std::string>();
        if (obj == "multi:softmax") m.obj = Objective::Softmax;
        else if (obj == "binary:logistic") m.obj = Objective::Logistic;
        else throw CorruptModel("unknown objective '" + obj + "'");
        m.n_classes = j.at("n_classes").get<int>();
        const auto& p = j.at("params");
        m.params.n_rounds = p.at("n_rounds").get<int>();
        m.params.learning_rate = p.at("learning_rate").get<double>();
        m.params.max_depth = p.at("max_depth").get<int>();
        m.params.min_child_weight = p.at("min_child_weight").get<double>();
        m.params.lambda_l2 = p.at("lambda_l2").get<double>();
        m.params.gamma_min_gain = p.at("gamma_min_gain").get<double>();
        m.params.subsample = p.at("subsample").get<double>();
        m.params.seed = p.at("seed").get<std::uint64_t>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.base_score = j.at("base_score").get<std::vector<double>>();
        m.training_loss = j.at("training_loss").get<std::vector<double>>();
        for (const auto& jr : j.at("trees")) {
            std::vector<Tree> round;
            for (const auto& jt : jr) {
                Tree t;
                for (const auto& jn : jt) {
                    if (!jn.is_array() || jn.size() != 6)
                        throw CorruptModel("malformed tree node");
                    TreeNode nd;
                    nd.feature = jn[0].get<std::int32_t>();
                    nd.threshold = jn[1].get<double>();
                    nd.default_left = jn[2].get<int>() != 0;
                    nd.left = jn[3].get<std::int32_t>();
                    nd.right = jn[4].get<std::int32_t>();
                    nd.weight = jn[5].get<double>();
                    t.nodes.push_back(nd);
                }
                if (t.nodes.empty()) throw CorruptModel("empty tree");
                round.push_back(std::move(t));
            }
            m.rounds.push_back(std::move(round));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptModel(std::string("malformed model JSON: ") + e.what());
    }
}

inline GBTModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptModel("cannot parse " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace cogrec
