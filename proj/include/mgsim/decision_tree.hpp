#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mgsim/action_space.hpp"
#include "mgsim/errors.hpp"
#include "mgsim/microgrid.hpp"
#include "mgsim/qlearning.hpp"

namespace mgsim {

inline constexpr int kDtNumFeatures = 3;  // hour, normalized net load, soc fraction

using DtFeatures = std::array<double, kDtNumFeatures>;

struct DtSample {
    DtFeatures features{};
    int action = 0;
};

/// Axis-aligned classification tree distilled from a Q policy. Internal nodes
/// route x[feature] < threshold to the left child; exact threshold hits go
/// right.
struct DTModel {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int action = 0;

        bool leaf() const { return feature < 0; }
    };

    std::vector<Node> nodes;
    int max_depth = 0;
    int min_leaf_count = 1;
    // Net-load normalization carried with the model so it can be applied to
    // raw observations after deserialization.
    double net_min = 0.0;
    double net_max = 1.0;

    int predict(const DtFeatures& x) const {
        int i = 0;
        while (!nodes[i].leaf()) {
            i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
        }
        return nodes[i].action;
    }

    DtFeatures features(const Observation& obs) const {
        Discretizer d;
        d.net_min = net_min;
        d.net_max = net_max;
        return {static_cast<double>(obs.hour_of_day), d.net_norm(obs), obs.soc_fraction};
    }

    std::size_t leaf_count() const {
        std::size_t n = 0;
        for (const auto& node : nodes) n += node.leaf() ? 1 : 0;
        return n;
    }
};

namespace detail {

inline int majority_action(const std::vector<DtSample>& samples, const std::vector<int>& idx,
                           int num_classes) {
    std::vector<int> counts(num_classes, 0);
    for (int i : idx) ++counts[samples[i].action];
    int best = 0;
    for (int a = 1; a < num_classes; ++a) {
        if (counts[a] > counts[best]) best = a;
    }
    return best;
}

inline double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct SplitChoice {
    bool found = false;
    int feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini
};

inline SplitChoice best_split(const std::vector<DtSample>& samples, const std::vector<int>& idx,
                              int num_classes, int min_leaf) {
    SplitChoice best;
    const int n = static_cast<int>(idx.size());
    std::vector<int> order(idx);
    std::vector<int> left_counts(num_classes), right_counts(num_classes);

    for (int f = 0; f < kDtNumFeatures; ++f) {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return samples[a].features[f] < samples[b].features[f];
        });
        std::fill(left_counts.begin(), left_counts.end(), 0);
        std::fill(right_counts.begin(), right_counts.end(), 0);
        for (int i : order) ++right_counts[samples[i].action];

        for (int k = 0; k < n - 1; ++k) {
            const int i = order[k];
            ++left_counts[samples[i].action];
            --right_counts[samples[i].action];
            const double lo = samples[i].features[f];
            const double hi = samples[order[k + 1]].features[f];
            if (hi <= lo) continue;  // no boundary between equal values
            const int nl = k + 1;
            const int nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double w = (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) / n;
            const double thr = lo + (hi - lo) / 2.0;
            // Deterministic preference: lower impurity, then lower feature
            // index, then lower threshold. Zero-gain splits are still kept so
            // consistent data always separates.
            if (!best.found || w < best.impurity - 1e-15) {
                best = {true, f, thr, w};
            }
        }
    }
    return best;
}

inline int build_node(DTModel& model, const std::vector<DtSample>& samples, std::vector<int> idx,
                      int depth, int num_classes, int max_depth, int min_leaf) {
    DTModel::Node node;
    node.action = majority_action(samples, idx, num_classes);

    bool pure = true;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        if (samples[idx[i]].action != samples[idx[0]].action) {
            pure = false;
            break;
        }
    }

    if (!pure && depth < max_depth && static_cast<int>(idx.size()) >= 2 * min_leaf) {
        const SplitChoice split = best_split(samples, idx, num_classes, min_leaf);
        if (split.found) {
            std::vector<int> left, right;
            for (int i : idx) {
                (samples[i].features[split.feature] < split.threshold ? left : right).push_back(i);
            }
            if (!left.empty() && !right.empty()) {
                node.feature = split.feature;
                node.threshold = split.threshold;
                const int self = static_cast<int>(model.nodes.size());
                model.nodes.push_back(node);
                idx.clear();
                idx.shrink_to_fit();
                const int l =
                    build_node(model, samples, std::move(left), depth + 1, num_classes, max_depth, min_leaf);
                const int r =
                    build_node(model, samples, std::move(right), depth + 1, num_classes, max_depth, min_leaf);
                model.nodes[self].left = l;
                model.nodes[self].right = r;
                return self;
            }
        }
    }

    const int self = static_cast<int>(model.nodes.size());
    model.nodes.push_back(node);
    return self;
}

}  // namespace detail

/// CART-style greedy fit minimizing Gini impurity, with deterministic
/// tie-breaking (lowest feature index, then lowest threshold) and majority
/// leaves.
inline DTModel dt_fit(const std::vector<DtSample>& samples, int max_depth, int min_leaf_count,
                      int num_classes = kNumActionTemplates) {
    if (samples.empty()) throw DomainError("dt_fit: empty sample set");
    if (max_depth < 0 || min_leaf_count < 1) throw DomainError("dt_fit: bad tree limits");

    DTModel model;
    model.max_depth = max_depth;
    model.min_leaf_count = min_leaf_count;
    std::vector<int> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    detail::build_node(model, samples, std::move(idx), 0, num_classes, max_depth, min_leaf_count);
    return model;
}

/// Routes the observation through the tree and expands the leaf's template.
inline ControlAction dt_decide(const DTModel& model, const Observation& obs) {
    return expand_template(model.predict(model.features(obs)), obs);
}

/// Greedy rollout of a trained table over the train phase, recording
/// (continuous features, chosen action) pairs for distillation.
inline std::vector<DtSample> collect_policy_samples(Microgrid& mg, const QTable& table) {
    if (!mg.has_split()) throw SplitError("sample collection requires train_test_split");
    std::vector<DtSample> samples;
    Observation obs = mg.reset(Phase::train);
    DTModel norm;  // reuse the feature mapping
    norm.net_min = table.disc.net_min;
    norm.net_max = table.disc.net_max;
    while (!mg.done()) {
        const int a = table.greedy(table.disc.index(obs));
        samples.push_back({norm.features(obs), a});
        obs = mg.run(expand_template(a, obs)).observation;
    }
    return samples;
}

/// Distills a trained Q table into a tree acting on continuous features, so
/// states the table never visited still get sensible actions.
inline DTModel dt_distill(Microgrid& mg, const QTable& table, int max_depth, int min_leaf_count) {
    DTModel model = dt_fit(collect_policy_samples(mg, table), max_depth, min_leaf_count);
    model.net_min = table.disc.net_min;
    model.net_max = table.disc.net_max;
    return model;
}

}  // namespace mgsim
