#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "heritage/error.hpp"
#include "heritage/feature_matrix.hpp"
#include "heritage/rng.hpp"

namespace heritage::ml {

struct TreeParams {
    int max_depth = -1;  // -1 = unlimited
    int min_samples_split = 2;
    int max_features = -1;  // -1 = all; otherwise a per-split random subset
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = 0;
    std::vector<double> class_weight_sums;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    int predict_row(const std::vector<double>& x) const {
        int idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
            const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(idx)].leaf_class;
    }
};

namespace tree_detail {

inline double gini(const std::vector<double>& class_sums, double total) {
    if (total <= 0.0) return 0.0;
    double acc = 1.0;
    for (const double s : class_sums) {
        const double f = s / total;
        acc -= f * f;
    }
    return acc;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;  // total weighted impurity decrease
};

struct TreeScratch {
    std::vector<std::size_t> order;  // row permutation within the node
};

// Exact greedy split on one node: sort rows per candidate feature, sweep the
// class-weight prefix sums, thresholds at midpoints of distinct values.
template <typename XFn, typename YFn>
inline std::optional<SplitChoice> best_split(const std::vector<std::size_t>& rows,
                                             const std::vector<double>& weights, XFn&& x, YFn&& y,
                                             std::size_t n_classes,
                                             const std::vector<int>& features) {
    std::vector<double> total_sums(n_classes, 0.0);
    double total_weight = 0.0;
    for (const auto r : rows) {
        total_sums[static_cast<std::size_t>(y(r))] += weights[r];
        total_weight += weights[r];
    }
    const double parent_impurity = gini(total_sums, total_weight);

    SplitChoice best;
    std::vector<std::pair<double, std::size_t>> sorted(rows.size());
    std::vector<double> left_sums(n_classes);
    for (const int f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i) sorted[i] = {x(rows[i], f), rows[i]};
        std::sort(sorted.begin(), sorted.end());
        std::fill(left_sums.begin(), left_sums.end(), 0.0);
        double left_weight = 0.0;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            const auto [value, row] = sorted[i];
            left_sums[static_cast<std::size_t>(y(row))] += weights[row];
            left_weight += weights[row];
            if (sorted[i + 1].first == value) continue;
            const double right_weight = total_weight - left_weight;
            std::vector<double> right_sums(n_classes);
            for (std::size_t c = 0; c < n_classes; ++c) right_sums[c] = total_sums[c] - left_sums[c];
            const double decrease = total_weight * parent_impurity -
                                    left_weight * gini(left_sums, left_weight) -
                                    right_weight * gini(right_sums, right_weight);
            // Features and thresholds are swept in ascending order, so a
            // strict comparison keeps the lowest (feature, threshold) on ties.
            if (decrease > best.decrease) {
                const double threshold = value + 0.5 * (sorted[i + 1].first - value);
                best = {f, threshold, decrease};
            }
        }
    }
    if (best.feature < 0 || best.decrease <= 0.0) return std::nullopt;
    return best;
}

}  // namespace tree_detail

struct TreeFitResult {
    DecisionTree tree;
    std::vector<double> impurity_decrease;  // per feature, unnormalized
};

// CART with weighted Gini impurity. `rng` drives the per-split feature
// subset when max_features is set; splits themselves are deterministic.
inline TreeFitResult fit_classification_tree(const DataView& view,
                                             const std::vector<double>& weights,
                                             const TreeParams& params, Rng* rng = nullptr) {
    require(view.size() > 0, "tree/empty", "cannot fit a tree on an empty view");
    require(weights.size() == view.size(), "tree/weights", "one weight per row required");
    const FeatureMatrix& m = *view.matrix;
    const std::size_t n_classes = m.class_labels.size();
    const std::size_t n_features = m.n_cols();

    TreeFitResult result;
    result.impurity_decrease.assign(n_features, 0.0);

    auto x = [&](std::size_t i, int f) { return view.x(i, static_cast<std::size_t>(f)); };
    auto y = [&](std::size_t i) { return view.y(i); };

    struct Pending {
        std::vector<std::size_t> rows;  // indices into the view
        int depth;
        int node_index;
    };

    std::vector<std::size_t> all_rows(view.size());
    for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;

    result.tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({std::move(all_rows), 0, 0});

    std::vector<int> all_features(n_features);
    for (std::size_t f = 0; f < n_features; ++f) all_features[f] = static_cast<int>(f);

    while (!stack.empty()) {
        Pending item = std::move(stack.back());
        stack.pop_back();
        TreeNode& node = result.tree.nodes[static_cast<std::size_t>(item.node_index)];

        std::vector<double> sums(n_classes, 0.0);
        for (const auto r : item.rows) sums[static_cast<std::size_t>(y(r))] += weights[r];
        node.class_weight_sums = sums;
        node.leaf_class = static_cast<int>(std::max_element(sums.begin(), sums.end()) - sums.begin());

        const bool depth_ok = params.max_depth < 0 || item.depth < params.max_depth;
        const bool enough_rows =
            item.rows.size() >= static_cast<std::size_t>(params.min_samples_split);
        std::size_t present_classes = 0;
        for (const double s : sums)
            if (s > 0.0) ++present_classes;
        if (!depth_ok || !enough_rows || present_classes <= 1) continue;

        std::vector<int> features;
        if (params.max_features > 0 &&
            static_cast<std::size_t>(params.max_features) < n_features) {
            require(rng != nullptr, "tree/no-rng", "feature subsampling needs an RNG");
            std::vector<int> pool = all_features;
            rng->shuffle(pool);
            features.assign(pool.begin(), pool.begin() + params.max_features);
            std::sort(features.begin(), features.end());
        } else {
            features = all_features;
        }

        const auto split = tree_detail::best_split(item.rows, weights, x, y, n_classes, features);
        if (!split) continue;

        std::vector<std::size_t> left_rows, right_rows;
        for (const auto r : item.rows) {
            if (x(r, split->feature) <= split->threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        if (left_rows.empty() || right_rows.empty()) continue;

        result.impurity_decrease[static_cast<std::size_t>(split->feature)] += split->decrease;

        const int left_index = static_cast<int>(result.tree.nodes.size());
        result.tree.nodes.emplace_back();
        const int right_index = static_cast<int>(result.tree.nodes.size());
        result.tree.nodes.emplace_back();
        TreeNode& parent = result.tree.nodes[static_cast<std::size_t>(item.node_index)];
        parent.feature = split->feature;
        parent.threshold = split->threshold;
        parent.left = left_index;
        parent.right = right_index;

        stack.push_back({std::move(right_rows), item.depth + 1, right_index});
        stack.push_back({std::move(left_rows), item.depth + 1, left_index});
    }
    return result;
}

inline std::vector<int> predict_tree(const DecisionTree& tree, const FeatureMatrix& matrix,
                                     const std::vector<std::string>& feature_names,
                                     const std::vector<std::size_t>& rows) {
    const auto cols = align_columns(feature_names, matrix);
    std::vector<double> x(cols.size());
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto r : rows) {
        for (std::size_t d = 0; d < cols.size(); ++d) x[d] = matrix.at(r, cols[d]);
        out.push_back(tree.predict_row(x));
    }
    return out;
}

// Regression tree on (gradient, hessian) pairs, used by the boosting
// trainer. Gain and leaf values follow the second-order formulation with an
// L2 leaf penalty.
struct RegressionTreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<RegressionTreeNode> nodes;

    double predict_row(const std::vector<double>& x) const {
        int idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
            const RegressionTreeNode& n = nodes[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(idx)].value;
    }
};

struct RegressionTreeResult {
    RegressionTree tree;
    std::vector<double> gain;  // per feature
};

inline RegressionTreeResult fit_regression_tree(
    const FeatureMatrix& matrix, const std::vector<std::size_t>& rows,
    const std::vector<double>& gradients,  // indexed like rows
    const std::vector<double>& hessians, int max_depth, double lambda) {
    constexpr double kMinChildHessian = 1e-6;
    RegressionTreeResult result;
    result.gain.assign(matrix.n_cols(), 0.0);

    struct Pending {
        std::vector<std::size_t> members;  // indices into rows/gradients
        int depth;
        int node_index;
    };

    auto leaf_score = [lambda](double g, double h) { return g * g / (h + lambda); };

    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    result.tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({std::move(all), 0, 0});

    std::vector<std::pair<double, std::size_t>> sorted;
    while (!stack.empty()) {
        Pending item = std::move(stack.back());
        stack.pop_back();

        double G = 0.0, H = 0.0;
        for (const auto i : item.members) {
            G += gradients[i];
            H += hessians[i];
        }
        result.tree.nodes[static_cast<std::size_t>(item.node_index)].value = -G / (H + lambda);

        if (item.depth >= max_depth || item.members.size() < 2) continue;

        const double parent_score = leaf_score(G, H);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        sorted.resize(item.members.size());
        for (std::size_t f = 0; f < matrix.n_cols(); ++f) {
            for (std::size_t i = 0; i < item.members.size(); ++i)
                sorted[i] = {matrix.at(rows[item.members[i]], f), item.members[i]};
            std::sort(sorted.begin(), sorted.end());
            double GL = 0.0, HL = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                const auto [value, member] = sorted[i];
                GL += gradients[member];
                HL += hessians[member];
                if (sorted[i + 1].first == value) continue;
                const double GR = G - GL, HR = H - HL;
                if (HL < kMinChildHessian || HR < kMinChildHessian) continue;
                const double gain =
                    0.5 * (leaf_score(GL, HL) + leaf_score(GR, HR) - parent_score);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = value + 0.5 * (sorted[i + 1].first - value);
                }
            }
        }
        if (best_feature < 0) continue;

        std::vector<std::size_t> left, right;
        for (const auto i : item.members) {
            if (matrix.at(rows[i], static_cast<std::size_t>(best_feature)) <= best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        if (left.empty() || right.empty()) continue;

        result.gain[static_cast<std::size_t>(best_feature)] += best_gain;
        const int left_index = static_cast<int>(result.tree.nodes.size());
        result.tree.nodes.emplace_back();
        const int right_index = static_cast<int>(result.tree.nodes.size());
        result.tree.nodes.emplace_back();
        RegressionTreeNode& parent = result.tree.nodes[static_cast<std::size_t>(item.node_index)];
        parent.feature = best_feature;
        parent.threshold = best_threshold;
        parent.left = left_index;
        parent.right = right_index;
        stack.push_back({std::move(right), item.depth + 1, right_index});
        stack.push_back({std::move(left), item.depth + 1, left_index});
    }
    return result;
}

}  // namespace heritage::ml
