#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "heritage/decision_tree.hpp"
#include "heritage/error.hpp"
#include "heritage/feature_matrix.hpp"
#include "heritage/rng.hpp"

namespace heritage::ml {

struct ForestParams {
    int n_estimators = 100;
    int max_depth = -1;  // -1 = none
    int min_samples_split = 2;
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<std::string> feature_names;
    std::vector<std::string> class_labels;
    std::vector<DecisionTree> trees;
    std::vector<double> importances;  // normalized impurity decrease
    ForestParams params;

    std::vector<int> predict(const FeatureMatrix& matrix,
                             const std::vector<std::size_t>& rows) const {
        const auto cols = align_columns(feature_names, matrix);
        std::vector<int> out;
        out.reserve(rows.size());
        std::vector<double> x(cols.size());
        for (const auto r : rows) {
            for (std::size_t d = 0; d < cols.size(); ++d) x[d] = matrix.at(r, cols[d]);
            std::vector<std::size_t> votes(class_labels.size(), 0);
            for (const auto& tree : trees) ++votes[static_cast<std::size_t>(tree.predict_row(x))];
            out.push_back(static_cast<int>(
                std::max_element(votes.begin(), votes.end()) - votes.begin()));
        }
        return out;
    }
};

// Bagged CART: per-tree bootstrap of the training rows, sqrt(d) feature
// subset per split, majority vote. Sample weights flow into the Gini sums.
inline ForestModel train_forest(const DataView& view, const std::vector<double>& weights,
                                const ForestParams& params) {
    require(view.size() > 0, "forest/empty", "cannot train on an empty view");
    require(weights.size() == view.size(), "forest/weights", "one weight per row required");
    const FeatureMatrix& m = *view.matrix;
    const std::size_t n = view.size();

    ForestModel model;
    model.feature_names = m.col_names;
    model.class_labels = m.class_labels;
    model.params = params;
    model.importances.assign(m.n_cols(), 0.0);

    TreeParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.min_samples_split = params.min_samples_split;
    tree_params.max_features =
        std::max(1, static_cast<int>(std::sqrt(static_cast<double>(m.n_cols()))));

    for (int t = 0; t < params.n_estimators; ++t) {
        Rng rng(params.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(t) + 1);
        DataView sample;
        sample.matrix = view.matrix;
        std::vector<double> sample_weights;
        sample.rows.reserve(n);
        sample_weights.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t pick = static_cast<std::size_t>(rng.below(n));
            sample.rows.push_back(view.rows[pick]);
            sample_weights.push_back(weights[pick]);
        }
        auto fitted = fit_classification_tree(sample, sample_weights, tree_params, &rng);
        for (std::size_t f = 0; f < m.n_cols(); ++f)
            model.importances[f] += fitted.impurity_decrease[f];
        model.trees.push_back(std::move(fitted.tree));
    }

    double total = 0.0;
    for (const double v : model.importances) total += v;
    if (total > 0.0)
        for (auto& v : model.importances) v /= total;
    return model;
}

}  // namespace heritage::ml
