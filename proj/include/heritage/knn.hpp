#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heritage/error.hpp"
#include "heritage/feature_matrix.hpp"

namespace heritage::ml {

struct KnnParams {
    int n_neighbors = 5;
    bool distance_weighted = false;  // "uniform" vs "distance"
    int p = 2;                       // Minkowski order, 1 or 2
};

struct KnnModel {
    std::vector<std::string> feature_names;
    std::vector<std::string> class_labels;
    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    KnnParams params;

    std::vector<int> predict(const FeatureMatrix& matrix,
                             const std::vector<std::size_t>& rows) const {
        const auto cols = align_columns(feature_names, matrix);
        const std::size_t D = feature_names.size();
        std::vector<int> out;
        out.reserve(rows.size());
        std::vector<std::pair<double, std::size_t>> dists(train_x.size());
        for (const auto r : rows) {
            for (std::size_t i = 0; i < train_x.size(); ++i) {
                double acc = 0.0;
                for (std::size_t d = 0; d < D; ++d) {
                    const double diff = std::abs(matrix.at(r, cols[d]) - train_x[i][d]);
                    acc += params.p == 1 ? diff : diff * diff;
                }
                dists[i] = {params.p == 1 ? acc : std::sqrt(acc), i};
            }
            std::sort(dists.begin(), dists.end());
            const std::size_t k = static_cast<std::size_t>(params.n_neighbors);
            std::vector<double> votes(class_labels.size(), 0.0);
            bool exact_match = false;
            if (params.distance_weighted)
                for (std::size_t j = 0; j < k; ++j)
                    if (dists[j].first == 0.0) exact_match = true;
            for (std::size_t j = 0; j < k; ++j) {
                const auto [dist, idx] = dists[j];
                double vote = 1.0;
                if (params.distance_weighted) {
                    if (exact_match) {
                        // Zero-distance neighbours dominate; everything else
                        // is ignored.
                        if (dist != 0.0) continue;
                    } else {
                        vote = 1.0 / dist;
                    }
                }
                votes[static_cast<std::size_t>(train_y[idx])] += vote;
            }
            out.push_back(static_cast<int>(
                std::max_element(votes.begin(), votes.end()) - votes.begin()));
        }
        return out;
    }
};

inline KnnModel train_knn(const DataView& view, const KnnParams& params = {}) {
    require(params.n_neighbors >= 1, "knn/bad-k", "n_neighbors must be >= 1");
    require(static_cast<std::size_t>(params.n_neighbors) <= view.size(), "knn/k-too-large",
            "n_neighbors exceeds the training set size");
    require(params.p == 1 || params.p == 2, "knn/bad-p", "Minkowski order must be 1 or 2");
    const FeatureMatrix& m = *view.matrix;
    KnnModel model;
    model.feature_names = m.col_names;
    model.class_labels = m.class_labels;
    model.params = params;
    model.train_x.reserve(view.size());
    model.train_y.reserve(view.size());
    for (std::size_t i = 0; i < view.size(); ++i) {
        std::vector<double> xi(m.n_cols());
        for (std::size_t d = 0; d < m.n_cols(); ++d) xi[d] = view.x(i, d);
        model.train_x.push_back(std::move(xi));
        model.train_y.push_back(view.y(i));
    }
    return model;
}

}  // namespace heritage::ml
