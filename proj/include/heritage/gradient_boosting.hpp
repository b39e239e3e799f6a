#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "heritage/decision_tree.hpp"
#include "heritage/error.hpp"
#include "heritage/feature_matrix.hpp"
#include "heritage/rng.hpp"

namespace heritage::ml {

struct GbtParams {
    double learning_rate = 0.1;
    int max_depth = 6;
    int n_estimators = 1000;
    double subsample = 1.0;
    int early_stopping_rounds = 20;
    double lambda = 1.0;  // leaf L2 penalty
    std::uint64_t seed = 0;
};

struct GbtModel {
    std::vector<std::string> feature_names;
    std::vector<std::string> class_labels;
    // rounds_[r][k] is the round-r tree for class k; only rounds up to
    // best_round survive the early-stopping rollback.
    std::vector<std::vector<RegressionTree>> rounds;
    int best_round = 0;  // number of retained rounds
    double learning_rate = 0.1;
    std::vector<double> importances;  // normalized total split gain
    std::vector<double> train_loss;   // per trained round
    std::vector<double> validation_loss;
    GbtParams params;

    std::vector<double> raw_scores(const std::vector<double>& x) const {
        std::vector<double> scores(class_labels.size(), 0.0);
        for (int r = 0; r < best_round; ++r)
            for (std::size_t k = 0; k < class_labels.size(); ++k)
                scores[k] += learning_rate * rounds[static_cast<std::size_t>(r)][k].predict_row(x);
        return scores;
    }

    std::vector<int> predict(const FeatureMatrix& matrix,
                             const std::vector<std::size_t>& rows) const {
        const auto cols = align_columns(feature_names, matrix);
        std::vector<int> out;
        out.reserve(rows.size());
        std::vector<double> x(cols.size());
        for (const auto r : rows) {
            for (std::size_t d = 0; d < cols.size(); ++d) x[d] = matrix.at(r, cols[d]);
            const auto s = raw_scores(x);
            out.push_back(static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin()));
        }
        return out;
    }
};

namespace gbt_detail {

inline void softmax_rows(const std::vector<double>& scores, std::size_t K,
                         std::vector<double>& probs) {
    const std::size_t n = scores.size() / K;
    probs.resize(scores.size());
    for (std::size_t i = 0; i < n; ++i) {
        double smax = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) smax = std::max(smax, scores[i * K + k]);
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) z += std::exp(scores[i * K + k] - smax);
        for (std::size_t k = 0; k < K; ++k) probs[i * K + k] = std::exp(scores[i * K + k] - smax) / z;
    }
}

inline double cross_entropy(const std::vector<double>& scores, const std::vector<int>& targets,
                            const std::vector<double>& weights, std::size_t K) {
    double loss = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double smax = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) smax = std::max(smax, scores[i * K + k]);
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) z += std::exp(scores[i * K + k] - smax);
        const double logp =
            scores[i * K + static_cast<std::size_t>(targets[i])] - smax - std::log(z);
        const double w = weights.empty() ? 1.0 : weights[i];
        loss -= w * logp;
        wsum += w;
    }
    return loss / wsum;
}

}  // namespace gbt_detail

// Boosted trees with a softmax cross-entropy objective: one second-order
// regression tree per class per round, seeded row subsampling, early
// stopping on validation loss with rollback to the best round.
inline GbtModel train_gbt(const DataView& train, const DataView& validation,
                          const std::vector<double>& weights, const GbtParams& params) {
    require(train.size() > 0, "gbt/empty", "cannot train on an empty view");
    require(validation.size() > 0, "gbt/empty-validation",
            "early stopping needs a non-empty validation view");
    require(weights.size() == train.size(), "gbt/weights", "one weight per training row required");
    const FeatureMatrix& m = *train.matrix;
    const std::size_t K = m.class_labels.size();
    const std::size_t n = train.size();
    const std::size_t nv = validation.size();

    GbtModel model;
    model.feature_names = m.col_names;
    model.class_labels = m.class_labels;
    model.learning_rate = params.learning_rate;
    model.params = params;
    model.importances.assign(m.n_cols(), 0.0);

    std::vector<int> y_train(n), y_val(nv);
    for (std::size_t i = 0; i < n; ++i) y_train[i] = train.y(i);
    for (std::size_t i = 0; i < nv; ++i) y_val[i] = validation.y(i);

    std::vector<double> train_scores(n * K, 0.0), val_scores(nv * K, 0.0);
    std::vector<double> probs;
    std::vector<double> val_weights;  // unweighted validation loss

    Rng rng(params.seed * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;

    double best_val = std::numeric_limits<double>::infinity();
    int best_round = 0;
    std::vector<std::vector<double>> round_gains;

    for (int round = 0; round < params.n_estimators; ++round) {
        gbt_detail::softmax_rows(train_scores, K, probs);

        std::vector<std::size_t> chosen;
        if (params.subsample < 1.0) {
            rng.shuffle(pool);
            const std::size_t take = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));
            chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
            std::sort(chosen.begin(), chosen.end());
        } else {
            chosen = pool;
            std::sort(chosen.begin(), chosen.end());
        }

        std::vector<RegressionTree> class_trees;
        std::vector<double> gains(m.n_cols(), 0.0);
        std::vector<std::size_t> chosen_matrix_rows(chosen.size());
        for (std::size_t j = 0; j < chosen.size(); ++j)
            chosen_matrix_rows[j] = train.rows[chosen[j]];
        std::vector<double> g(chosen.size()), h(chosen.size());
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t j = 0; j < chosen.size(); ++j) {
                const std::size_t i = chosen[j];
                const double p = probs[i * K + k];
                const double target = static_cast<std::size_t>(y_train[i]) == k ? 1.0 : 0.0;
                g[j] = weights[i] * (p - target);
                h[j] = weights[i] * std::max(p * (1.0 - p), 1e-16);
            }
            auto fitted =
                fit_regression_tree(m, chosen_matrix_rows, g, h, params.max_depth, params.lambda);
            for (std::size_t f = 0; f < m.n_cols(); ++f) gains[f] += fitted.gain[f];
            class_trees.push_back(std::move(fitted.tree));
        }

        // Update raw scores on every row (subsampling only affects fitting).
        std::vector<double> x(m.n_cols());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < m.n_cols(); ++d) x[d] = train.x(i, d);
            for (std::size_t k = 0; k < K; ++k)
                train_scores[i * K + k] += params.learning_rate * class_trees[k].predict_row(x);
        }
        for (std::size_t i = 0; i < nv; ++i) {
            for (std::size_t d = 0; d < m.n_cols(); ++d) x[d] = validation.x(i, d);
            for (std::size_t k = 0; k < K; ++k)
                val_scores[i * K + k] += params.learning_rate * class_trees[k].predict_row(x);
        }

        model.rounds.push_back(std::move(class_trees));
        round_gains.push_back(std::move(gains));

        const double tl = gbt_detail::cross_entropy(train_scores, y_train, weights, K);
        const double vl = gbt_detail::cross_entropy(val_scores, y_val, val_weights, K);
        require(std::isfinite(tl) && std::isfinite(vl), "gbt/non-finite",
                "non-finite boosting loss");
        model.train_loss.push_back(tl);
        model.validation_loss.push_back(vl);

        if (vl < best_val) {
            best_val = vl;
            best_round = round + 1;
        } else if (round + 1 - best_round >= params.early_stopping_rounds) {
            break;
        }
    }

    // Roll back to the best validation round.
    model.best_round = best_round;
    model.rounds.resize(static_cast<std::size_t>(best_round));
    for (int r = 0; r < best_round; ++r)
        for (std::size_t f = 0; f < m.n_cols(); ++f)
            model.importances[f] += round_gains[static_cast<std::size_t>(r)][f];
    double total = 0.0;
    for (const double v : model.importances) total += v;
    if (total > 0.0)
        for (auto& v : model.importances) v /= total;
    return model;
}

}  // namespace heritage::ml
