#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "heritage/error.hpp"
#include "heritage/feature_matrix.hpp"

namespace heritage::ml {

struct LogisticParams {
    double C = 1.0;
    int max_iter = 1000;
    double tol = 1e-6;  // gradient infinity-norm
};

struct LogisticModel {
    std::vector<std::string> feature_names;
    std::vector<std::string> class_labels;
    std::vector<double> weights;     // K x D, row-major
    std::vector<double> intercepts;  // K, constrained to sum to zero
    LogisticParams params;

    std::size_t n_classes() const { return class_labels.size(); }
    std::size_t n_features() const { return feature_names.size(); }

    std::vector<double> scores(const std::vector<double>& x) const {
        const std::size_t K = n_classes(), D = n_features();
        std::vector<double> s(K);
        for (std::size_t k = 0; k < K; ++k) {
            double acc = intercepts[k];
            for (std::size_t d = 0; d < D; ++d) acc += weights[k * D + d] * x[d];
            s[k] = acc;
        }
        return s;
    }

    std::vector<int> predict(const FeatureMatrix& matrix,
                             const std::vector<std::size_t>& rows) const {
        const auto cols = align_columns(feature_names, matrix);
        std::vector<int> out;
        out.reserve(rows.size());
        std::vector<double> x(cols.size());
        for (const auto r : rows) {
            for (std::size_t d = 0; d < cols.size(); ++d) x[d] = matrix.at(r, cols[d]);
            const auto s = scores(x);
            out.push_back(static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin()));
        }
        return out;
    }

    // Mean absolute coefficient per feature across classes.
    std::vector<double> importances() const {
        const std::size_t K = n_classes(), D = n_features();
        std::vector<double> imp(D, 0.0);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t d = 0; d < D; ++d) imp[d] += std::abs(weights[k * D + d]);
        for (auto& v : imp) v /= static_cast<double>(K);
        return imp;
    }
};

namespace logistic_detail {

// Weighted softmax cross-entropy with an L2 term (0.5/C)*||W||^2 on the
// non-intercept weights. Parameter layout: [W (K*D), b (K)]. The intercept
// gradient is projected onto the sum-zero subspace, which pins down the
// otherwise score-shift-invariant optimum.
struct Objective {
    const DataView* view;
    const std::vector<double>* row_weights;  // aggregated
    const std::vector<std::vector<double>>* X;  // aggregated rows
    const std::vector<int>* y;
    std::size_t K, D;
    double C;

    double operator()(const std::vector<double>& theta, std::vector<double>& grad) const {
        const std::size_t n = X->size();
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        std::vector<double> s(K), p(K);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& xi = (*X)[i];
            const double wi = (*row_weights)[i];
            double smax = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < K; ++k) {
                double acc = theta[K * D + k];
                for (std::size_t d = 0; d < D; ++d) acc += theta[k * D + d] * xi[d];
                s[k] = acc;
                smax = std::max(smax, acc);
            }
            double z = 0.0;
            for (std::size_t k = 0; k < K; ++k) z += std::exp(s[k] - smax);
            const double logz = std::log(z) + smax;
            loss += wi * (logz - s[static_cast<std::size_t>((*y)[i])]);
            for (std::size_t k = 0; k < K; ++k) {
                p[k] = std::exp(s[k] - logz);
                const double coeff = wi * (p[k] - (static_cast<std::size_t>((*y)[i]) == k ? 1.0 : 0.0));
                for (std::size_t d = 0; d < D; ++d) grad[k * D + d] += coeff * xi[d];
                grad[K * D + k] += coeff;
            }
        }
        for (std::size_t j = 0; j < K * D; ++j) {
            loss += 0.5 / C * theta[j] * theta[j];
            grad[j] += theta[j] / C;
        }
        double bias_mean = 0.0;
        for (std::size_t k = 0; k < K; ++k) bias_mean += grad[K * D + k];
        bias_mean /= static_cast<double>(K);
        for (std::size_t k = 0; k < K; ++k) grad[K * D + k] -= bias_mean;
        return loss;
    }
};

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Two-loop L-BFGS with Armijo backtracking; fully deterministic.
template <typename F>
inline int lbfgs_minimize(F&& objective, std::vector<double>& theta, int max_iter, double tol) {
    const std::size_t dim = theta.size();
    std::vector<double> grad(dim), new_grad(dim);
    double loss = objective(theta, grad);
    require(std::isfinite(loss), "logistic/non-finite", "non-finite initial loss");

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    const std::size_t memory = 8;

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        if (inf_norm(grad) < tol) break;

        // Two-loop recursion.
        std::vector<double> q = grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t idx = s_hist.size(); idx-- > 0;) {
            double sq = 0.0;
            for (std::size_t j = 0; j < dim; ++j) sq += s_hist[idx][j] * q[j];
            alpha[idx] = rho_hist[idx] * sq;
            for (std::size_t j = 0; j < dim; ++j) q[j] -= alpha[idx] * y_hist[idx][j];
        }
        double gamma = 1.0;
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                sy += s_hist.back()[j] * y_hist.back()[j];
                yy += y_hist.back()[j] * y_hist.back()[j];
            }
            if (yy > 0.0) gamma = sy / yy;
        }
        for (auto& v : q) v *= gamma;
        for (std::size_t idx = 0; idx < s_hist.size(); ++idx) {
            double yq = 0.0;
            for (std::size_t j = 0; j < dim; ++j) yq += y_hist[idx][j] * q[j];
            const double beta = rho_hist[idx] * yq;
            for (std::size_t j = 0; j < dim; ++j) q[j] += s_hist[idx][j] * (alpha[idx] - beta);
        }
        // q approximates H^{-1} grad; descend along -q.
        double gq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) gq += grad[j] * q[j];
        if (gq <= 0.0) {  // not a descent direction; fall back to steepest descent
            q = grad;
            gq = 0.0;
            for (std::size_t j = 0; j < dim; ++j) gq += grad[j] * grad[j];
        }

        double step = 1.0;
        std::vector<double> candidate(dim);
        double new_loss = loss;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < dim; ++j) candidate[j] = theta[j] - step * q[j];
            new_loss = objective(candidate, new_grad);
            if (std::isfinite(new_loss) && new_loss <= loss - 1e-4 * step * gq) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // line search stalled at machine precision

        std::vector<double> s_vec(dim), y_vec(dim);
        double sy = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            s_vec[j] = candidate[j] - theta[j];
            y_vec[j] = new_grad[j] - grad[j];
            sy += s_vec[j] * y_vec[j];
        }
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        theta = std::move(candidate);
        grad = new_grad;
        loss = new_loss;
        require(std::isfinite(loss), "logistic/non-finite", "non-finite training loss");
    }
    return iter;
}

// Rows with byte-identical features and equal targets are merged, summing
// their weights. Exact for the loss, and it makes weight-vs-duplication
// produce the same optimization problem bit for bit.
inline void aggregate_rows(const DataView& view, const std::vector<double>& weights,
                           std::vector<std::vector<double>>& X, std::vector<int>& y,
                           std::vector<double>& w) {
    std::map<std::pair<std::string, int>, std::size_t> seen;
    const std::size_t D = view.matrix->n_cols();
    for (std::size_t i = 0; i < view.size(); ++i) {
        std::vector<double> xi(D);
        for (std::size_t d = 0; d < D; ++d) xi[d] = view.x(i, d);
        std::string key(reinterpret_cast<const char*>(xi.data()), D * sizeof(double));
        const auto map_key = std::make_pair(std::move(key), view.y(i));
        const auto it = seen.find(map_key);
        if (it == seen.end()) {
            seen.emplace(map_key, X.size());
            X.push_back(std::move(xi));
            y.push_back(view.y(i));
            w.push_back(weights[i]);
        } else {
            w[it->second] += weights[i];
        }
    }
}

}  // namespace logistic_detail

inline LogisticModel train_logistic(const DataView& view, const std::vector<double>& weights,
                                    const LogisticParams& params = {}) {
    require(view.size() > 0, "logistic/empty", "cannot train on an empty view");
    require(weights.size() == view.size(), "logistic/weights",
            "one weight per training row required");
    const FeatureMatrix& m = *view.matrix;
    const std::size_t K = m.class_labels.size();
    const std::size_t D = m.n_cols();

    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::vector<double> w;
    logistic_detail::aggregate_rows(view, weights, X, y, w);

    logistic_detail::Objective obj{&view, &w, &X, &y, K, D, params.C};
    std::vector<double> theta(K * D + K, 0.0);
    logistic_detail::lbfgs_minimize(obj, theta, params.max_iter, params.tol);

    LogisticModel model;
    model.feature_names = m.col_names;
    model.class_labels = m.class_labels;
    model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(K * D));
    model.intercepts.assign(theta.begin() + static_cast<std::ptrdiff_t>(K * D), theta.end());
    model.params = params;
    return model;
}

}  // namespace heritage::ml
