#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heritage/error.hpp"
#include "heritage/feature_schema.hpp"
#include "heritage/geo_ingest.hpp"

namespace heritage::analytics {

struct ContingencyTable {
    std::vector<std::string> row_labels;  // feature levels
    std::vector<std::string> col_labels;  // heritage categories
    std::vector<std::vector<std::uint64_t>> counts;

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (const auto& row : counts)
            for (const auto c : row) n += c;
        return n;
    }
};

// Drops all-zero rows and columns; Cramér's V is computed on the pruned
// table and the report notes how many lines were removed.
inline ContingencyTable prune_zero_lines(const ContingencyTable& table, std::size_t* pruned = nullptr) {
    std::vector<std::size_t> keep_rows, keep_cols;
    for (std::size_t r = 0; r < table.counts.size(); ++r) {
        std::uint64_t s = 0;
        for (const auto c : table.counts[r]) s += c;
        if (s > 0) keep_rows.push_back(r);
    }
    const std::size_t n_cols = table.counts.empty() ? 0 : table.counts[0].size();
    for (std::size_t c = 0; c < n_cols; ++c) {
        std::uint64_t s = 0;
        for (const auto& row : table.counts) s += row[c];
        if (s > 0) keep_cols.push_back(c);
    }
    if (pruned)
        *pruned = (table.counts.size() - keep_rows.size()) + (n_cols - keep_cols.size());
    ContingencyTable out;
    for (const auto r : keep_rows) out.row_labels.push_back(table.row_labels[r]);
    for (const auto c : keep_cols) out.col_labels.push_back(table.col_labels[c]);
    for (const auto r : keep_rows) {
        std::vector<std::uint64_t> row;
        for (const auto c : keep_cols) row.push_back(table.counts[r][c]);
        out.counts.push_back(std::move(row));
    }
    return out;
}

inline double chi_square(const ContingencyTable& table) {
    const std::size_t R = table.counts.size();
    require(R >= 1 && !table.counts[0].empty(), "analytics/empty-table",
            "contingency table has no cells");
    const std::size_t K = table.counts[0].size();
    const double n = static_cast<double>(table.total());
    require(n > 0, "analytics/empty-table", "contingency table has zero total count");
    std::vector<double> row_tot(R, 0.0), col_tot(K, 0.0);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t k = 0; k < K; ++k) {
            row_tot[r] += static_cast<double>(table.counts[r][k]);
            col_tot[k] += static_cast<double>(table.counts[r][k]);
        }
    for (std::size_t r = 0; r < R; ++r)
        require(row_tot[r] > 0, "analytics/zero-marginal", "table has an all-zero row");
    for (std::size_t k = 0; k < K; ++k)
        require(col_tot[k] > 0, "analytics/zero-marginal", "table has an all-zero column");
    double x2 = 0.0;
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t k = 0; k < K; ++k) {
            const double expected = row_tot[r] * col_tot[k] / n;
            const double diff = static_cast<double>(table.counts[r][k]) - expected;
            x2 += diff * diff / expected;
        }
    return x2;
}

// V = sqrt((X^2 / n) / min(k - 1, r - 1)), no bias correction.
inline double cramers_v(const ContingencyTable& table) {
    const std::size_t R = table.counts.size();
    require(R >= 2, "analytics/degenerate", "Cramér's V needs at least 2 rows");
    const std::size_t K = table.counts[0].size();
    require(K >= 2, "analytics/degenerate", "Cramér's V needs at least 2 columns");
    const double x2 = chi_square(table);
    const double n = static_cast<double>(table.total());
    const double denom = static_cast<double>(std::min(K - 1, R - 1));
    return std::sqrt((x2 / n) / denom);
}

struct EraErrorRow {
    std::string era;
    double mean_error = 0.0;
    double mean_abs_error = 0.0;
    std::size_t count = 0;
};

struct YearErrorStats {
    std::vector<std::pair<std::string, int>> errors;  // building id -> signed error
    std::vector<EraErrorRow> per_era;                 // indexed by the scheme's bucket order
    std::size_t total = 0;
};

using YearById = std::vector<std::pair<std::string, int>>;

// Signed error is predicted - actual: positive means the building was
// predicted younger (more recent) than it is. Aggregation buckets by the
// *actual* year's era.
inline YearErrorStats year_errors(const YearById& predictions, const YearById& truth,
                                  const ingest::EraScheme& scheme) {
    std::map<std::string, int> truth_by_id(truth.begin(), truth.end());
    YearErrorStats stats;
    std::vector<double> sum(scheme.labels.size(), 0.0), sum_abs(scheme.labels.size(), 0.0);
    std::vector<std::size_t> count(scheme.labels.size(), 0);
    for (const auto& [id, predicted] : predictions) {
        const auto it = truth_by_id.find(id);
        if (it == truth_by_id.end()) continue;
        const int error = predicted - it->second;
        stats.errors.emplace_back(id, error);
        const std::size_t era = ingest::era_index(it->second, scheme);
        sum[era] += error;
        sum_abs[era] += std::abs(error);
        ++count[era];
    }
    require(!stats.errors.empty(), "analytics/empty-join",
            "no buildings with both predicted and actual construction year");
    stats.total = stats.errors.size();
    for (std::size_t e = 0; e < scheme.labels.size(); ++e) {
        if (count[e] == 0) continue;
        stats.per_era.push_back({scheme.labels[e], sum[e] / static_cast<double>(count[e]),
                                 sum_abs[e] / static_cast<double>(count[e]), count[e]});
    }
    return stats;
}

struct EraConfusion {
    std::vector<std::string> labels;                     // scheme bucket order
    std::vector<std::vector<std::uint64_t>> matrix;      // [actual][predicted]
    std::vector<std::optional<double>> precision;        // nullopt when undefined
    std::vector<std::optional<double>> recall;
    std::size_t total = 0;
};

inline EraConfusion era_confusion(const YearById& predictions, const YearById& truth,
                                  const ingest::EraScheme& scheme) {
    std::map<std::string, int> truth_by_id(truth.begin(), truth.end());
    EraConfusion out;
    out.labels = scheme.labels;
    const std::size_t E = scheme.labels.size();
    out.matrix.assign(E, std::vector<std::uint64_t>(E, 0));
    for (const auto& [id, predicted] : predictions) {
        const auto it = truth_by_id.find(id);
        if (it == truth_by_id.end()) continue;
        const std::size_t actual_era = ingest::era_index(it->second, scheme);
        const std::size_t predicted_era = ingest::era_index(predicted, scheme);
        ++out.matrix[actual_era][predicted_era];
        ++out.total;
    }
    require(out.total > 0, "analytics/empty-join", "no joined (predicted, actual) year pairs");
    out.precision.resize(E);
    out.recall.resize(E);
    for (std::size_t e = 0; e < E; ++e) {
        std::uint64_t col = 0, row = 0;
        for (std::size_t a = 0; a < E; ++a) col += out.matrix[a][e];
        for (std::size_t p = 0; p < E; ++p) row += out.matrix[e][p];
        const std::uint64_t tp = out.matrix[e][e];
        if (col > 0) out.precision[e] = static_cast<double>(tp) / static_cast<double>(col);
        if (row > 0) out.recall[e] = static_cast<double>(tp) / static_cast<double>(row);
    }
    return out;
}

struct BoxStats {
    double q25 = 0.0, q50 = 0.0, q75 = 0.0;
    double whisker_low = 0.0, whisker_high = 0.0;
    std::vector<double> outliers;
    std::size_t count = 0;
};

// Linear-interpolation quantile on sorted data.
inline double quantile_linear(const std::vector<double>& sorted, double p) {
    require(!sorted.empty(), "analytics/empty", "quantile of an empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double h = p * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Tukey box: whiskers at the most extreme data points within 1.5 IQR of the
// quartiles; everything beyond is an outlier.
inline BoxStats box_stats(std::vector<double> values) {
    require(!values.empty(), "analytics/empty", "box stats of an empty sample");
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.count = values.size();
    b.q25 = quantile_linear(values, 0.25);
    b.q50 = quantile_linear(values, 0.50);
    b.q75 = quantile_linear(values, 0.75);
    const double iqr = b.q75 - b.q25;
    const double lo_fence = b.q25 - 1.5 * iqr;
    const double hi_fence = b.q75 + 1.5 * iqr;
    b.whisker_low = b.q75;
    b.whisker_high = b.q25;
    bool any_inside = false;
    for (const double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            if (!any_inside) {
                b.whisker_low = v;
                b.whisker_high = v;
                any_inside = true;
            }
            b.whisker_low = std::min(b.whisker_low, v);
            b.whisker_high = std::max(b.whisker_high, v);
        }
    }
    return b;
}

struct LabeledFeatures {
    ingest::HeritageTarget label;
    const llm::FacadeFeatures* features;
};

struct ScaleDistributionRow {
    std::string feature;
    ingest::HeritageTarget category;
    BoxStats stats;
};

// One box per (scale feature, heritage category).
inline std::vector<ScaleDistributionRow> scale_distributions(
    const std::vector<LabeledFeatures>& rows) {
    require(!rows.empty(), "analytics/empty", "no labeled feature records");
    std::vector<ScaleDistributionRow> out;
    static const ingest::HeritageTarget targets[] = {
        ingest::HeritageTarget::high, ingest::HeritageTarget::medium, ingest::HeritageTarget::low};
    for (const auto& spec : llm::facade_schema()) {
        if (spec.kind != llm::FieldKind::scale) continue;
        for (const auto target : targets) {
            std::vector<double> values;
            for (const auto& row : rows)
                if (row.label == target) values.push_back(row.features->number(spec.name));
            if (values.empty()) continue;
            out.push_back({spec.name, target, box_stats(std::move(values))});
        }
    }
    return out;
}

struct AssociationRow {
    std::string variable;
    std::optional<double> v;  // nullopt when the pruned table is degenerate
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;  // rows dropped because the feature was N/A
    std::string note;
};

// Cramér's V between each categorical variable and the heritage category.
// Multi-select elements are exploded into one present/absent variable per
// element; N/A rows are excluded per feature and counted.
inline std::vector<AssociationRow> categorical_associations(
    const std::vector<LabeledFeatures>& rows) {
    require(!rows.empty(), "analytics/empty", "no labeled feature records");
    const std::vector<std::string> col_labels = {"high", "medium", "low"};
    auto col_of = [](ingest::HeritageTarget t) {
        return t == ingest::HeritageTarget::high ? 0 : t == ingest::HeritageTarget::medium ? 1 : 2;
    };
    std::vector<AssociationRow> out;

    auto evaluate = [&](const std::string& variable, const ContingencyTable& raw,
                        std::size_t excluded) {
        AssociationRow row;
        row.variable = variable;
        row.n_excluded = excluded;
        std::size_t pruned = 0;
        const ContingencyTable table = prune_zero_lines(raw, &pruned);
        row.n_used = static_cast<std::size_t>(table.total());
        if (pruned > 0) row.note = std::to_string(pruned) + " empty level(s) pruned";
        if (table.counts.size() >= 2 && !table.counts.empty() && table.counts[0].size() >= 2) {
            row.v = cramers_v(table);
        } else {
            row.note = row.note.empty() ? "degenerate table" : row.note + "; degenerate table";
        }
        out.push_back(std::move(row));
    };

    for (const auto& spec : llm::facade_schema()) {
        if (spec.kind == llm::FieldKind::enumeration) {
            ContingencyTable t;
            t.row_labels = spec.allowed;
            t.col_labels = col_labels;
            t.counts.assign(spec.allowed.size(), std::vector<std::uint64_t>(3, 0));
            std::size_t excluded = 0;
            for (const auto& row : rows) {
                const std::string& value = row.features->text(spec.name);
                if (value == "N/A") {
                    ++excluded;
                    continue;
                }
                const auto it = std::find(spec.allowed.begin(), spec.allowed.end(), value);
                t.counts[static_cast<std::size_t>(it - spec.allowed.begin())]
                        [static_cast<std::size_t>(col_of(row.label))]++;
            }
            evaluate(spec.name, t, excluded);
        } else if (spec.kind == llm::FieldKind::boolean) {
            ContingencyTable t;
            t.row_labels = {"true", "false"};
            t.col_labels = col_labels;
            t.counts.assign(2, std::vector<std::uint64_t>(3, 0));
            for (const auto& row : rows)
                t.counts[row.features->flag(spec.name) ? 0 : 1]
                        [static_cast<std::size_t>(col_of(row.label))]++;
            evaluate(spec.name, t, 0);
        } else if (spec.kind == llm::FieldKind::multi_select) {
            for (const auto& element : spec.allowed) {
                ContingencyTable t;
                t.row_labels = {"present", "absent"};
                t.col_labels = col_labels;
                t.counts.assign(2, std::vector<std::uint64_t>(3, 0));
                for (const auto& row : rows)
                    t.counts[row.features->has_element(element) ? 0 : 1]
                            [static_cast<std::size_t>(col_of(row.label))]++;
                evaluate("elements=" + element, t, 0);
            }
        }
    }
    return out;
}

}  // namespace heritage::analytics
