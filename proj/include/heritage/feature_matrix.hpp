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
#include "heritage/rng.hpp"

namespace heritage::ml {

enum class ColumnKind { numeric, indicator, binary };

enum class FeatureSet { llm_only, llm_plus_register, register_only };

inline const char* feature_set_name(FeatureSet fs) {
    switch (fs) {
        case FeatureSet::llm_only: return "F";
        case FeatureSet::llm_plus_register: return "F+cp+cy+t";
        case FeatureSet::register_only: return "cp+cy+t";
    }
    return "?";
}

inline std::optional<FeatureSet> parse_feature_set(const std::string& s) {
    if (s == "F") return FeatureSet::llm_only;
    if (s == "F+cp+cy+t") return FeatureSet::llm_plus_register;
    if (s == "cp+cy+t") return FeatureSet::register_only;
    return std::nullopt;
}

struct FeatureMatrix {
    std::vector<std::string> col_names;
    std::vector<ColumnKind> col_kinds;
    std::vector<bool> from_register;
    std::vector<double> data;  // row-major
    std::vector<int> target;   // index into class_labels
    std::vector<std::string> class_labels = {"high", "medium", "low"};
    std::vector<std::string> row_ids;

    std::size_t n_rows() const { return target.size(); }
    std::size_t n_cols() const { return col_names.size(); }
    double at(std::size_t row, std::size_t col) const { return data[row * n_cols() + col]; }
    double& at(std::size_t row, std::size_t col) { return data[row * n_cols() + col]; }

    std::size_t col_index(const std::string& name) const {
        const auto it = std::find(col_names.begin(), col_names.end(), name);
        require(it != col_names.end(), "matrix/no-column", "no column named " + name);
        return static_cast<std::size_t>(it - col_names.begin());
    }
};

inline int class_index(ingest::HeritageTarget t) {
    switch (t) {
        case ingest::HeritageTarget::high: return 0;
        case ingest::HeritageTarget::medium: return 1;
        case ingest::HeritageTarget::low: return 2;
    }
    return -1;
}

struct EncodeRow {
    std::string building_id;
    const llm::FacadeFeatures* features = nullptr;  // may be null for register-only sets
    ingest::HeritageTarget label = ingest::HeritageTarget::medium;
    std::optional<int> register_year;
    std::optional<std::string> register_period;
    std::optional<ingest::BuildingType> register_type;
};

struct EncodeResult {
    FeatureMatrix matrix;
    std::vector<std::string> warnings;  // rows skipped for missing register data
};

// Builds the design matrix: numeric fields pass through, enums become
// schema-wide one-hot blocks (with an explicit N/A level where admissible),
// the multi-select becomes one binary per element, and register columns are
// appended only for the feature sets that ask for them.
inline EncodeResult encode(const std::vector<EncodeRow>& rows, FeatureSet feature_set,
                           const ingest::EraScheme& scheme = ingest::default_era_scheme()) {
    scheme.validate();
    const bool want_llm = feature_set != FeatureSet::register_only;
    const bool want_register = feature_set != FeatureSet::llm_only;

    EncodeResult out;
    FeatureMatrix& m = out.matrix;

    if (want_llm) {
        for (const auto& spec : llm::facade_schema()) {
            switch (spec.kind) {
                case llm::FieldKind::year:
                case llm::FieldKind::scale:
                case llm::FieldKind::percent:
                case llm::FieldKind::count:
                case llm::FieldKind::positive_count:
                    m.col_names.push_back(spec.name);
                    m.col_kinds.push_back(ColumnKind::numeric);
                    m.from_register.push_back(false);
                    break;
                case llm::FieldKind::boolean:
                    m.col_names.push_back(spec.name);
                    m.col_kinds.push_back(ColumnKind::binary);
                    m.from_register.push_back(false);
                    break;
                case llm::FieldKind::enumeration:
                    for (const auto& value : spec.allowed) {
                        m.col_names.push_back(spec.name + "=" + value);
                        m.col_kinds.push_back(ColumnKind::indicator);
                        m.from_register.push_back(false);
                    }
                    break;
                case llm::FieldKind::multi_select:
                    for (const auto& value : spec.allowed) {
                        m.col_names.push_back(spec.name + "=" + value);
                        m.col_kinds.push_back(ColumnKind::binary);
                        m.from_register.push_back(false);
                    }
                    break;
            }
        }
    }
    if (want_register) {
        m.col_names.push_back("reg:construction_year");
        m.col_kinds.push_back(ColumnKind::numeric);
        m.from_register.push_back(true);
        for (const auto& label : scheme.labels) {
            m.col_names.push_back("reg:period=" + label);
            m.col_kinds.push_back(ColumnKind::indicator);
            m.from_register.push_back(true);
        }
        m.col_names.push_back("reg:type=multi_family");
        m.col_kinds.push_back(ColumnKind::indicator);
        m.from_register.push_back(true);
        m.col_names.push_back("reg:type=non_residential");
        m.col_kinds.push_back(ColumnKind::indicator);
        m.from_register.push_back(true);
    }

    const std::size_t n_cols = m.col_names.size();
    for (const auto& row : rows) {
        if (want_llm)
            require(row.features != nullptr, "encode/missing-features",
                    row.building_id + ": no facade features for an LLM feature set");
        std::optional<std::string> period;
        if (want_register) {
            if (row.register_period &&
                std::find(scheme.labels.begin(), scheme.labels.end(), *row.register_period) !=
                    scheme.labels.end()) {
                period = row.register_period;
            } else if (row.register_year) {
                period = ingest::assign_era(*row.register_year, scheme);
            }
            if (!row.register_year || !period || !row.register_type) {
                out.warnings.push_back(row.building_id +
                                       ": skipped (incomplete register data for feature set " +
                                       feature_set_name(feature_set) + ")");
                continue;
            }
        }

        std::vector<double> values;
        values.reserve(n_cols);
        if (want_llm) {
            for (const auto& spec : llm::facade_schema()) {
                const llm::FieldValue& v = row.features->values.at(spec.name);
                switch (spec.kind) {
                    case llm::FieldKind::year:
                    case llm::FieldKind::scale:
                    case llm::FieldKind::percent:
                    case llm::FieldKind::count:
                    case llm::FieldKind::positive_count: values.push_back(v.num); break;
                    case llm::FieldKind::boolean: values.push_back(v.flag ? 1.0 : 0.0); break;
                    case llm::FieldKind::enumeration:
                        for (const auto& value : spec.allowed)
                            values.push_back(v.text == value ? 1.0 : 0.0);
                        break;
                    case llm::FieldKind::multi_select:
                        for (const auto& value : spec.allowed)
                            values.push_back(std::find(v.items.begin(), v.items.end(), value) !=
                                                     v.items.end()
                                                 ? 1.0
                                                 : 0.0);
                        break;
                }
            }
        }
        if (want_register) {
            values.push_back(static_cast<double>(*row.register_year));
            for (const auto& label : scheme.labels) values.push_back(label == *period ? 1.0 : 0.0);
            values.push_back(*row.register_type == ingest::BuildingType::multi_family ? 1.0 : 0.0);
            values.push_back(*row.register_type == ingest::BuildingType::non_residential ? 1.0
                                                                                         : 0.0);
        }
        m.data.insert(m.data.end(), values.begin(), values.end());
        m.target.push_back(class_index(row.label));
        m.row_ids.push_back(row.building_id);
    }
    return out;
}

struct SplitSpec {
    double train_fraction = 0.8;
    double validation_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 42;
};

struct SplitResult {
    std::vector<std::size_t> train, validation, test;
    std::uint64_t hash = 0;
};

// Stratified split with largest-remainder rounding per class: every per-class
// partition count lands within one row of the exact fraction.
inline SplitResult stratified_split(const FeatureMatrix& matrix, const SplitSpec& spec) {
    require(std::abs(spec.train_fraction + spec.validation_fraction + spec.test_fraction - 1.0) <
                1e-9,
            "split/fractions", "split fractions must sum to 1");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < matrix.n_rows(); ++i) by_class[matrix.target[i]].push_back(i);
    for (const auto& [cls, members] : by_class)
        require(members.size() >= 3, "split/small-class",
                "class " + matrix.class_labels[static_cast<std::size_t>(cls)] + " has only " +
                    std::to_string(members.size()) + " rows (need >= 3)");

    SplitResult result;
    Rng rng(spec.seed);
    const double fractions[3] = {spec.train_fraction, spec.validation_fraction,
                                 spec.test_fraction};
    for (auto& [cls, members] : by_class) {
        rng.shuffle(members);
        const double n = static_cast<double>(members.size());
        std::size_t alloc[3];
        double remainder[3];
        std::size_t assigned = 0;
        for (int j = 0; j < 3; ++j) {
            const double exact = fractions[j] * n;
            alloc[j] = static_cast<std::size_t>(std::floor(exact));
            remainder[j] = exact - std::floor(exact);
            assigned += alloc[j];
        }
        std::size_t leftover = members.size() - assigned;
        // Distribute leftovers to the largest remainders; ties favour the
        // earlier partition (train, then validation, then test).
        std::vector<int> order = {0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return remainder[a] > remainder[b]; });
        for (std::size_t l = 0; l < leftover; ++l) ++alloc[order[l % 3]];

        std::size_t pos = 0;
        for (std::size_t j = 0; j < alloc[0]; ++j) result.train.push_back(members[pos++]);
        for (std::size_t j = 0; j < alloc[1]; ++j) result.validation.push_back(members[pos++]);
        for (std::size_t j = 0; j < alloc[2]; ++j) result.test.push_back(members[pos++]);
    }
    std::sort(result.train.begin(), result.train.end());
    std::sort(result.validation.begin(), result.validation.end());
    std::sort(result.test.begin(), result.test.end());

    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::size_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL;
        h *= 1099511628211ULL;
    };
    mix(0xA);
    for (const auto i : result.train) mix(i);
    mix(0xB);
    for (const auto i : result.validation) mix(i);
    mix(0xC);
    for (const auto i : result.test) mix(i);
    result.hash = h;
    return result;
}

// Balanced weights w_c = n / (k * n_c) over the classes present.
inline std::vector<double> class_weights(const std::vector<int>& targets) {
    require(!targets.empty(), "weights/empty", "cannot weight an empty target vector");
    std::map<int, std::size_t> counts;
    for (const int t : targets) ++counts[t];
    const double n = static_cast<double>(targets.size());
    const double k = static_cast<double>(counts.size());
    std::vector<double> weights;
    weights.reserve(targets.size());
    for (const int t : targets)
        weights.push_back(n / (k * static_cast<double>(counts.at(t))));
    return weights;
}

// Row view used by every trainer: (matrix, row indices).
struct DataView {
    const FeatureMatrix* matrix = nullptr;
    std::vector<std::size_t> rows;

    std::size_t size() const { return rows.size(); }
    double x(std::size_t i, std::size_t col) const { return matrix->at(rows[i], col); }
    int y(std::size_t i) const { return matrix->target[rows[i]]; }
};

// Column indices of `names` inside `matrix`, for name-based alignment at
// prediction time.
inline std::vector<std::size_t> align_columns(const std::vector<std::string>& names,
                                              const FeatureMatrix& matrix) {
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < matrix.n_cols(); ++c) index[matrix.col_names[c]] = c;
    std::vector<std::size_t> out;
    out.reserve(names.size());
    for (const auto& name : names) {
        const auto it = index.find(name);
        require(it != index.end(), "matrix/schema-mismatch",
                "prediction matrix lacks column " + name);
        out.push_back(it->second);
    }
    return out;
}

}  // namespace heritage::ml
