#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "heritage/error.hpp"

namespace heritage::llm {

using nlohmann::json;

enum class FieldKind {
    year,            // integer, 1000..2024
    boolean,         // true/false
    scale,           // 1..100
    percent,         // 0..100
    count,           // integer >= 0
    positive_count,  // integer >= 1
    enumeration,     // one value from a closed list
    multi_select,    // subset of a closed list, no duplicates
};

struct FieldSpec {
    std::string name;
    FieldKind kind = FieldKind::scale;
    std::vector<std::string> allowed;  // enum / multi-select values, "N/A" included when admissible
    double min = 0.0;
    double max = 0.0;

    bool allows_na() const {
        return std::find(allowed.begin(), allowed.end(), "N/A") != allowed.end();
    }
};

// The façade assessment schema. One authoritative object: the prompt
// template, the response validator and the model encoder all derive their
// field lists from here.
inline const std::vector<FieldSpec>& facade_schema() {
    static const std::vector<FieldSpec> schema = [] {
        std::vector<FieldSpec> s;
        auto num = [&](const char* name, FieldKind kind, double lo, double hi) {
            s.push_back({name, kind, {}, lo, hi});
        };
        auto cat = [&](const char* name, std::vector<std::string> values) {
            s.push_back({name, FieldKind::enumeration, std::move(values)});
        };
        num("construction_year", FieldKind::year, 1000, 2024);
        num("famous_architect", FieldKind::boolean, 0, 1);
        num("landmark", FieldKind::boolean, 0, 1);
        num("popularity", FieldKind::scale, 1, 100);
        num("state", FieldKind::scale, 1, 100);
        num("architectural_integrity", FieldKind::scale, 1, 100);
        num("rarity", FieldKind::scale, 1, 100);
        cat("style",
            {"klassicism", "romansk", "gotik", "renässans", "barock", "rokoko", "nyklassicism",
             "nygotik", "nyrbarock", "nyrenässans", "nybarock", "sekelskifte", "nationalromantik",
             "jugend", "funktionalism", "brutalism", "high-tech", "postmodernism",
             "nyfunktionalism"});
        cat("construction_technique",
            {"stolpverkshus", "restimmerhus", "resvirkeshus", "plankhus", "landshövdingehus",
             "tegelhus", "tjockhus", "smalhus", "lamellhus", "punkthus", "skivhus",
             "burspråkshus"});
        cat("roof_shape", {"flat", "gabled", "skillion", "hipped", "gambrel", "pyramidal",
                           "crosspitched", "sawtooth", "cone", "dome", "onion", "round", "mansard",
                           "N/A"});
        cat("roof_material", {"sheet metal", "concrete", "green", "clay", "copper", "wood",
                              "straw", "slate", "bitumen", "glass", "asphalt", "N/A"});
        cat("roof_color", {"red", "black", "brown", "green", "grey", "other", "N/A"});
        cat("facade_material", {"brick", "concrete", "wood", "plaster", "stone", "metal", "glass"});
        cat("facade_color", {"red", "yellow", "white", "blue", "green", "black", "brown", "grey",
                             "beige", "other"});
        num("facade_decoration", FieldKind::scale, 1, 100);
        num("window_area", FieldKind::percent, 0, 100);
        cat("window_shape", {"round", "rectangular", "rounded", "square", "N/A"});
        num("window_number", FieldKind::count, 0, 0);
        num("window_avg_pane_number", FieldKind::positive_count, 1, 0);
        cat("door_type", {"single", "double", "portal", "revolving", "dutch", "N/A"});
        cat("door_material", {"metal", "wood", "glass", "mixed", "other", "N/A"});
        cat("door_shape", {"rectangular", "arched", "N/A"});
        num("complexity", FieldKind::scale, 1, 100);
        num("symmetry", FieldKind::scale, 1, 100);
        num("floor_number", FieldKind::positive_count, 1, 0);
        num("balcony_number", FieldKind::count, 0, 0);
        num("representative_time", FieldKind::scale, 1, 100);
        num("representative_place", FieldKind::scale, 1, 100);
        num("representative_culture", FieldKind::scale, 1, 100);
        num("emotional_reaction", FieldKind::scale, 1, 100);
        s.push_back({"elements",
                     FieldKind::multi_select,
                     {"balconies", "bay_windows", "dormers", "gable_peaks", "natural_stone_plinth",
                      "half_timbered", "plaque", "gates", "colored_glass", "wood_shutters",
                      "door_awning", "front_steps", "eave_decorations", "window_casings",
                      "door_decorations", "recessed_doorway", "display_window",
                      "decorative_moldings", "transom_window", "pilasters", "medallions",
                      "columns", "cornice", "tympanum", "corbel", "pediment"}});
        num("culture_historical", FieldKind::scale, 1, 100);
        num("aesthetic", FieldKind::scale, 1, 100);
        num("social", FieldKind::scale, 1, 100);
        num("visibility_score", FieldKind::scale, 1, 100);
        return s;
    }();
    return schema;
}

inline const FieldSpec& field_spec(const std::string& name) {
    for (const auto& f : facade_schema())
        if (f.name == name) return f;
    throw Error("schema/unknown-field", "no such schema field: " + name);
}

// Case folding plus composition of the handful of combining sequences that
// can occur in the schema's Swedish value names. Identity on anything else.
inline std::string normalize_value(const std::string& raw) {
    // Decode UTF-8 to codepoints.
    std::vector<std::uint32_t> cps;
    for (std::size_t i = 0; i < raw.size();) {
        const unsigned char c = static_cast<unsigned char>(raw[i]);
        std::uint32_t cp = 0;
        std::size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6 && i + 1 < raw.size()) {
            cp = (c & 0x1F) << 6 | (raw[i + 1] & 0x3F);
            len = 2;
        } else if ((c >> 4) == 0xE && i + 2 < raw.size()) {
            cp = (c & 0x0F) << 12 | (raw[i + 1] & 0x3F) << 6 | (raw[i + 2] & 0x3F);
            len = 3;
        } else if ((c >> 3) == 0x1E && i + 3 < raw.size()) {
            cp = (c & 0x07) << 18 | (raw[i + 1] & 0x3F) << 12 | (raw[i + 2] & 0x3F) << 6 |
                 (raw[i + 3] & 0x3F);
            len = 4;
        } else {
            cp = c;
        }
        cps.push_back(cp);
        i += len;
    }
    // Compose combining ring/diaeresis/acute onto their base letters.
    std::vector<std::uint32_t> composed;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (i + 1 < cps.size()) {
            const std::uint32_t base = cps[i], mark = cps[i + 1];
            const std::uint32_t lower = (base >= 'A' && base <= 'Z') ? base + 32 : base;
            std::uint32_t merged = 0;
            if (mark == 0x030A && lower == 'a') merged = 0xE5;           // å
            else if (mark == 0x0308 && lower == 'a') merged = 0xE4;     // ä
            else if (mark == 0x0308 && lower == 'o') merged = 0xF6;     // ö
            else if (mark == 0x0301 && lower == 'e') merged = 0xE9;     // é
            if (merged != 0) {
                composed.push_back(merged);
                ++i;
                continue;
            }
        }
        composed.push_back(cps[i]);
    }
    // Lowercase (ASCII plus the precomposed letters above) and re-encode.
    std::string out;
    for (std::uint32_t cp : composed) {
        if (cp >= 'A' && cp <= 'Z') cp += 32;
        else if (cp == 0xC5) cp = 0xE5;
        else if (cp == 0xC4) cp = 0xE4;
        else if (cp == 0xD6) cp = 0xF6;
        else if (cp == 0xC9) cp = 0xE9;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    // Trim outer whitespace.
    const auto begin = out.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = out.find_last_not_of(" \t\r\n");
    return out.substr(begin, end - begin + 1);
}

// Canonical spelling for a candidate enum value, or nullopt when it is not
// in the allowed list.
inline std::optional<std::string> match_enum_value(const std::string& candidate,
                                                   const std::vector<std::string>& allowed) {
    const std::string norm = normalize_value(candidate);
    for (const auto& a : allowed)
        if (normalize_value(a) == norm) return a;
    return std::nullopt;
}

struct FieldValue {
    enum class Kind { number, boolean, text, set };
    Kind kind = Kind::number;
    double num = 0.0;
    bool flag = false;
    std::string text;
    std::vector<std::string> items;

    static FieldValue number_of(double v) { return {Kind::number, v, false, {}, {}}; }
    static FieldValue bool_of(bool v) { return {Kind::boolean, 0.0, v, {}, {}}; }
    static FieldValue text_of(std::string v) { return {Kind::text, 0.0, false, std::move(v), {}}; }
    static FieldValue set_of(std::vector<std::string> v) {
        return {Kind::set, 0.0, false, {}, std::move(v)};
    }
};

struct Provenance {
    std::string building_id;
    std::string camera_id;
    std::string backend_id;
    std::string model;
    double temperature = 0.0;
};

struct FacadeFeatures {
    std::map<std::string, FieldValue> values;  // all schema fields present once validated
    Provenance provenance;

    double number(const std::string& name) const { return values.at(name).num; }
    bool flag(const std::string& name) const { return values.at(name).flag; }
    const std::string& text(const std::string& name) const { return values.at(name).text; }
    const std::vector<std::string>& set(const std::string& name) const {
        return values.at(name).items;
    }
    bool has_element(const std::string& element) const {
        const auto& items = set("elements");
        return std::find(items.begin(), items.end(), element) != items.end();
    }
};

// Serialization in schema order; strict-parsing the result reproduces the
// record exactly.
inline json features_to_json(const FacadeFeatures& features) {
    nlohmann::ordered_json out;
    for (const auto& spec : facade_schema()) {
        const auto it = features.values.find(spec.name);
        if (it == features.values.end()) continue;
        const FieldValue& v = it->second;
        switch (v.kind) {
            case FieldValue::Kind::number:
                if (v.num == std::floor(v.num) && std::abs(v.num) < 1e15)
                    out[spec.name] = static_cast<std::int64_t>(v.num);
                else
                    out[spec.name] = v.num;
                break;
            case FieldValue::Kind::boolean: out[spec.name] = v.flag; break;
            case FieldValue::Kind::text: out[spec.name] = v.text; break;
            case FieldValue::Kind::set: out[spec.name] = v.items; break;
        }
    }
    return out;
}

struct ValidationIssue {
    std::string field;
    std::string code;  // missing | wrong-type | out-of-range | unknown-enum | illegal-na |
                       // duplicate | unknown-field
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> violations;  // block a strict parse
    std::vector<ValidationIssue> coercions;   // lenient-mode repairs

    bool clean() const { return violations.empty(); }
};

enum class ParseMode { strict, lenient };

struct ParseOutcome {
    std::optional<FacadeFeatures> features;
    ValidationReport report;
    std::optional<std::string> parse_error;  // malformed JSON, with byte offset

    bool ok() const { return features.has_value(); }
};

namespace detail {

inline bool is_integral_number(const json& j) {
    if (j.is_number_integer() || j.is_number_unsigned()) return true;
    if (!j.is_number_float()) return false;
    const double v = j.get<double>();
    return v == std::floor(v);
}

inline void validate_numeric(const FieldSpec& spec, const json& j, ParseMode mode,
                             ValidationReport& report,
                             std::map<std::string, FieldValue>& values) {
    if (!j.is_number()) {
        report.violations.push_back({spec.name, "wrong-type", "expected a number"});
        return;
    }
    const bool needs_integer = spec.kind != FieldKind::scale && spec.kind != FieldKind::percent;
    if (needs_integer && !is_integral_number(j)) {
        report.violations.push_back({spec.name, "wrong-type", "expected an integer"});
        return;
    }
    double v = j.get<double>();
    double lo = spec.min, hi = spec.max;
    if (spec.kind == FieldKind::count) { lo = 0.0; hi = std::numeric_limits<double>::infinity(); }
    if (spec.kind == FieldKind::positive_count) {
        lo = 1.0;
        hi = std::numeric_limits<double>::infinity();
    }
    if (v < lo || v > hi) {
        if (mode == ParseMode::strict) {
            report.violations.push_back(
                {spec.name, "out-of-range", "value " + std::to_string(v) + " outside bounds"});
            return;
        }
        const double clamped = std::clamp(v, lo, std::isinf(hi) ? v : hi);
        report.coercions.push_back({spec.name, "out-of-range",
                                    "clamped " + std::to_string(v) + " to " +
                                        std::to_string(clamped)});
        v = clamped;
    }
    values[spec.name] = FieldValue::number_of(v);
}

}  // namespace detail

// Strict mode demands a single JSON object carrying every schema field with
// a legal value. Lenient mode clamps out-of-range numerics and drops unknown
// multi-select entries, logging each repair, but still requires enums to
// resolve.
inline ParseOutcome parse_response(const std::string& text, ParseMode mode = ParseMode::strict) {
    ParseOutcome outcome;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        outcome.parse_error = "byte " + std::to_string(e.byte) + ": " + e.what();
        return outcome;
    }
    if (!root.is_object()) {
        outcome.parse_error = "byte 0: top-level value is not a JSON object";
        return outcome;
    }

    ValidationReport& report = outcome.report;
    std::map<std::string, FieldValue> values;

    for (const auto& spec : facade_schema()) {
        if (!root.contains(spec.name)) {
            report.violations.push_back({spec.name, "missing", "field absent from response"});
            continue;
        }
        const json& j = root[spec.name];
        switch (spec.kind) {
            case FieldKind::year:
            case FieldKind::scale:
            case FieldKind::percent:
            case FieldKind::count:
            case FieldKind::positive_count:
                detail::validate_numeric(spec, j, mode, report, values);
                break;
            case FieldKind::boolean:
                if (!j.is_boolean())
                    report.violations.push_back({spec.name, "wrong-type", "expected true/false"});
                else
                    values[spec.name] = FieldValue::bool_of(j.get<bool>());
                break;
            case FieldKind::enumeration: {
                if (!j.is_string()) {
                    report.violations.push_back({spec.name, "wrong-type", "expected a string"});
                    break;
                }
                const std::string raw = j.get<std::string>();
                const auto matched = match_enum_value(raw, spec.allowed);
                if (!matched) {
                    const bool looks_na = normalize_value(raw) == "n/a";
                    report.violations.push_back(
                        {spec.name, looks_na ? "illegal-na" : "unknown-enum",
                         "'" + raw + "' is not an allowed value"});
                    break;
                }
                values[spec.name] = FieldValue::text_of(*matched);
                break;
            }
            case FieldKind::multi_select: {
                if (!j.is_array()) {
                    report.violations.push_back(
                        {spec.name, "wrong-type", "expected an array of strings"});
                    break;
                }
                std::vector<std::string> resolved;
                bool bad = false;
                for (const auto& item : j) {
                    if (!item.is_string()) {
                        report.violations.push_back(
                            {spec.name, "wrong-type", "array entries must be strings"});
                        bad = true;
                        break;
                    }
                    const std::string raw = item.get<std::string>();
                    const auto matched = match_enum_value(raw, spec.allowed);
                    if (!matched) {
                        if (mode == ParseMode::strict) {
                            report.violations.push_back(
                                {spec.name, "unknown-enum", "'" + raw + "' is not a known element"});
                            bad = true;
                        } else {
                            report.coercions.push_back(
                                {spec.name, "unknown-enum", "dropped '" + raw + "'"});
                        }
                        continue;
                    }
                    if (std::find(resolved.begin(), resolved.end(), *matched) != resolved.end()) {
                        if (mode == ParseMode::strict) {
                            report.violations.push_back(
                                {spec.name, "duplicate", "'" + *matched + "' listed twice"});
                            bad = true;
                        } else {
                            report.coercions.push_back(
                                {spec.name, "duplicate", "deduplicated '" + *matched + "'"});
                        }
                        continue;
                    }
                    resolved.push_back(*matched);
                }
                if (bad) break;
                // Canonical order: as listed in the schema.
                std::vector<std::string> ordered;
                for (const auto& allowed : spec.allowed)
                    if (std::find(resolved.begin(), resolved.end(), allowed) != resolved.end())
                        ordered.push_back(allowed);
                values[spec.name] = FieldValue::set_of(std::move(ordered));
                break;
            }
        }
    }

    for (auto it = root.begin(); it != root.end(); ++it) {
        bool known = false;
        for (const auto& spec : facade_schema())
            if (spec.name == it.key()) { known = true; break; }
        if (known) continue;
        if (mode == ParseMode::strict)
            report.violations.push_back({it.key(), "unknown-field", "not part of the schema"});
        else
            report.coercions.push_back({it.key(), "unknown-field", "ignored"});
    }

    if (report.clean()) {
        FacadeFeatures features;
        features.values = std::move(values);
        outcome.features = std::move(features);
    }
    return outcome;
}

}  // namespace heritage::llm
