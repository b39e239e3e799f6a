#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heritage/error.hpp"
#include "heritage/feature_schema.hpp"
#include "heritage/prompt.hpp"
#include "heritage/rng.hpp"

namespace heritage::llm {

// RFC 4648 base64 with padding.
inline std::string encode_image(const std::string& bytes) {
    require(!bytes.empty(), "llm/empty-image", "cannot encode an empty image payload");
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                                static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        out.push_back(alphabet[n & 63]);
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

struct ModelParams {
    std::string model = "mock";
    double temperature = 0.2;
    bool json_response_format = true;
};

struct BackendRequest {
    std::string key;  // (building_id or building_id#camera) for replay lookups
    std::string image_b64;
    std::string prompt;
    ModelParams params;
};

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string complete(const BackendRequest& request) const = 0;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

// Deterministic function of (seed, request): the same request always yields
// the same schema-valid response. With jitter > 0 the backend becomes a
// deterministic *sequence* instead — each repetition perturbs numeric
// answers with noise scaled by jitter * temperature, which is what the
// repeat-consistency studies exercise.
class MockBackend final : public LlmBackend {
public:
    explicit MockBackend(std::uint64_t seed = 0, double jitter = 0.0)
        : seed_(seed), jitter_(jitter) {}

    std::string id() const override { return "mock"; }

    std::string complete(const BackendRequest& request) const override {
        std::uint64_t h = detail::fnv1a(request.key);
        h = detail::fnv1a(request.prompt, h);
        h = detail::fnv1a(request.image_b64, h);
        h = detail::fnv1a(std::to_string(request.params.temperature), h);
        h ^= seed_;
        if (jitter_ > 0.0) h = detail::fnv1a(std::to_string(call_count_++), h);
        Rng rng(h);
        const double noise = jitter_ * request.params.temperature;

        nlohmann::ordered_json out;
        for (const auto& spec : facade_schema()) {
            switch (spec.kind) {
                case FieldKind::year: {
                    const double base = 1850 + rng.below(160);
                    out[spec.name] =
                        static_cast<int>(std::clamp(base + rng.normal() * noise * 40.0,
                                                    spec.min, spec.max));
                    break;
                }
                case FieldKind::boolean: out[spec.name] = rng.bernoulli(0.15); break;
                case FieldKind::scale:
                case FieldKind::percent: {
                    const double base = spec.min + rng.below(
                        static_cast<std::uint64_t>(spec.max - spec.min + 1));
                    out[spec.name] = static_cast<int>(
                        std::clamp(base + rng.normal() * noise * 15.0, spec.min, spec.max));
                    break;
                }
                case FieldKind::count: out[spec.name] = static_cast<int>(rng.below(30)); break;
                case FieldKind::positive_count:
                    out[spec.name] = 1 + static_cast<int>(rng.below(8));
                    break;
                case FieldKind::enumeration:
                    out[spec.name] = spec.allowed[rng.below(spec.allowed.size())];
                    break;
                case FieldKind::multi_select: {
                    std::vector<std::string> chosen;
                    for (const auto& e : spec.allowed)
                        if (rng.bernoulli(0.2)) chosen.push_back(e);
                    out[spec.name] = chosen;
                    break;
                }
            }
        }
        return out.dump();
    }

private:
    std::uint64_t seed_;
    double jitter_;
    mutable std::uint64_t call_count_ = 0;
};

// Serves canned response texts keyed by request key; backs offline
// end-to-end runs. File format: JSON-lines of {"key": ..., "response": ...}.
class ReplayBackend final : public LlmBackend {
public:
    explicit ReplayBackend(std::map<std::string, std::string> responses)
        : responses_(std::move(responses)) {}

    static ReplayBackend from_file(const std::string& path) {
        std::ifstream in(path);
        require(in.good(), "llm/replay-missing", "cannot open replay file " + path);
        std::map<std::string, std::string> responses;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                responses[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw Error("llm/replay-parse",
                            path + " line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        return ReplayBackend(std::move(responses));
    }

    std::string id() const override { return "replay"; }

    std::string complete(const BackendRequest& request) const override {
        auto it = responses_.find(request.key);
        if (it == responses_.end()) {
            // Fall back to the building id when the key carries a camera suffix.
            const auto hash = request.key.find('#');
            if (hash != std::string::npos) it = responses_.find(request.key.substr(0, hash));
        }
        require(it != responses_.end(), "llm/replay-miss",
                "no canned response for key '" + request.key + "'");
        return it->second;
    }

private:
    std::map<std::string, std::string> responses_;
};

struct ExtractionRequest {
    std::string key;
    std::string image_bytes;
    std::string address;
    std::optional<int> register_year;  // injected into the prompt only when asked
    ModelParams params;
    int retry_limit = 2;
};

struct ExtractionOptions {
    std::string prompt_template = default_prompt_template();
    bool inject_year = false;  // off by default: a model given the year tends to echo it
    ParseMode mode = ParseMode::strict;
};

struct ExtractionResult {
    std::optional<FacadeFeatures> features;
    int attempts = 0;
    ValidationReport last_report;
    std::optional<std::string> last_parse_error;

    bool ok() const { return features.has_value(); }
};

// Renders the prompt, queries the backend and parses strictly; invalid
// responses are retried with identical inputs up to retry_limit times.
inline ExtractionResult extract(const ExtractionRequest& request, const LlmBackend& backend,
                                const ExtractionOptions& options = {}) {
    require(request.retry_limit >= 0, "llm/bad-retry", "retry_limit must be >= 0");
    std::string address = request.address;
    if (options.inject_year && request.register_year)
        address += " (constructed in " + std::to_string(*request.register_year) + ")";

    BackendRequest br;
    br.key = request.key;
    br.image_b64 = encode_image(request.image_bytes);
    br.prompt = render_prompt(address, options.prompt_template);
    br.params = request.params;

    ExtractionResult result;
    for (int attempt = 0; attempt <= request.retry_limit; ++attempt) {
        ++result.attempts;
        const std::string text = backend.complete(br);
        ParseOutcome outcome = parse_response(text, options.mode);
        if (outcome.ok()) {
            outcome.features->provenance = {request.key, "", backend.id(), request.params.model,
                                            request.params.temperature};
            result.features = std::move(outcome.features);
            result.last_report = std::move(outcome.report);
            return result;
        }
        result.last_report = std::move(outcome.report);
        result.last_parse_error = std::move(outcome.parse_error);
    }
    return result;
}

struct NumericConsistency {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    std::size_t n = 0;
};

struct CategoricalConsistency {
    std::string mode;
    double agreement = 0.0;  // modal share of valid responses
    std::size_t n = 0;
};

struct ConsistencyStats {
    std::map<std::string, NumericConsistency> numeric;
    std::map<std::string, CategoricalConsistency> categorical;
    std::size_t valid_responses = 0;
    std::size_t invalid_responses = 0;
};

// Issues the same request n times (sequentially, so stateful mocks stay
// deterministic) and summarizes per-field spread.
inline ConsistencyStats consistency_run(const ExtractionRequest& request, int n,
                                        const LlmBackend& backend,
                                        const ExtractionOptions& options = {}) {
    require(n >= 2, "llm/consistency-n", "consistency runs need n >= 2");
    std::string address = request.address;
    if (options.inject_year && request.register_year)
        address += " (constructed in " + std::to_string(*request.register_year) + ")";

    BackendRequest br;
    br.key = request.key;
    br.image_b64 = encode_image(request.image_bytes);
    br.prompt = render_prompt(address, options.prompt_template);
    br.params = request.params;

    std::vector<FacadeFeatures> valid;
    ConsistencyStats stats;
    for (int i = 0; i < n; ++i) {
        const std::string text = backend.complete(br);
        ParseOutcome outcome = parse_response(text, options.mode);
        if (outcome.ok())
            valid.push_back(std::move(*outcome.features));
        else
            ++stats.invalid_responses;
    }
    stats.valid_responses = valid.size();
    require(valid.size() >= 2, "llm/consistency-valid",
            "fewer than 2 valid responses across " + std::to_string(n) + " repeats");

    for (const auto& spec : facade_schema()) {
        const bool is_numeric = spec.kind == FieldKind::year || spec.kind == FieldKind::scale ||
                                spec.kind == FieldKind::percent || spec.kind == FieldKind::count ||
                                spec.kind == FieldKind::positive_count;
        if (is_numeric) {
            double sum = 0.0;
            for (const auto& f : valid) sum += f.number(spec.name);
            const double mean = sum / static_cast<double>(valid.size());
            double ss = 0.0;
            for (const auto& f : valid) {
                const double d = f.number(spec.name) - mean;
                ss += d * d;
            }
            const double var = ss / static_cast<double>(valid.size() - 1);
            stats.numeric[spec.name] = {mean, std::sqrt(var), valid.size()};
        } else {
            std::map<std::string, std::size_t> counts;
            for (const auto& f : valid) {
                std::string v;
                if (spec.kind == FieldKind::boolean) {
                    v = f.flag(spec.name) ? "true" : "false";
                } else if (spec.kind == FieldKind::enumeration) {
                    v = f.text(spec.name);
                } else {
                    std::ostringstream joined;  // canonical set spelling
                    for (const auto& e : f.set(spec.name)) joined << e << "|";
                    v = joined.str();
                }
                ++counts[v];
            }
            std::string mode;
            std::size_t best = 0;
            for (const auto& [value, count] : counts)
                if (count > best) { best = count; mode = value; }
            stats.categorical[spec.name] = {mode,
                                            static_cast<double>(best) /
                                                static_cast<double>(valid.size()),
                                            valid.size()};
        }
    }
    return stats;
}

}  // namespace heritage::llm
