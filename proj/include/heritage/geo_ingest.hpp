#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heritage/error.hpp"
#include "heritage/geometry.hpp"

namespace heritage::ingest {

using nlohmann::json;

enum class RawHeritageCategory { blue, green, yellow, grey, hatched };
enum class HeritageTarget { high, medium, low };
enum class BuildingType { multi_family, non_residential };

inline const char* to_string(RawHeritageCategory c) {
    switch (c) {
        case RawHeritageCategory::blue: return "blue";
        case RawHeritageCategory::green: return "green";
        case RawHeritageCategory::yellow: return "yellow";
        case RawHeritageCategory::grey: return "grey";
        case RawHeritageCategory::hatched: return "hatched";
    }
    return "?";
}

inline const char* to_string(HeritageTarget t) {
    switch (t) {
        case HeritageTarget::high: return "high";
        case HeritageTarget::medium: return "medium";
        case HeritageTarget::low: return "low";
    }
    return "?";
}

inline const char* to_string(BuildingType t) {
    return t == BuildingType::multi_family ? "multi_family" : "non_residential";
}

inline std::optional<RawHeritageCategory> parse_raw_heritage(const std::string& s) {
    if (s == "blue") return RawHeritageCategory::blue;
    if (s == "green") return RawHeritageCategory::green;
    if (s == "yellow") return RawHeritageCategory::yellow;
    if (s == "grey") return RawHeritageCategory::grey;
    if (s == "hatched") return RawHeritageCategory::hatched;
    return std::nullopt;
}

inline std::optional<BuildingType> parse_building_type(const std::string& s) {
    if (s == "multi_family") return BuildingType::multi_family;
    if (s == "non_residential") return BuildingType::non_residential;
    return std::nullopt;
}

// Harmonized three-level target. Hatched buildings are unclassified and drop
// out of training and evaluation entirely.
inline std::optional<HeritageTarget> map_heritage(RawHeritageCategory raw) {
    switch (raw) {
        case RawHeritageCategory::blue:
        case RawHeritageCategory::green: return HeritageTarget::high;
        case RawHeritageCategory::yellow: return HeritageTarget::medium;
        case RawHeritageCategory::grey: return HeritageTarget::low;
        case RawHeritageCategory::hatched: return std::nullopt;
    }
    return std::nullopt;
}

struct BuildingRecord {
    std::string id;
    geom::Ring footprint;  // open ring, planar meters
    std::optional<int> construction_year;
    std::optional<std::string> construction_period;
    BuildingType building_type = BuildingType::multi_family;
    std::optional<int> floors;
    std::string address;
    std::optional<RawHeritageCategory> heritage_raw;
};

struct RoadSegment {
    std::string id;
    std::vector<geom::Vec2> centerline;  // >= 2 vertices, consecutive distinct
};

// Construction-year buckets. A breakpoint year belongs to the later bucket.
struct EraScheme {
    std::vector<int> breakpoints;     // strictly increasing
    std::vector<std::string> labels;  // breakpoints.size() + 1 entries

    void validate() const {
        require(!labels.empty(), "era/empty", "era scheme needs at least one label");
        require(labels.size() == breakpoints.size() + 1, "era/shape",
                "era scheme needs exactly one label per bucket");
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            require(breakpoints[i - 1] < breakpoints[i], "era/order",
                    "era breakpoints must be strictly increasing");
    }
};

constexpr int kYearMin = 1000;
constexpr int kYearMax = 2100;

inline EraScheme default_era_scheme() {
    return EraScheme{
        {1700, 1880, 1920, 1945, 1975, 1990, 2005},
        {"pre-1700", "1700-1879", "1880-1919", "1920-1944", "1945-1974", "1975-1989",
         "1990-2004", "2005-present"}};
}

inline std::size_t era_index(int year, const EraScheme& scheme) {
    scheme.validate();
    require(year >= kYearMin && year <= kYearMax, "era/year-range",
            "year " + std::to_string(year) + " outside [1000, 2100]");
    const auto it = std::upper_bound(scheme.breakpoints.begin(), scheme.breakpoints.end(), year);
    return static_cast<std::size_t>(it - scheme.breakpoints.begin());
}

inline const std::string& assign_era(int year, const EraScheme& scheme) {
    return scheme.labels[era_index(year, scheme)];
}

// Linear lon/lat <-> planar-meter mapping declared by whoever produced the
// file. Purely a passthrough convenience; no geodesy is done here.
struct LonLatAnchor {
    geom::Vec2 origin_xy;
    double origin_lon = 0.0;
    double origin_lat = 0.0;
    double meters_per_deg_lon = 0.0;
    double meters_per_deg_lat = 0.0;

    std::pair<double, double> to_lonlat(const geom::Vec2& p) const {
        return {origin_lon + (p.x - origin_xy.x) / meters_per_deg_lon,
                origin_lat + (p.y - origin_xy.y) / meters_per_deg_lat};
    }
};

struct Rejection {
    std::string feature_id;
    std::string reason;
};

template <typename T>
struct LoadResult {
    std::vector<T> records;
    std::vector<Rejection> rejections;
    std::string crs;
    std::optional<LonLatAnchor> lonlat_anchor;
};

namespace detail {

inline json parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "ingest/file-missing", "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw Error("ingest/parse-error", path + ": " + e.what());
    }
}

inline std::string feature_id(const json& feature, std::size_t index) {
    if (feature.contains("id") && feature["id"].is_string())
        return feature["id"].get<std::string>();
    if (feature.contains("properties") && feature["properties"].contains("id") &&
        feature["properties"]["id"].is_string())
        return feature["properties"]["id"].get<std::string>();
    return "feature[" + std::to_string(index) + "]";
}

inline std::optional<LonLatAnchor> read_anchor(const json& root) {
    if (!root.contains("lonlat_anchor")) return std::nullopt;
    const json& a = root["lonlat_anchor"];
    LonLatAnchor anchor;
    anchor.origin_xy = {a.at("origin_xy").at(0).get<double>(),
                        a.at("origin_xy").at(1).get<double>()};
    anchor.origin_lon = a.at("origin_lonlat").at(0).get<double>();
    anchor.origin_lat = a.at("origin_lonlat").at(1).get<double>();
    anchor.meters_per_deg_lon = a.at("meters_per_deg_lon").get<double>();
    anchor.meters_per_deg_lat = a.at("meters_per_deg_lat").get<double>();
    require(anchor.meters_per_deg_lon != 0.0 && anchor.meters_per_deg_lat != 0.0,
            "ingest/bad-anchor", "lonlat_anchor scale must be nonzero");
    return anchor;
}

inline std::optional<std::string> validate_footprint(const geom::Ring& ring) {
    if (ring.size() < 3) return "footprint has fewer than 3 vertices";
    for (std::size_t i = 0; i < ring.size(); ++i)
        if (ring[i] == ring[(i + 1) % ring.size()])
            return "footprint has repeated consecutive vertices";
    if (!geom::ring_is_simple(ring)) return "footprint is self-intersecting";
    if (std::abs(geom::signed_area(ring)) <= 0.0) return "footprint has zero area";
    return std::nullopt;
}

}  // namespace detail

inline LoadResult<BuildingRecord> load_buildings(const std::string& path) {
    const json root = detail::parse_file(path);
    require(root.value("type", "") == std::string("FeatureCollection"), "ingest/not-collection",
            path + ": expected a FeatureCollection");
    LoadResult<BuildingRecord> out;
    out.crs = root.value("crs", "");
    out.lonlat_anchor = detail::read_anchor(root);
    const json features = root.value("features", json::array());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const json& f = features[i];
        const std::string id = detail::feature_id(f, i);
        try {
            BuildingRecord rec;
            rec.id = id;
            const json& geometry = f.at("geometry");
            require(geometry.at("type").get<std::string>() == "Polygon", "ingest/geometry",
                    "geometry must be a Polygon");
            const json& ring_json = geometry.at("coordinates").at(0);
            for (const auto& pt : ring_json)
                rec.footprint.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
            // GeoJSON rings repeat the first vertex; store the open ring.
            if (rec.footprint.size() >= 2 && rec.footprint.front() == rec.footprint.back())
                rec.footprint.pop_back();
            if (auto err = detail::validate_footprint(rec.footprint)) {
                out.rejections.push_back({id, *err});
                continue;
            }
            const json props = f.value("properties", json::object());
            if (props.contains("construction_year") && !props["construction_year"].is_null()) {
                const int year = props["construction_year"].get<int>();
                if (year < kYearMin || year > kYearMax) {
                    out.rejections.push_back({id, "construction_year outside [1000, 2100]"});
                    continue;
                }
                rec.construction_year = year;
            }
            if (props.contains("construction_period") && !props["construction_period"].is_null())
                rec.construction_period = props["construction_period"].get<std::string>();
            const std::string type_str = props.value("building_type", "multi_family");
            const auto type = parse_building_type(type_str);
            if (!type) {
                out.rejections.push_back({id, "unknown building_type '" + type_str + "'"});
                continue;
            }
            rec.building_type = *type;
            if (props.contains("floors") && !props["floors"].is_null()) {
                const int floors = props["floors"].get<int>();
                if (floors < 1) {
                    out.rejections.push_back({id, "floors must be >= 1"});
                    continue;
                }
                rec.floors = floors;
            }
            rec.address = props.value("address", "");
            if (props.contains("heritage_raw") && !props["heritage_raw"].is_null()) {
                const std::string raw = props["heritage_raw"].get<std::string>();
                const auto cat = parse_raw_heritage(raw);
                if (!cat) {
                    out.rejections.push_back({id, "unknown heritage_raw '" + raw + "'"});
                    continue;
                }
                rec.heritage_raw = cat;
            }
            out.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            out.rejections.push_back({id, std::string("malformed feature: ") + e.what()});
        }
    }
    return out;
}

inline LoadResult<RoadSegment> load_roads(const std::string& path) {
    const json root = detail::parse_file(path);
    require(root.value("type", "") == std::string("FeatureCollection"), "ingest/not-collection",
            path + ": expected a FeatureCollection");
    LoadResult<RoadSegment> out;
    out.crs = root.value("crs", "");
    out.lonlat_anchor = detail::read_anchor(root);
    const json features = root.value("features", json::array());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const json& f = features[i];
        const std::string id = detail::feature_id(f, i);
        try {
            RoadSegment seg;
            seg.id = id;
            const json& geometry = f.at("geometry");
            require(geometry.at("type").get<std::string>() == "LineString", "ingest/geometry",
                    "geometry must be a LineString");
            for (const auto& pt : geometry.at("coordinates"))
                seg.centerline.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
            if (seg.centerline.size() < 2) {
                out.rejections.push_back({id, "centerline needs at least 2 vertices"});
                continue;
            }
            bool repeated = false;
            for (std::size_t k = 1; k < seg.centerline.size(); ++k)
                if (seg.centerline[k] == seg.centerline[k - 1]) repeated = true;
            if (repeated) {
                out.rejections.push_back({id, "centerline has repeated consecutive vertices"});
                continue;
            }
            out.records.push_back(std::move(seg));
        } catch (const json::exception& e) {
            out.rejections.push_back({id, std::string("malformed feature: ") + e.what()});
        }
    }
    return out;
}

inline json building_to_feature(const BuildingRecord& rec) {
    json props;
    props["id"] = rec.id;
    if (rec.construction_year) props["construction_year"] = *rec.construction_year;
    if (rec.construction_period) props["construction_period"] = *rec.construction_period;
    props["building_type"] = to_string(rec.building_type);
    if (rec.floors) props["floors"] = *rec.floors;
    props["address"] = rec.address;
    if (rec.heritage_raw) props["heritage_raw"] = to_string(*rec.heritage_raw);
    json ring = json::array();
    for (const auto& v : rec.footprint) ring.push_back(json::array({v.x, v.y}));
    ring.push_back(json::array({rec.footprint.front().x, rec.footprint.front().y}));
    return json{{"type", "Feature"},
                {"properties", props},
                {"geometry", json{{"type", "Polygon"}, {"coordinates", json::array({ring})}}}};
}

inline json road_to_feature(const RoadSegment& seg) {
    json coords = json::array();
    for (const auto& v : seg.centerline) coords.push_back(json::array({v.x, v.y}));
    return json{{"type", "Feature"},
                {"properties", json{{"id", seg.id}}},
                {"geometry", json{{"type", "LineString"}, {"coordinates", coords}}}};
}

template <typename T, typename ToFeature>
inline void save_collection(const std::vector<T>& records, const std::string& path,
                            const std::string& crs, ToFeature&& to_feature,
                            const std::optional<LonLatAnchor>& anchor = std::nullopt) {
    json root;
    root["type"] = "FeatureCollection";
    root["crs"] = crs;
    if (anchor) {
        root["lonlat_anchor"] = {
            {"origin_xy", json::array({anchor->origin_xy.x, anchor->origin_xy.y})},
            {"origin_lonlat", json::array({anchor->origin_lon, anchor->origin_lat})},
            {"meters_per_deg_lon", anchor->meters_per_deg_lon},
            {"meters_per_deg_lat", anchor->meters_per_deg_lat}};
    }
    json features = json::array();
    for (const auto& rec : records) features.push_back(to_feature(rec));
    root["features"] = features;
    std::ofstream out(path);
    require(out.good(), "ingest/write-failed", "cannot write " + path);
    out << root.dump(2) << "\n";
}

inline void save_buildings(const std::vector<BuildingRecord>& records, const std::string& path,
                           const std::string& crs = "LOCAL:meters",
                           const std::optional<LonLatAnchor>& anchor = std::nullopt) {
    save_collection(records, path, crs, building_to_feature, anchor);
}

inline void save_roads(const std::vector<RoadSegment>& records, const std::string& path,
                       const std::string& crs = "LOCAL:meters",
                       const std::optional<LonLatAnchor>& anchor = std::nullopt) {
    save_collection(records, path, crs, road_to_feature, anchor);
}

}  // namespace heritage::ingest
