#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heritage/error.hpp"
#include "heritage/geo_ingest.hpp"
#include "heritage/geometry.hpp"

namespace heritage::camera {

using geom::Vec2;

struct WallSegment {
    std::string building_id;
    std::string wall_id;  // building_id + zero-padded edge index; lexicographic tie-break key
    Vec2 a, b;
    Vec2 midpoint;
    double width_m = 0.0;
    Vec2 outward_normal;
};

struct Sightline {
    WallSegment wall;
    Vec2 camera_pos;
    double length_m = 0.0;
    double incidence_deg = 0.0;  // deviation from the wall perpendicular, [0, 90]
};

struct CameraPoint {
    std::string building_id;
    std::string camera_id;
    std::string wall_id;
    Vec2 position;
    std::optional<std::pair<double, double>> lonlat;
    double heading_deg = 0.0;  // clockwise from north, [0, 360)
    double pitch_deg = 0.0;
    double fov_deg = 0.0;
    double sightline_length_m = 0.0;
    double incidence_deg = 0.0;
};

// Step-4 stand-in for a street-view metadata lookup: nearest available
// panorama position for a requested point, or none.
class PanoramaProvider {
public:
    virtual ~PanoramaProvider() = default;
    virtual std::optional<Vec2> nearest(const Vec2& requested) const = 0;
};

class IdentityProvider final : public PanoramaProvider {
public:
    std::optional<Vec2> nearest(const Vec2& requested) const override { return requested; }
};

// Snaps requests onto a square lattice, mimicking discrete panorama spacing.
class GridProvider final : public PanoramaProvider {
public:
    explicit GridProvider(double step_m, Vec2 offset = {0.0, 0.0})
        : step_(step_m), offset_(offset) {
        require(step_m > 0.0, "camera/bad-grid", "grid step must be positive");
    }
    std::optional<Vec2> nearest(const Vec2& requested) const override {
        return Vec2{std::round((requested.x - offset_.x) / step_) * step_ + offset_.x,
                    std::round((requested.y - offset_.y) / step_) * step_ + offset_.y};
    }

private:
    double step_;
    Vec2 offset_;
};

class UnavailableProvider final : public PanoramaProvider {
public:
    std::optional<Vec2> nearest(const Vec2&) const override { return std::nullopt; }
};

struct PlannerParams {
    double tolerance_m = 0.5;
    double max_len_m = 50.0;
    double perp_tol_deg = 3.0;
    double camera_height_m = 2.5;
    double fov_margin = 1.1;
    double fov_min_deg = 10.0;
    double fov_max_deg = 120.0;
    int default_floors = 2;  // used when the register lacks a floor count
};

struct PlanRejection {
    std::string building_id;
    std::string stage;  // generalize | sightlines | filter | snap | refilter
    std::string reason;
};

inline geom::Ring generalize_footprint(const geom::Ring& polygon, double tolerance_m) {
    return geom::simplify_ring(polygon, tolerance_m);
}

inline std::vector<WallSegment> extract_walls(const geom::Ring& polygon,
                                              const std::string& building_id) {
    require(polygon.size() >= 3, "camera/degenerate", "polygon needs at least 3 vertices");
    const bool ccw = geom::signed_area(polygon) > 0.0;
    std::vector<WallSegment> walls;
    walls.reserve(polygon.size());
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[(i + 1) % polygon.size()];
        WallSegment w;
        w.building_id = building_id;
        char idx[8];
        std::snprintf(idx, sizeof idx, "%03zu", i);
        w.wall_id = building_id + "#w" + idx;
        w.a = a;
        w.b = b;
        w.midpoint = {(a.x + b.x) * 0.5, (a.y + b.y) * 0.5};
        w.width_m = geom::distance(a, b);
        const Vec2 d = geom::normalized(b - a);
        // Right-hand normal points outward on a CCW ring.
        w.outward_normal = ccw ? Vec2{d.y, -d.x} : Vec2{-d.y, d.x};
        walls.push_back(std::move(w));
    }
    return walls;
}

inline double incidence_from(const Vec2& midpoint, const Vec2& camera,
                             const Vec2& outward_normal) {
    const Vec2 dir = geom::normalized(camera - midpoint);
    const double c = std::clamp(std::abs(geom::dot(dir, outward_normal)), 0.0, 1.0);
    return std::acos(c) * 180.0 / M_PI;
}

// One candidate per wall: the globally closest point across all road
// polylines.
inline std::vector<Sightline> build_sightlines(const std::vector<WallSegment>& walls,
                                               const std::vector<ingest::RoadSegment>& roads) {
    require(!roads.empty(), "camera/no-roads", "at least one road segment is required");
    std::vector<Sightline> out;
    out.reserve(walls.size());
    for (const auto& wall : walls) {
        double best = std::numeric_limits<double>::infinity();
        Vec2 best_point;
        for (const auto& road : roads) {
            for (std::size_t i = 0; i + 1 < road.centerline.size(); ++i) {
                const auto proj = geom::project_on_segment(wall.midpoint, road.centerline[i],
                                                           road.centerline[i + 1]);
                if (proj.dist < best) {
                    best = proj.dist;
                    best_point = proj.point;
                }
            }
        }
        Sightline s;
        s.wall = wall;
        s.camera_pos = best_point;
        s.length_m = best;
        s.incidence_deg = best > 0.0 ? incidence_from(wall.midpoint, best_point, wall.outward_normal)
                                     : 90.0;  // degenerate zero-length line; filtered out later
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

// Open-segment vs closed-footprint test. The sightline's own contact with
// the wall does not count, so both ends are pulled in by a hair before
// testing.
inline bool segment_hits_polygon(const Vec2& from, const Vec2& to, const geom::Ring& poly) {
    const Vec2 dir = to - from;
    const double len = geom::norm(dir);
    if (len <= 0.0) return false;
    const double shrink = std::max(1e-9, len * 1e-9);
    const Vec2 u = geom::normalized(dir);
    const Vec2 p = from + u * shrink;
    const Vec2 q = to - u * shrink;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (geom::segments_intersect(p, q, poly[i], poly[(i + 1) % poly.size()])) return true;
    }
    const Vec2 mid = {(p.x + q.x) * 0.5, (p.y + q.y) * 0.5};
    return geom::point_in_ring(p, poly) || geom::point_in_ring(q, poly) ||
           geom::point_in_ring(mid, poly);
}

}  // namespace detail

enum class FilterVerdict { kept, too_long, not_perpendicular, obstructed, degenerate };

inline FilterVerdict classify_sightline(const Sightline& s,
                                        const std::vector<ingest::BuildingRecord>& all_buildings,
                                        double max_len_m, double perp_tol_deg) {
    if (s.length_m <= 0.0) return FilterVerdict::degenerate;
    if (s.length_m > max_len_m) return FilterVerdict::too_long;
    if (s.incidence_deg > perp_tol_deg) return FilterVerdict::not_perpendicular;
    for (const auto& b : all_buildings) {
        if (detail::segment_hits_polygon(s.wall.midpoint, s.camera_pos, b.footprint))
            return FilterVerdict::obstructed;
    }
    return FilterVerdict::kept;
}

inline std::vector<Sightline> filter_sightlines(
    const std::vector<Sightline>& sightlines,
    const std::vector<ingest::BuildingRecord>& all_buildings, double max_len_m = 50.0,
    double perp_tol_deg = 3.0) {
    std::vector<Sightline> out;
    for (const auto& s : sightlines)
        if (classify_sightline(s, all_buildings, max_len_m, perp_tol_deg) == FilterVerdict::kept)
            out.push_back(s);
    return out;
}

inline double heading_towards(const Vec2& from, const Vec2& to) {
    const double h = std::atan2(to.x - from.x, to.y - from.y) * 180.0 / M_PI;
    return std::fmod(h + 360.0, 360.0);
}

// Step 3d + 3e: shortest sightline per wall, then per-building dedup of
// integer-rounded headings (shortest wins, ties on length by wall id).
inline std::vector<Sightline> select_best(const std::vector<Sightline>& sightlines) {
    std::map<std::string, Sightline> per_wall;
    for (const auto& s : sightlines) {
        auto it = per_wall.find(s.wall.wall_id);
        if (it == per_wall.end() || s.length_m < it->second.length_m)
            per_wall.insert_or_assign(s.wall.wall_id, s);
    }
    std::map<std::pair<std::string, long>, Sightline> per_heading;
    for (const auto& [wall_id, s] : per_wall) {
        const long rounded =
            static_cast<long>(std::lround(heading_towards(s.camera_pos, s.wall.midpoint))) % 360;
        const auto key = std::make_pair(s.wall.building_id, rounded);
        auto it = per_heading.find(key);
        if (it == per_heading.end() || s.length_m < it->second.length_m ||
            (s.length_m == it->second.length_m && s.wall.wall_id < it->second.wall.wall_id))
            per_heading.insert_or_assign(key, s);
    }
    std::vector<Sightline> out;
    out.reserve(per_heading.size());
    for (const auto& [key, s] : per_heading) out.push_back(s);
    std::sort(out.begin(), out.end(),
              [](const Sightline& a, const Sightline& b) { return a.wall.wall_id < b.wall.wall_id; });
    return out;
}

// Aim at the facade's vertical midpoint; storey height is 3.0 m.
inline double compute_pitch(int floors, double distance_m, double camera_height_m = 2.5) {
    require(floors >= 1, "camera/bad-floors", "floors must be >= 1");
    require(distance_m > 0.0, "camera/bad-distance", "distance must be positive");
    const double building_height = floors * 3.0;
    return std::atan2(building_height * 0.5 - camera_height_m, distance_m) * 180.0 / M_PI;
}

inline double compute_fov(double wall_width_m, double distance_m, double margin = 1.1,
                          double min_deg = 10.0, double max_deg = 120.0) {
    require(wall_width_m > 0.0, "camera/bad-width", "wall width must be positive");
    require(distance_m > 0.0, "camera/bad-distance", "distance must be positive");
    const double raw = 2.0 * std::atan(wall_width_m / (2.0 * distance_m)) * 180.0 / M_PI;
    return std::clamp(raw * margin, min_deg, max_deg);
}

struct PlanResult {
    std::vector<CameraPoint> cameras;
    std::vector<PlanRejection> rejections;
};

inline PlanResult plan_cameras(const ingest::BuildingRecord& building,
                               const std::vector<ingest::RoadSegment>& roads,
                               const std::vector<ingest::BuildingRecord>& all_buildings,
                               const PanoramaProvider& provider, const PlannerParams& params,
                               const std::optional<ingest::LonLatAnchor>& anchor = std::nullopt) {
    PlanResult result;
    geom::Ring simplified;
    try {
        simplified = generalize_footprint(building.footprint, params.tolerance_m);
    } catch (const Error& e) {
        result.rejections.push_back({building.id, "generalize", e.what()});
        return result;
    }
    const auto walls = extract_walls(simplified, building.id);

    std::vector<Sightline> sightlines;
    try {
        sightlines = build_sightlines(walls, roads);
    } catch (const Error& e) {
        result.rejections.push_back({building.id, "sightlines", e.what()});
        return result;
    }

    std::size_t n_long = 0, n_oblique = 0, n_obstructed = 0, n_degenerate = 0;
    std::vector<Sightline> filtered;
    for (const auto& s : sightlines) {
        switch (classify_sightline(s, all_buildings, params.max_len_m, params.perp_tol_deg)) {
            case FilterVerdict::kept: filtered.push_back(s); break;
            case FilterVerdict::too_long: ++n_long; break;
            case FilterVerdict::not_perpendicular: ++n_oblique; break;
            case FilterVerdict::obstructed: ++n_obstructed; break;
            case FilterVerdict::degenerate: ++n_degenerate; break;
        }
    }
    if (filtered.empty()) {
        result.rejections.push_back(
            {building.id, "filter",
             "all sightlines removed (" + std::to_string(n_long) + " long, " +
                 std::to_string(n_oblique) + " oblique, " + std::to_string(n_obstructed) +
                 " obstructed, " + std::to_string(n_degenerate) + " degenerate)"});
        return result;
    }

    const auto selected = select_best(filtered);

    std::vector<Sightline> snapped;
    std::size_t n_unavailable = 0;
    for (const auto& s : selected) {
        const auto pos = provider.nearest(s.camera_pos);
        if (!pos) {
            ++n_unavailable;
            continue;
        }
        Sightline moved = s;
        moved.camera_pos = *pos;
        moved.length_m = geom::distance(s.wall.midpoint, *pos);
        moved.incidence_deg = moved.length_m > 0.0
                                  ? incidence_from(s.wall.midpoint, *pos, s.wall.outward_normal)
                                  : 90.0;
        snapped.push_back(std::move(moved));
    }
    if (snapped.empty()) {
        result.rejections.push_back(
            {building.id, "snap", "no panorama available for any selected sightline"});
        return result;
    }

    const auto refiltered =
        filter_sightlines(snapped, all_buildings, params.max_len_m, params.perp_tol_deg);
    if (refiltered.empty()) {
        result.rejections.push_back(
            {building.id, "refilter",
             "all snapped sightlines failed re-checks (" + std::to_string(n_unavailable) +
                 " had no panorama)"});
        return result;
    }

    const int floors = building.floors.value_or(params.default_floors);
    std::size_t index = 0;
    for (const auto& s : refiltered) {
        CameraPoint cp;
        cp.building_id = building.id;
        char idx[8];
        std::snprintf(idx, sizeof idx, "%02zu", index++);
        cp.camera_id = building.id + "#c" + idx;
        cp.wall_id = s.wall.wall_id;
        cp.position = s.camera_pos;
        if (anchor) cp.lonlat = anchor->to_lonlat(s.camera_pos);
        cp.heading_deg = heading_towards(s.camera_pos, s.wall.midpoint);
        cp.pitch_deg = compute_pitch(floors, s.length_m, params.camera_height_m);
        cp.fov_deg = compute_fov(s.wall.width_m, s.length_m, params.fov_margin, params.fov_min_deg,
                                 params.fov_max_deg);
        cp.sightline_length_m = s.length_m;
        cp.incidence_deg = s.incidence_deg;
        result.cameras.push_back(std::move(cp));
    }
    return result;
}

}  // namespace heritage::camera
