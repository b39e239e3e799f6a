#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "heritage/error.hpp"

// Planar geometry kernel. All coordinates are meters in a projected CRS;
// there is deliberately no geodesy here.
namespace heritage::geom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(b - a); }

inline Vec2 normalized(const Vec2& a) {
    const double n = norm(a);
    return n > 0.0 ? Vec2{a.x / n, a.y / n} : Vec2{0.0, 0.0};
}

// Open ring: vertices without a repeated closing point.
using Ring = std::vector<Vec2>;

inline double signed_area(const Ring& ring) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % ring.size()];
        acc += cross(a, b);
    }
    return 0.5 * acc;
}

// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    return distance(p, a + d * t);
}

// Closest point on segment [a, b] to p, with the clamped parameter.
struct SegmentProjection {
    Vec2 point;
    double t = 0.0;
    double dist = 0.0;
};

inline SegmentProjection project_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    const Vec2 q = a + d * t;
    return {q, t, distance(p, q)};
}

inline int orientation_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = cross(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

inline bool on_segment_collinear(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Inclusive segment intersection test (touching endpoints count).
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const int o1 = orientation_sign(p1, p2, q1);
    const int o2 = orientation_sign(p1, p2, q2);
    const int o3 = orientation_sign(q1, q2, p1);
    const int o4 = orientation_sign(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment_collinear(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment_collinear(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment_collinear(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment_collinear(q1, q2, p2)) return true;
    return false;
}

// Crossing-number containment test; points on the boundary are not "strictly inside".
inline bool point_in_ring(const Vec2& p, const Ring& ring) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

// A ring is simple when non-adjacent edges never meet and adjacent edges
// share exactly their common vertex.
inline bool ring_is_simple(const Ring& ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (ring[i] == ring[(i + 1) % n]) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a1 = ring[i];
        const Vec2& a2 = ring[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const Vec2& b1 = ring[j];
            const Vec2& b2 = ring[(j + 1) % n];
            if (adjacent) {
                // Shared endpoint is fine; any further overlap (collinear
                // spike) is not.
                const Vec2& shared = (j == i + 1) ? a2 : a1;
                const Vec2& afar = (j == i + 1) ? a1 : a2;
                const Vec2& bfar = (j == i + 1) ? b2 : b1;
                if (orientation_sign(shared, afar, bfar) == 0 &&
                    dot(afar - shared, bfar - shared) > 0.0)
                    return false;
                continue;
            }
            if (segments_intersect(a1, a2, b1, b2)) return false;
        }
    }
    return true;
}

namespace detail {

// Recursive half of Douglas-Peucker on an open chain; keep[] flags survivors.
inline void douglas_peucker_mark(const Ring& pts, std::size_t lo, std::size_t hi,
                                 double tolerance, std::vector<bool>& keep) {
    if (hi <= lo + 1) return;
    double max_dev = -1.0;
    std::size_t argmax = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const double dev = point_segment_distance(pts[i], pts[lo], pts[hi]);
        if (dev > max_dev) {
            max_dev = dev;
            argmax = i;
        }
    }
    if (max_dev > tolerance) {
        keep[argmax] = true;
        douglas_peucker_mark(pts, lo, argmax, tolerance, keep);
        douglas_peucker_mark(pts, argmax, hi, tolerance, keep);
    }
}

inline Ring simplify_once(const Ring& ring, double tolerance) {
    const std::size_t n = ring.size();
    // Anchor the ring at vertex 0 and the vertex farthest from it, then
    // simplify the two open chains independently.
    std::size_t far_idx = 1;
    double far_dist = -1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = distance(ring[0], ring[i]);
        if (d > far_dist) {
            far_dist = d;
            far_idx = i;
        }
    }
    // Work on the closed chain v0..v_far..v0.
    std::vector<Vec2> chain;
    chain.reserve(n + 1);
    for (std::size_t i = 0; i <= far_idx; ++i) chain.push_back(ring[i]);
    std::vector<Vec2> chain2;
    for (std::size_t i = far_idx; i < n; ++i) chain2.push_back(ring[i]);
    chain2.push_back(ring[0]);

    std::vector<bool> keep1(chain.size(), false), keep2(chain2.size(), false);
    keep1.front() = keep1.back() = true;
    keep2.front() = keep2.back() = true;
    douglas_peucker_mark(chain, 0, chain.size() - 1, tolerance, keep1);
    douglas_peucker_mark(chain2, 0, chain2.size() - 1, tolerance, keep2);

    Ring out;
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (keep1[i]) out.push_back(chain[i]);
    for (std::size_t i = 1; i + 1 < chain2.size(); ++i)
        if (keep2[i]) out.push_back(chain2[i]);

    // Cleanup: drop vertices (anchors included) that sit within tolerance of
    // the chord joining their neighbours. Iterate until stable.
    bool changed = true;
    while (changed && out.size() > 3) {
        changed = false;
        for (std::size_t i = 0; i < out.size() && out.size() > 3; ++i) {
            const Vec2& prev = out[(i + out.size() - 1) % out.size()];
            const Vec2& next = out[(i + 1) % out.size()];
            if (point_segment_distance(out[i], prev, next) <= tolerance) {
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    return out;
}

}  // namespace detail

// Ring simplification. Tolerance 0 returns the input unchanged. Throws when
// the ring would collapse below 3 vertices.
inline Ring simplify_ring(const Ring& ring, double tolerance) {
    require(tolerance >= 0.0, "geometry/bad-tolerance", "simplification tolerance must be >= 0");
    require(ring.size() >= 3, "geometry/degenerate", "ring needs at least 3 vertices");
    if (tolerance == 0.0) return ring;

    double tol = tolerance;
    for (;;) {
        Ring out = detail::simplify_once(ring, tol);
        if (out.size() < 3)
            throw Error("geometry/collapsed", "simplification collapsed ring below 3 vertices");
        if (ring_is_simple(out)) return out;
        // A self-intersecting result can only come from an aggressive
        // tolerance on a concave ring; retry closer to the input.
        tol *= 0.5;
        if (tol < 1e-12) return ring;
    }
}

}  // namespace heritage::geom
