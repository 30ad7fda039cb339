#pragma once

/// 2D polygon footprints, rigid placement, and the collision-free indicator.
/// Polygons are simple (validated once at construction), counter-clockwise,
/// and carry a cached bounding radius about the body origin. Boundary contact
/// counts as collision throughout.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "collprob/errors.hpp"
#include "collprob/linalg.hpp"

namespace collprob {

/// Planar pose. theta is an unnormalized real; differences of yaws are
/// meaningful and no wraparound is ever applied.
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

namespace detail {

inline double signed_area(const std::vector<Vec2>& v) {
    double a = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % n];
        a += p.cross(q);
    }
    return 0.5 * a;
}

}  // namespace detail

inline bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);

/// Agent footprint: body-frame vertex list plus cached bounding radius.
class Polygon2D {
public:
    /// Validates simplicity and vertex count; corrects clockwise input by
    /// reversal. Throws ValidationError on degenerate or self-intersecting
    /// input.
    explicit Polygon2D(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
        validate_and_normalize();
        bounding_radius_ = 0.0;
        for (const Vec2& v : vertices_) bounding_radius_ = std::max(bounding_radius_, v.norm());
    }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    double bounding_radius() const { return bounding_radius_; }

    /// Axis-aligned rectangle centered on the body origin.
    static Polygon2D rectangle(double length, double width) {
        const double hx = 0.5 * length, hy = 0.5 * width;
        return Polygon2D({{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}});
    }

private:
    void validate_and_normalize() {
        const std::size_t n = vertices_.size();
        if (n < 3) throw ValidationError("polygon: need at least 3 vertices");
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 d = vertices_[(i + 1) % n] - vertices_[i];
            if (d.x == 0.0 && d.y == 0.0)
                throw ValidationError("polygon: repeated vertex at index " + std::to_string(i));
        }
        const double area = detail::signed_area(vertices_);
        if (area == 0.0) throw ValidationError("polygon: zero signed area");
        if (area < 0.0) std::reverse(vertices_.begin(), vertices_.end());

        // Non-adjacent edge pairs must not touch; adjacent edges must not fold
        // back onto each other.
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a1 = vertices_[i];
            const Vec2& a2 = vertices_[(i + 1) % n];
            for (std::size_t j = i + 1; j < n; ++j) {
                const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                if (adjacent) continue;
                const Vec2& b1 = vertices_[j];
                const Vec2& b2 = vertices_[(j + 1) % n];
                if (segments_intersect(a1, a2, b1, b2))
                    throw ValidationError("polygon: edges " + std::to_string(i) + " and " +
                                          std::to_string(j) + " intersect");
            }
            const Vec2 prev = a2 - a1;
            const Vec2 next = vertices_[(i + 2) % n] - a2;
            if (prev.cross(next) == 0.0 && prev.dot(next) < 0.0)
                throw ValidationError("polygon: spike at vertex " + std::to_string((i + 1) % n));
        }
    }

    std::vector<Vec2> vertices_;
    double bounding_radius_ = 0.0;
};

/// Rigid placement: each body-frame vertex v maps to R(theta) v + (x, y).
inline std::vector<Vec2> place(const Polygon2D& poly, const Pose2D& pose) {
    std::vector<Vec2> out;
    out.reserve(poly.vertices().size());
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    for (const Vec2& v : poly.vertices())
        out.push_back({c * v.x - s * v.y + pose.x, s * v.x + c * v.y + pose.y});
    return out;
}

namespace detail {

/// Allocation-free variant of place() for hot loops.
inline void place_into(const std::vector<Vec2>& body, const Pose2D& pose,
                       std::vector<Vec2>& out) {
    out.resize(body.size());
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    for (std::size_t i = 0; i < body.size(); ++i) {
        const Vec2& v = body[i];
        out[i] = {c * v.x - s * v.y + pose.x, s * v.x + c * v.y + pose.y};
    }
}

inline int orient(const Vec2& p, const Vec2& q, const Vec2& r) {
    const double d = (q - p).cross(r - p);
    return (d > 0.0) - (d < 0.0);
}

/// Assumes p, q, r collinear: is r within the box spanned by p,q?
inline bool collinear_on_segment(const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
}

inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 == 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

}  // namespace detail

/// Closed-segment intersection; collinear overlap counts.
inline bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
    const int d1 = detail::orient(b1, b2, a1);
    const int d2 = detail::orient(b1, b2, a2);
    const int d3 = detail::orient(a1, a2, b1);
    const int d4 = detail::orient(a1, a2, b2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && detail::collinear_on_segment(b1, b2, a1)) return true;
    if (d2 == 0 && detail::collinear_on_segment(b1, b2, a2)) return true;
    if (d3 == 0 && detail::collinear_on_segment(a1, a2, b1)) return true;
    if (d4 == 0 && detail::collinear_on_segment(a1, a2, b2)) return true;
    return false;
}

/// Even-odd ray cast with boundary-counts-as-inside. Vertex-grazing ties are
/// broken by deterministically shifting the test ordinate by +1e-12 until no
/// vertex lies exactly on the ray.
inline bool point_in_polygon(const Vec2& pt, const std::vector<Vec2>& verts) {
    const std::size_t n = verts.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (detail::dist_point_segment(pt, verts[i], verts[(i + 1) % n]) <= 1e-12) return true;
    }
    double py = pt.y;
    bool grazing = true;
    while (grazing) {
        grazing = false;
        for (const Vec2& v : verts) {
            if (v.y == py) {
                py += 1e-12;
                grazing = true;
                break;
            }
        }
    }
    bool inside = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = verts[i];
        const Vec2& b = verts[(i + 1) % n];
        if ((a.y > py) != (b.y > py)) {
            const double x_int = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
            if (x_int > pt.x) inside = !inside;
        }
    }
    return inside;
}

/// True iff the polygon areas overlap, boundaries touch, or one contains the
/// other: any edge pair intersects, or either first vertex is inside the
/// other polygon.
inline bool polygons_intersect(const std::vector<Vec2>& pa, const std::vector<Vec2>& pb) {
    for (std::size_t i = 0, na = pa.size(); i < na; ++i) {
        const Vec2& a1 = pa[i];
        const Vec2& a2 = pa[(i + 1) % na];
        for (std::size_t j = 0, nb = pb.size(); j < nb; ++j) {
            if (segments_intersect(a1, a2, pb[j], pb[(j + 1) % nb])) return true;
        }
    }
    return point_in_polygon(pa[0], pb) || point_in_polygon(pb[0], pa);
}

/// Collision-free indicator on a relative pose. Agent 2 is anchored at
/// anchor_pose2; agent 1 is placed at anchor_pose2 + relative_pose
/// (componentwise). Returns 1 if collision-free, 0 otherwise; boundary
/// contact is a collision.
inline int collision_indicator(const Polygon2D& poly1, const Polygon2D& poly2,
                               const Pose2D& relative_pose, const Pose2D& anchor_pose2) {
    const Pose2D pose1{anchor_pose2.x + relative_pose.x, anchor_pose2.y + relative_pose.y,
                       anchor_pose2.theta + relative_pose.theta};
    const std::vector<Vec2> w1 = place(poly1, pose1);
    const std::vector<Vec2> w2 = place(poly2, anchor_pose2);
    return polygons_intersect(w1, w2) ? 0 : 1;
}

}  // namespace collprob
