#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace lfpp {

/// Tolerance for all incidence predicates on rotated rectangles.
inline constexpr double kGeomTol = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Segment {
    Vec2 a, b;

    Vec2 dir() const { return b - a; }
    double length() const { return dir().norm(); }
    Vec2 point_at(double t) const { return a + dir() * t; }
};

inline double dist_point_segment(Vec2 p, const Segment& s) {
    const Vec2 d = s.dir();
    const double l2 = d.dot(d);
    if (l2 == 0.0) return (p - s.a).norm();
    const double t = std::clamp((p - s.a).dot(d) / l2, 0.0, 1.0);
    return (p - s.point_at(t)).norm();
}

/// Minimum distance between two segments (0 if they intersect).
inline double dist_segment_segment(const Segment& s, const Segment& t) {
    const Vec2 d1 = s.dir(), d2 = t.dir(), r = t.a - s.a;
    const double c1 = d1.cross(d2);
    if (std::abs(c1) > 0.0) {
        const double u = r.cross(d2) / c1;
        const double v = r.cross(d1) / c1;
        if (u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0) return 0.0;
    }
    return std::min(std::min(dist_point_segment(t.a, s), dist_point_segment(t.b, s)),
                    std::min(dist_point_segment(s.a, t), dist_point_segment(s.b, t)));
}

inline bool segments_touch(const Segment& s, const Segment& t, double tol = kGeomTol) {
    return dist_segment_segment(s, t) <= tol;
}

/// Axis-aligned rectangle [lo.x, hi.x] x [lo.y, hi.y].
struct Rect {
    Vec2 lo, hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    Vec2 center() const { return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2}; }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol &&
               p.y <= hi.y + tol;
    }
    Rect inflated(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
};

/// Rectangle with arbitrary orientation: `center`, unit `axis` along the
/// longer dimension, `length` >= `width`.  Translated/rotated copies of
/// the dyadic reference rectangles are represented this way.
struct OrientedRect {
    Vec2 center;
    Vec2 axis;  // unit vector along the length
    double length = 0.0;
    double width = 0.0;

    static OrientedRect axis_aligned(const Rect& r) {
        OrientedRect o;
        o.center = r.center();
        if (r.width() >= r.height()) {
            o.axis = {1.0, 0.0};
            o.length = r.width();
            o.width = r.height();
        } else {
            o.axis = {0.0, 1.0};
            o.length = r.height();
            o.width = r.width();
        }
        return o;
    }

    Vec2 side() const { return axis.perp(); }

    /// Map local coordinates (u along axis in [-L/2, L/2], v across) to world.
    Vec2 to_world(double u, double v) const {
        return center + axis * u + side() * v;
    }

    std::array<Vec2, 4> corners() const {
        const double hu = length / 2, hv = width / 2;
        return {to_world(-hu, -hv), to_world(hu, -hv), to_world(hu, hv),
                to_world(-hu, hv)};
    }

    /// Shorter boundary at the axis-negative (end = 0) / positive (end = 1) end.
    Segment short_side(int end) const {
        const double u = (end == 0) ? -length / 2 : length / 2;
        return {to_world(u, -width / 2), to_world(u, width / 2)};
    }

    /// Longer boundary at the side-negative (which = 0) / positive (which = 1) side.
    Segment long_side(int which) const {
        const double v = (which == 0) ? -width / 2 : width / 2;
        return {to_world(-length / 2, v), to_world(length / 2, v)};
    }

    Segment midline() const {
        return {to_world(-length / 2, 0.0), to_world(length / 2, 0.0)};
    }

    bool contains(Vec2 p, double tol = kGeomTol) const {
        const Vec2 d = p - center;
        return std::abs(d.dot(axis)) <= length / 2 + tol &&
               std::abs(d.dot(side())) <= width / 2 + tol;
    }

    Rect bounding_box() const {
        const auto cs = corners();
        Rect b{cs[0], cs[0]};
        for (const auto& c : cs) {
            b.lo.x = std::min(b.lo.x, c.x);
            b.lo.y = std::min(b.lo.y, c.y);
            b.hi.x = std::max(b.hi.x, c.x);
            b.hi.y = std::max(b.hi.y, c.y);
        }
        return b;
    }

    /// Sub-rectangle spanning [u0, u1] along the axis (full width).
    OrientedRect slice(double u0, double u1) const {
        OrientedRect o = *this;
        o.center = to_world((u0 + u1) / 2, 0.0);
        o.length = u1 - u0;
        return o;
    }
};

inline bool segment_intersects_segment(const Segment& s, const Segment& t,
                                       double tol = kGeomTol) {
    return dist_segment_segment(s, t) <= tol;
}

}  // namespace lfpp
