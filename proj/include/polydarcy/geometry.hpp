#pragma once

#include <cmath>

namespace polydarcy {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    Point2 operator/(double s) const { return {x / s, y / s}; }
    bool operator==(const Point2&) const = default;
};

inline Point2 operator*(double s, Point2 p) { return p * s; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

// 90-degree rotations; for a counter-clockwise boundary loop the outward
// normal is the tangent rotated by -90 degrees.
inline Point2 rot90ccw(Point2 p) { return {-p.y, p.x}; }
inline Point2 rot90cw(Point2 p) { return {p.y, -p.x}; }

inline Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

struct Rect {
    Point2 lo;
    Point2 hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double area() const { return width() * height(); }
    bool contains(Point2 p, double tol = 0.0) const {
        return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol;
    }
    bool strictly_contains(Point2 p, double tol = 0.0) const {
        return p.x > lo.x + tol && p.x < hi.x - tol && p.y > lo.y + tol && p.y < hi.y - tol;
    }
};

// Distance from p to the closed segment [a, b].
inline double segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 d = b - a;
    const double len2 = dot(d, d);
    if (len2 == 0.0)
        return distance(p, a);
    double t = dot(p - a, d) / len2;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return distance(p, a + t * d);
}

inline bool on_segment(Point2 p, Point2 a, Point2 b, double tol) {
    return segment_distance(p, a, b) <= tol;
}

} // namespace polydarcy
