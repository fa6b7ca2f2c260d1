#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace kakeya {

struct Vec2 {
    double x = 0, y = 0;

    Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 rotate(Vec2 a, double angle)
{
    double c = std::cos(angle), s = std::sin(angle);
    return {c * a.x - s * a.y, s * a.x + c * a.y};
}
inline Vec2 rotate_about(Vec2 p, Vec2 center, double angle) { return center + rotate(p - center, angle); }

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

// Rotation of v about the unit axis k by angle (right hand rule).
Vec3 rotate(const Vec3& v, const Vec3& k, double angle);

// Great circle distance between two unit vectors.
double arc(const Vec3& a, const Vec3& b);

struct Interval {
    double lo = 0, hi = 0;

    Interval() = default;
    Interval(double lo_, double hi_);

    double length() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
};

// Finite union of closed intervals kept sorted and disjoint.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::span<const Interval> parts);

    void add(Interval iv);
    double measure() const;
    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }

private:
    void normalize();
    std::vector<Interval> parts_;
};

double union_measure(std::span<const Interval> intervals);

// Same as union_measure but reorders the argument in place; used on hot paths.
double union_measure_inplace(std::vector<Interval>& intervals);

struct AxisRect {
    double a0 = 0, a1 = 0, b0 = 0, b1 = 0;

    AxisRect() = default;
    AxisRect(double a0_, double a1_, double b0_, double b1_);

    double width() const { return a1 - a0; }
    double height() const { return b1 - b0; }
    double area() const { return width() * height(); }
    std::array<Vec2, 4> vertices() const;
};

struct Parallelogram {
    Vec2 anchor, edge_u, edge_v;

    Parallelogram() = default;
    Parallelogram(Vec2 anchor_, Vec2 u, Vec2 v);

    std::array<Vec2, 4> vertices() const;
    double area() const { return std::abs(cross(edge_u, edge_v)); }

    // Only meaningful for parallelograms with a horizontal bottom edge.
    double width() const { return edge_u.x; }
    double height() const { return edge_v.y; }
    double side_tangent() const { return edge_v.x / edge_v.y; }
    double left_at(double b) const;
    double right_at(double b) const { return left_at(b) + edge_u.x; }
    bool contains(Vec2 p, double tol = 0) const;
};

Interval project_set(Vec2 direction, std::span<const Vec2> points);
Interval project_set(Vec2 direction, const AxisRect& r);
Interval project_set(Vec2 direction, const Parallelogram& p);
Interval project_set(const Vec3& direction, std::span<const Vec3> points);

// Unsigned area of a simple polygon. Throws std::invalid_argument when two
// non-adjacent edges cross.
double polygon_area(std::span<const Vec2> vertices);

bool segments_cross(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1);

}
