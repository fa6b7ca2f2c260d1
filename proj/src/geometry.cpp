#include "kakeya/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kakeya {

Vec3 rotate(const Vec3& v, const Vec3& k, double angle)
{
    double c = std::cos(angle), s = std::sin(angle);
    return v * c + cross(k, v) * s + k * (dot(k, v) * (1 - c));
}

double arc(const Vec3& a, const Vec3& b)
{
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_)
{
    if (!(lo <= hi)) {
        std::ostringstream os;
        os << "interval with lo > hi: [" << lo << ", " << hi << "]";
        throw std::invalid_argument(os.str());
    }
}

IntervalSet::IntervalSet(std::span<const Interval> parts) : parts_(parts.begin(), parts.end())
{
    normalize();
}

void IntervalSet::add(Interval iv)
{
    parts_.push_back(iv);
    normalize();
}

void IntervalSet::normalize()
{
    std::sort(parts_.begin(), parts_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (const Interval& iv : parts_) {
        if (!merged.empty() && iv.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    parts_.swap(merged);
}

double IntervalSet::measure() const
{
    double total = 0;
    for (const Interval& iv : parts_)
        total += iv.length();
    return total;
}

namespace {

double sweep_sorted(const Interval* v, size_t n)
{
    if (n == 0)
        return 0;
    double total = 0, lo = v[0].lo, hi = v[0].hi;
    for (size_t i = 1; i < n; ++i) {
        if (v[i].lo > hi) {
            total += hi - lo;
            lo = v[i].lo;
            hi = v[i].hi;
        } else if (v[i].hi > hi) {
            hi = v[i].hi;
        }
    }
    return total + (hi - lo);
}

// Bucket by left endpoint, then insertion sort each bucket. Inputs here are
// spread fairly evenly so buckets stay tiny.
void bucket_sort(std::vector<Interval>& v)
{
    size_t n = v.size();
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const Interval& iv : v) {
        mn = std::min(mn, iv.lo);
        mx = std::max(mx, iv.lo);
    }
    if (!(mx > mn)) {
        return;
    }
    size_t nb = n;
    double scale = (nb - 1) / (mx - mn);
    thread_local std::vector<uint32_t> start;
    thread_local std::vector<uint32_t> slot;
    thread_local std::vector<Interval> out;
    start.assign(nb + 1, 0);
    slot.resize(n);
    for (size_t i = 0; i < n; ++i) {
        size_t b = static_cast<size_t>((v[i].lo - mn) * scale);
        if (b >= nb)
            b = nb - 1;
        slot[i] = static_cast<uint32_t>(b);
        ++start[b + 1];
    }
    for (size_t b = 0; b < nb; ++b)
        start[b + 1] += start[b];
    out.resize(n);
    for (size_t i = 0; i < n; ++i)
        out[start[slot[i]]++] = v[i];
    size_t begin = 0;
    for (size_t b = 0; b < nb; ++b) {
        size_t end = start[b];
        size_t len = end - begin;
        if (len > 32) {
            std::sort(out.begin() + begin, out.begin() + end,
                      [](const Interval& a, const Interval& c) { return a.lo < c.lo; });
        } else {
            for (size_t i = begin + 1; i < end; ++i) {
                Interval key = out[i];
                size_t j = i;
                while (j > begin && out[j - 1].lo > key.lo) {
                    out[j] = out[j - 1];
                    --j;
                }
                out[j] = key;
            }
        }
        begin = end;
    }
    v.swap(out);
}

}

double union_measure_inplace(std::vector<Interval>& v)
{
    if (v.size() > 2048)
        bucket_sort(v);
    else
        std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    return sweep_sorted(v.data(), v.size());
}

double union_measure(std::span<const Interval> intervals)
{
    std::vector<Interval> v(intervals.begin(), intervals.end());
    return union_measure_inplace(v);
}

AxisRect::AxisRect(double a0_, double a1_, double b0_, double b1_) : a0(a0_), a1(a1_), b0(b0_), b1(b1_)
{
    if (!(a0 < a1) || !(b0 < b1)) {
        std::ostringstream os;
        os << "degenerate rectangle [" << a0 << ", " << a1 << "] x [" << b0 << ", " << b1 << "]";
        throw std::invalid_argument(os.str());
    }
}

std::array<Vec2, 4> AxisRect::vertices() const
{
    return {Vec2{a0, b0}, Vec2{a1, b0}, Vec2{a1, b1}, Vec2{a0, b1}};
}

Parallelogram::Parallelogram(Vec2 anchor_, Vec2 u, Vec2 v) : anchor(anchor_), edge_u(u), edge_v(v)
{
    double scale = norm(u) * norm(v);
    if (!(scale > 0) || std::abs(cross(u, v)) <= 1e-14 * scale)
        throw std::invalid_argument("degenerate parallelogram: edges are parallel or zero");
}

std::array<Vec2, 4> Parallelogram::vertices() const
{
    return {anchor, anchor + edge_u, anchor + edge_u + edge_v, anchor + edge_v};
}

double Parallelogram::left_at(double b) const
{
    return anchor.x + (b - anchor.y) * edge_v.x / edge_v.y;
}

bool Parallelogram::contains(Vec2 p, double tol) const
{
    double d = cross(edge_u, edge_v);
    Vec2 r = p - anchor;
    double s = cross(r, edge_v) / d;
    double t = cross(edge_u, r) / d;
    return s >= -tol && s <= 1 + tol && t >= -tol && t <= 1 + tol;
}

Interval project_set(Vec2 direction, std::span<const Vec2> points)
{
    if (points.empty())
        throw std::invalid_argument("projection of an empty point set");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Vec2 p : points) {
        double s = dot(direction, p);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

Interval project_set(Vec2 direction, const AxisRect& r)
{
    auto v = r.vertices();
    return project_set(direction, std::span<const Vec2>(v));
}

Interval project_set(Vec2 direction, const Parallelogram& p)
{
    auto v = p.vertices();
    return project_set(direction, std::span<const Vec2>(v));
}

Interval project_set(const Vec3& direction, std::span<const Vec3> points)
{
    if (points.empty())
        throw std::invalid_argument("projection of an empty point set");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec3& p : points) {
        double s = dot(direction, p);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

bool segments_cross(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1)
{
    double d1 = cross(p1 - p0, q0 - p0);
    double d2 = cross(p1 - p0, q1 - p0);
    double d3 = cross(q1 - q0, p0 - q0);
    double d4 = cross(q1 - q0, p1 - q0);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double polygon_area(std::span<const Vec2> v)
{
    size_t n = v.size();
    if (n < 3)
        return 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1)
                continue;
            if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
                std::ostringstream os;
                os << "self-intersecting polygon: edge " << i << " crosses edge " << j;
                throw std::invalid_argument(os.str());
            }
        }
    }
    double s = 0;
    for (size_t i = 0; i < n; ++i)
        s += cross(v[i], v[(i + 1) % n]);
    return std::abs(s) / 2;
}

}
