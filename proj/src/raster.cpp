#include "kakeya/motion.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace kakeya {

namespace {

// Cell centers sit at irrational fractions of the unit grid so that segments
// placed at round coordinates are not systematically missed or hit.
constexpr double grid_shift_x = 0.3183098861837907;
constexpr double grid_shift_y = 0.6180339887498949;

int64_t floor_int(double v)
{
    auto i = static_cast<int64_t>(v);
    return i - (v < static_cast<double>(i));
}

int64_t ceil_int(double v)
{
    auto i = static_cast<int64_t>(v);
    return i + (v > static_cast<double>(i));
}

// Monotone polygonal chain evaluated at increasing x.
class Chain {
public:
    Chain(const Vec2* pts, size_t n) : pts_(pts), n_(n) { load(); }

    double at(double x)
    {
        while (e_ + 2 < n_ && pts_[e_ + 1].x < x) {
            ++e_;
            load();
        }
        return y0_ + slope_ * (x - x0_);
    }

private:
    void load()
    {
        Vec2 a = pts_[e_], b = pts_[e_ + 1];
        double dx = b.x - a.x;
        x0_ = a.x;
        y0_ = a.y;
        slope_ = dx > 0 ? (b.y - a.y) / dx : 0;
    }

    const Vec2* pts_;
    size_t n_, e_ = 0;
    double x0_ = 0, y0_ = 0, slope_ = 0;
};

}

Raster::Raster(double resolution) : res_(resolution)
{
    if (!(resolution > 0))
        throw std::invalid_argument("raster resolution must be positive");
}

void Raster::clear()
{
    tiles_.clear();
    last_ = nullptr;
    last_key_ = ~uint64_t(0);
}

Raster::Tile& Raster::tile(int64_t ti, int64_t tj)
{
    uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(ti)) << 32) | static_cast<uint32_t>(tj);
    if (key != last_key_) {
        last_ = &tiles_[key];
        last_key_ = key;
    }
    return *last_;
}

void Raster::mark_run(int64_t i, int64_t j0, int64_t j1, bool transposed)
{
    if (!transposed) {
        int64_t ti = i >> 6;
        int ci = static_cast<int>(i & 63);
        for (int64_t tj = j0 >> 6; tj <= (j1 >> 6); ++tj) {
            int lo = tj == (j0 >> 6) ? static_cast<int>(j0 & 63) : 0;
            int hi = tj == (j1 >> 6) ? static_cast<int>(j1 & 63) : 63;
            uint64_t mask = (hi == 63 ? ~uint64_t(0) : ((uint64_t(1) << (hi + 1)) - 1)) & ~((uint64_t(1) << lo) - 1);
            tile(ti, tj).col[ci] |= mask;
        }
    } else {
        int64_t tj = i >> 6;
        uint64_t bit = uint64_t(1) << (i & 63);
        for (int64_t j = j0; j <= j1; ++j)
            tile(j >> 6, tj).col[j & 63] |= bit;
    }
}

uint64_t Raster::count() const
{
    uint64_t n = 0;
    for (const auto& kv : tiles_)
        for (uint64_t w : kv.second.col)
            n += std::popcount(w);
    return n;
}

uint64_t Raster::boundary_count() const
{
    static const Tile empty{};
    auto find = [this](int64_t ti, int64_t tj) -> const Tile& {
        uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(ti)) << 32) | static_cast<uint32_t>(tj);
        auto it = tiles_.find(key);
        return it == tiles_.end() ? empty : it->second;
    };
    uint64_t n = 0;
    for (const auto& [key, t] : tiles_) {
        auto ti = static_cast<int64_t>(static_cast<int32_t>(key >> 32));
        auto tj = static_cast<int64_t>(static_cast<int32_t>(key & 0xffffffffu));
        const Tile& west = find(ti - 1, tj);
        const Tile& east = find(ti + 1, tj);
        const Tile& south = find(ti, tj - 1);
        const Tile& north = find(ti, tj + 1);
        for (int c = 0; c < 64; ++c) {
            uint64_t w = t.col[c];
            if (!w)
                continue;
            uint64_t left = c > 0 ? t.col[c - 1] : west.col[63];
            uint64_t right = c < 63 ? t.col[c + 1] : east.col[0];
            uint64_t below = (w << 1) | (south.col[c] >> 63);
            uint64_t above = (w >> 1) | (north.col[c] << 63);
            n += std::popcount(w & ~(left & right & below & above));
        }
    }
    return n;
}

void Raster::fill_convex(std::span<const Vec2> poly)
{
    size_t n = poly.size();
    if (n < 3 || n > 16)
        return;
    double xmin = poly[0].x, xmax = xmin, ymin = poly[0].y, ymax = ymin;
    for (size_t k = 0; k < n; ++k) {
        xmin = std::min(xmin, poly[k].x);
        xmax = std::max(xmax, poly[k].x);
        ymin = std::min(ymin, poly[k].y);
        ymax = std::max(ymax, poly[k].y);
    }
    bool transposed = (ymax - ymin) > (xmax - xmin);
    Vec2 pts[16];
    double signed_area = 0;
    for (size_t k = 0; k < n; ++k) {
        Vec2 p = poly[k] * res_ + Vec2{grid_shift_x - 0.5, grid_shift_y - 0.5};
        pts[k] = transposed ? Vec2{p.y, p.x} : p;
    }
    for (size_t k = 0; k < n; ++k)
        signed_area += cross(pts[k], pts[(k + 1) % n]);
    if (signed_area == 0)
        return;
    if (signed_area < 0)
        std::reverse(pts, pts + n);

    size_t imin = 0, imax = 0;
    for (size_t k = 1; k < n; ++k) {
        if (pts[k].x < pts[imin].x)
            imin = k;
        if (pts[k].x > pts[imax].x)
            imax = k;
    }
    // Counter-clockwise from the leftmost vertex walks the lower chain.
    Vec2 lower[17], upper[17];
    size_t nl = 0, nu = 0;
    for (size_t k = imin;; k = (k + 1) % n) {
        lower[nl++] = pts[k];
        if (k == imax)
            break;
    }
    for (size_t k = imin;; k = (k + n - 1) % n) {
        upper[nu++] = pts[k];
        if (k == imax)
            break;
    }

    int64_t i0 = ceil_int(pts[imin].x);
    int64_t i1 = floor_int(pts[imax].x);
    Chain lo_chain(lower, nl), hi_chain(upper, nu);
    for (int64_t i = i0; i <= i1; ++i) {
        double x = static_cast<double>(i);
        int64_t jlo = ceil_int(lo_chain.at(x));
        int64_t jhi = floor_int(hi_chain.at(x));
        if (jlo <= jhi)
            mark_run(i, jlo, jhi, transposed);
    }
}

namespace {

Vec2 line_intersection(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1)
{
    Vec2 r = p1 - p0, s = q1 - q0;
    double t = cross(q0 - p0, s) / cross(r, s);
    return p0 + r * t;
}

}

void Raster::fill_quad(const SegmentPose& a, const SegmentPose& b)
{
    if (segments_cross(a.p, a.q, b.p, b.q)) {
        Vec2 x = line_intersection(a.p, a.q, b.p, b.q);
        Vec2 t1[3] = {a.p, x, b.p};
        Vec2 t2[3] = {a.q, x, b.q};
        fill_convex(t1);
        fill_convex(t2);
        return;
    }
    // Convex hull of the four corners (monotone chain).
    Vec2 pts[4] = {a.p, a.q, b.q, b.p};
    std::sort(pts, pts + 4, [](Vec2 l, Vec2 r) { return l.x < r.x || (l.x == r.x && l.y < r.y); });
    Vec2 hull[8];
    int k = 0;
    for (int i = 0; i < 4; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
            --k;
        hull[k++] = pts[i];
    }
    for (int i = 2, t = k + 1; i >= 0; --i) {
        while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
            --k;
        hull[k++] = pts[i];
    }
    fill_convex(std::span<const Vec2>(hull, k - 1));
}

}
