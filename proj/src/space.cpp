#include "kakeya/space.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/stage.hpp"

#include <algorithm>
#include <bit>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace kakeya {

namespace {

constexpr double pi = std::numbers::pi;

bool is_unit(const Vec3& v, double tol)
{
    return std::abs(norm(v) - 1) <= tol;
}

// Angle of the rotation about unit axis k carrying the component of `from`
// perpendicular to k onto that of `to`.
double turn_angle(const Vec3& k, const Vec3& from, const Vec3& to)
{
    Vec3 a = from - k * dot(from, k);
    Vec3 b = to - k * dot(to, k);
    return std::atan2(dot(k, cross(a, b)), dot(a, b));
}

Vec3 unit_perpendicular(const Vec3& d)
{
    double ax = std::abs(d.x), ay = std::abs(d.y), az = std::abs(d.z);
    Vec3 e = (ax <= ay && ax <= az) ? Vec3{1, 0, 0} : (ay <= az ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    return normalized(cross(d, e));
}

Vec3 random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    for (;;) {
        Vec3 v{g(rng), g(rng), g(rng)};
        double n = norm(v);
        if (n > 1e-6)
            return v / n;
    }
}

}

// ---- needles ----

void SphereConfig::validate(double tol) const
{
    for (const Vec3* v : {&n1, &n2, &p1, &p2})
        if (!is_unit(*v, tol))
            throw std::invalid_argument("sphere configuration vectors must be unit");
    if (std::abs(arc(n1, n2) - arc(p1, p2)) > 1e-9)
        throw std::invalid_argument("arc(n1, n2) differs from arc(p1, p2)");
}

void NeedleState::apply(const RotationStep& s)
{
    if (s.pivot == Needle::one)
        n2 = normalized(rotate(n2, normalized(n1), s.angle));
    else
        n1 = normalized(rotate(n1, normalized(n2), s.angle));
}

std::vector<RotationStep> plan_needles(const SphereConfig& cfg, double tol)
{
    cfg.validate();
    double t = cfg.t();
    if (t < 1e-9 || pi - t < 1e-9)
        throw std::invalid_argument("needles collinear");

    // Past a right angle the second needle is replaced by its antipode, which
    // sits at the acute distance pi - t; turning about -n2 is turning about n2
    // the other way.
    bool flip = t > pi / 2;
    double tt = flip ? pi - t : t;
    NeedleState s{cfg.n1, flip ? -cfg.n2 : cfg.n2};
    Vec3 p = cfg.p1, q = flip ? -cfg.p2 : cfg.p2;

    std::vector<RotationStep> steps;
    auto push = [&](Needle k, double angle) {
        if (angle == 0)
            return;
        s.apply({k, angle});
        steps.push_back({k, (flip && k == Needle::two) ? -angle : angle});
    };

    for (int guard = 0; arc(s.n1, p) > tt; ++guard) {
        if (guard > 1000)
            throw std::runtime_error("needle plan does not converge");
        Vec3 w = p - s.n1 * dot(p, s.n1);
        if (norm(w) < 1e-12)
            w = s.n2 - s.n1 * dot(s.n2, s.n1);
        Vec3 target = s.n1 * std::cos(tt) + normalized(w) * std::sin(tt);
        push(Needle::one, turn_angle(s.n1, s.n2, target));
        push(Needle::two, pi);
    }

    if (arc(s.n1, p) <= tol && arc(s.n2, q) <= tol)
        return steps;
    Vec3 axis = cross(s.n1, p);
    if (norm(axis) < 1e-12) {
        push(Needle::one, turn_angle(s.n1, s.n2, q));
        return steps;
    }
    double alpha = std::cos(tt) / (1 + dot(s.n1, p));
    Vec3 base = (s.n1 + p) * alpha;
    double g = std::sqrt(std::max(0.0, 1 - dot(base, base)));
    Vec3 k = normalized(axis);
    double a1 = turn_angle(s.n1, s.n2, base + k * g);
    double a2 = turn_angle(s.n1, s.n2, base - k * g);
    push(Needle::one, std::abs(a1) <= std::abs(a2) ? a1 : a2);
    push(Needle::two, turn_angle(s.n2, s.n1, p));
    push(Needle::one, turn_angle(s.n1, s.n2, q));
    return steps;
}

NeedleReport simulate_needles(const SphereConfig& cfg, const std::vector<RotationStep>& steps)
{
    NeedleReport r;
    double t = cfg.t();
    NeedleState s{cfg.n1, cfg.n2};
    for (const RotationStep& st : steps) {
        s.apply(st);
        r.max_drift = std::max(r.max_drift, std::abs(arc(s.n1, s.n2) - t));
    }
    r.error1 = arc(s.n1, cfg.p1);
    r.error2 = arc(s.n2, cfg.p2);
    r.steps = steps.size();
    return r;
}

SphereConfig random_sphere_config(std::mt19937_64& rng, double t)
{
    SphereConfig c;
    auto place = [&](Vec3& a, Vec3& b) {
        a = random_unit(rng);
        Vec3 e = normalized(cross(a, random_unit(rng)));
        b = normalized(a * std::cos(t) + e * std::sin(t));
    };
    place(c.n1, c.n2);
    place(c.p1, c.p2);
    return c;
}

// ---- rigid maps ----

Mat3 Mat3::rotation(const Vec3& axis, double angle)
{
    Vec3 k = normalized(axis);
    double c = std::cos(angle), s = std::sin(angle), v = 1 - c;
    Mat3 r;
    r.m[0][0] = c + k.x * k.x * v;
    r.m[0][1] = k.x * k.y * v - k.z * s;
    r.m[0][2] = k.x * k.z * v + k.y * s;
    r.m[1][0] = k.y * k.x * v + k.z * s;
    r.m[1][1] = c + k.y * k.y * v;
    r.m[1][2] = k.y * k.z * v - k.x * s;
    r.m[2][0] = k.z * k.x * v - k.y * s;
    r.m[2][1] = k.z * k.y * v + k.x * s;
    r.m[2][2] = c + k.z * k.z * v;
    return r;
}

Vec3 Mat3::operator*(const Vec3& p) const
{
    return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z, m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z};
}

Mat3 Mat3::operator*(const Mat3& o) const
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            r.m[i][j] = 0;
            for (int k = 0; k < 3; ++k)
                r.m[i][j] += m[i][k] * o.m[k][j];
        }
    return r;
}

Mat3 Mat3::transpose() const
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.m[i][j] = m[j][i];
    return r;
}

Rigid Rigid::compose(const Rigid& other) const
{
    return {R * other.R, R * other.t + t};
}

Rigid Rigid::rotation_about(const Vec3& point, const Vec3& axis, double angle)
{
    Rigid g;
    g.R = Mat3::rotation(axis, angle);
    g.t = point - g.R * point;
    return g;
}

Rigid Rigid::translation(const Vec3& v)
{
    Rigid g;
    g.t = v;
    return g;
}

// ---- shapes ----

Frame3 Frame3::around(const Vec3& d_in, double phi)
{
    Frame3 f;
    f.d = normalized(d_in);
    Vec3 e1 = unit_perpendicular(f.d);
    Vec3 e2 = cross(f.d, e1);
    f.w = e1 * std::cos(phi) + e2 * std::sin(phi);
    f.v = cross(f.w, f.d);
    return f;
}

namespace {

// Affine patch p0 + r1 e1 + r2 e2 over a parameter rectangle.
void slice_patch(const Vec3& p0, const Vec3& e1, const Vec3& e2, Interval r1, Interval r2, const Frame3& f,
                 double x, double spacing, std::vector<Vec2>& out)
{
    double a = dot(e1, f.d), b = dot(e2, f.d), g = dot(p0, f.d) - x;
    auto emit = [&](const Vec3& p) { out.push_back({dot(p, f.v), dot(p, f.w)}); };
    double scale = norm(e1) * r1.length() + norm(e2) * r2.length();
    if (std::abs(a) * r1.length() + std::abs(b) * r2.length() <= 1e-14 * (1 + scale)) {
        if (std::abs(g) > 1e-12)
            return;
        int n1 = std::max(1, static_cast<int>(std::ceil(norm(e1) * r1.length() / spacing)));
        int n2 = std::max(1, static_cast<int>(std::ceil(norm(e2) * r2.length() / spacing)));
        for (int i = 0; i <= n1; ++i)
            for (int j = 0; j <= n2; ++j)
                emit(p0 + e1 * (r1.lo + r1.length() * i / n1) + e2 * (r2.lo + r2.length() * j / n2));
        return;
    }
    // Solve for the parameter with the larger coefficient along the other.
    bool swap = std::abs(a) < std::abs(b);
    double ca = swap ? b : a, cb = swap ? a : b;
    Interval ra = swap ? r2 : r1, rb = swap ? r1 : r2;
    // ra-value = -(g + cb * s) / ca for s in rb, clipped so it stays in ra.
    double lo = rb.lo, hi = rb.hi;
    if (cb != 0) {
        double s1 = (-ca * ra.lo - g) / cb, s2 = (-ca * ra.hi - g) / cb;
        lo = std::max(lo, std::min(s1, s2));
        hi = std::min(hi, std::max(s1, s2));
    } else {
        double v = -g / ca;
        if (v < ra.lo || v > ra.hi)
            return;
    }
    if (lo > hi)
        return;
    auto point = [&](double s) {
        double r = -(g + cb * s) / ca;
        return swap ? p0 + e1 * s + e2 * r : p0 + e1 * r + e2 * s;
    };
    Vec3 pa = point(lo), pb = point(hi);
    int n = std::max(1, static_cast<int>(std::ceil(norm(pb - pa) / spacing)));
    for (int i = 0; i <= n; ++i)
        emit(pa + (pb - pa) * (static_cast<double>(i) / n));
}

class Prism : public Shape {
public:
    Prism(std::vector<Vec2> pts, double z0, double z1) : pts_(std::move(pts)), z0_(z0), z1_(z1)
    {
        if (pts_.size() < 2 || !(z1 > z0))
            throw std::invalid_argument("prism needs a polyline and z0 < z1");
        Vec2 c;
        for (Vec2 p : pts_)
            c += p;
        c = c / static_cast<double>(pts_.size());
        center_ = {c.x, c.y, (z0 + z1) / 2};
        for (Vec2 p : pts_)
            radius_ = std::max(radius_, norm(p - c));
        radius_ = std::hypot(radius_, (z1 - z0) / 2);
    }

    void slice(const Frame3& f, double x, double spacing, std::vector<Vec2>& out) const override
    {
        for (size_t i = 0; i + 1 < pts_.size(); ++i) {
            Vec2 a = pts_[i], b = pts_[i + 1];
            slice_patch({a.x, a.y, 0}, {b.x - a.x, b.y - a.y, 0}, {0, 0, 1}, {0, 1}, {z0_, z1_}, f, x, spacing,
                        out);
        }
    }
    Vec3 center() const override { return center_; }
    double radius() const override { return radius_; }

private:
    std::vector<Vec2> pts_;
    double z0_, z1_;
    Vec3 center_;
    double radius_ = 0;
};

class PlanePiece : public Shape {
public:
    PlanePiece(const Vec3& c, const Vec3& e1, const Vec3& e2) : c_(c), e1_(e1), e2_(e2)
    {
        if (norm(cross(e1, e2)) == 0)
            throw std::invalid_argument("plane piece edges are parallel");
    }
    void slice(const Frame3& f, double x, double spacing, std::vector<Vec2>& out) const override
    {
        slice_patch(c_, e1_, e2_, {-1, 1}, {-1, 1}, f, x, spacing, out);
    }
    Vec3 center() const override { return c_; }
    double radius() const override { return norm(e1_) + norm(e2_); }

private:
    Vec3 c_, e1_, e2_;
};

class Implicit : public Shape {
public:
    void slice(const Frame3& f, double x, double spacing, std::vector<Vec2>& out) const override
    {
        Vec3 c = center();
        double r = radius();
        double off = x - dot(c, f.d);
        if (std::abs(off) > r)
            return;
        double cy = dot(c, f.v), cz = dot(c, f.w);
        int n = static_cast<int>(std::ceil(2 * r / spacing));
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                double y = cy - r + 2 * r * i / n, z = cz - r + 2 * r * j / n;
                Vec3 p = f.d * x + f.v * y + f.w * z;
                if (inside(p))
                    out.push_back({y, z});
            }
    }
    virtual bool inside(const Vec3& p) const = 0;
};

class Ball : public Implicit {
public:
    Ball(const Vec3& c, double r) : c_(c), r_(r)
    {
        if (!(r > 0))
            throw std::invalid_argument("ball radius must be positive");
    }
    bool inside(const Vec3& p) const override { return norm(p - c_) <= r_; }
    Vec3 center() const override { return c_; }
    double radius() const override { return r_; }

private:
    Vec3 c_;
    double r_;
};

class Box3 : public Implicit {
public:
    Box3(const Vec3& lo, const Vec3& hi) : lo_(lo), hi_(hi)
    {
        if (!(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z))
            throw std::invalid_argument("box corners out of order");
    }
    bool inside(const Vec3& p) const override
    {
        return p.x >= lo_.x && p.x <= hi_.x && p.y >= lo_.y && p.y <= hi_.y && p.z >= lo_.z && p.z <= hi_.z;
    }
    Vec3 center() const override { return (lo_ + hi_) * 0.5; }
    double radius() const override { return norm(hi_ - lo_) / 2; }

private:
    Vec3 lo_, hi_;
};

class Transformed : public Shape {
public:
    Transformed(ShapePtr inner, const Rigid& g) : inner_(std::move(inner)), g_(g), rt_(g.R.transpose()) {}

    void slice(const Frame3& f, double x, double spacing, std::vector<Vec2>& out) const override
    {
        Frame3 inner{rt_ * f.d, rt_ * f.v, rt_ * f.w};
        size_t first = out.size();
        inner_->slice(inner, x - dot(g_.t, f.d), spacing, out);
        Vec2 shift{dot(g_.t, f.v), dot(g_.t, f.w)};
        for (size_t i = first; i < out.size(); ++i)
            out[i] += shift;
    }
    Vec3 center() const override { return g_(inner_->center()); }
    double radius() const override { return inner_->radius(); }

private:
    ShapePtr inner_;
    Rigid g_;
    Mat3 rt_;
};

class Union : public Shape {
public:
    explicit Union(std::vector<ShapePtr> parts) : parts_(std::move(parts))
    {
        if (parts_.empty())
            throw std::invalid_argument("empty union");
        Vec3 c;
        for (const ShapePtr& p : parts_)
            c += p->center();
        center_ = c / static_cast<double>(parts_.size());
        for (const ShapePtr& p : parts_)
            radius_ = std::max(radius_, norm(p->center() - center_) + p->radius());
    }
    void slice(const Frame3& f, double x, double spacing, std::vector<Vec2>& out) const override
    {
        for (const ShapePtr& p : parts_)
            p->slice(f, x, spacing, out);
    }
    Vec3 center() const override { return center_; }
    double radius() const override { return radius_; }

private:
    std::vector<ShapePtr> parts_;
    Vec3 center_;
    double radius_ = 0;
};

}

ShapePtr make_prism(std::vector<Vec2> polyline, double z0, double z1)
{
    return std::make_shared<Prism>(std::move(polyline), z0, z1);
}

ShapePtr make_cylinder_surface(Vec2 center_xy, double r, double z0, double z1, int segments)
{
    if (!(r > 0) || segments < 8)
        throw std::invalid_argument("cylinder needs r > 0 and at least 8 segments");
    std::vector<Vec2> pts;
    for (int i = 0; i <= segments; ++i) {
        double a = 2 * pi * (i % segments) / segments;
        pts.push_back(center_xy + Vec2{r * std::cos(a), r * std::sin(a)});
    }
    return make_prism(std::move(pts), z0, z1);
}

ShapePtr make_plane_piece(const Vec3& c, const Vec3& e1, const Vec3& e2)
{
    return std::make_shared<PlanePiece>(c, e1, e2);
}

ShapePtr make_ball(const Vec3& c, double r)
{
    return std::make_shared<Ball>(c, r);
}

ShapePtr make_box(const Vec3& lo, const Vec3& hi)
{
    return std::make_shared<Box3>(lo, hi);
}

ShapePtr make_transformed(ShapePtr inner, const Rigid& map)
{
    return std::make_shared<Transformed>(std::move(inner), map);
}

ShapePtr make_union(std::vector<ShapePtr> parts)
{
    return std::make_shared<Union>(std::move(parts));
}

std::vector<Vec2> function_graph(double (*f)(double), double x0, double x1, int samples)
{
    if (samples < 1 || !(x1 > x0))
        throw std::invalid_argument("function_graph needs samples >= 1 and x0 < x1");
    std::vector<Vec2> pts;
    for (int i = 0; i <= samples; ++i) {
        double x = x0 + (x1 - x0) * i / samples;
        pts.push_back({x, f(x)});
    }
    return pts;
}

// ---- sliced solids ----

SlicedSolid::SlicedSolid(Interval xr, int n, const SliceGrid& g) : x_range(xr), nx(n), grid(g)
{
    if (n < 1 || g.ny < 1 || g.nz < 1 || !(g.cell > 0) || !(xr.length() > 0))
        throw std::invalid_argument("invalid sliced solid layout");
    size_t words = (static_cast<size_t>(g.ny) * g.nz + 63) / 64;
    bits.assign(static_cast<size_t>(n), std::vector<uint64_t>(words, 0));
}

bool SlicedSolid::get(int s, int iy, int iz) const
{
    size_t b = static_cast<size_t>(iy) * grid.nz + iz;
    return (bits[static_cast<size_t>(s)][b >> 6] >> (b & 63)) & 1;
}

void SlicedSolid::set(int s, int iy, int iz)
{
    size_t b = static_cast<size_t>(iy) * grid.nz + iz;
    bits[static_cast<size_t>(s)][b >> 6] |= uint64_t(1) << (b & 63);
}

size_t SlicedSolid::occupied() const
{
    size_t n = 0;
    for (const auto& sl : bits)
        for (uint64_t w : sl)
            n += std::popcount(w);
    return n;
}

SlicedSolid slice_shape(const Shape& k, const Frame3& f, Interval x_range, int nx, const SliceGrid& g)
{
    SlicedSolid out(x_range, nx, g);
    parallel_for(static_cast<size_t>(nx), [&](size_t s) {
        std::vector<Vec2> pts;
        k.slice(f, out.x_at(static_cast<int>(s)), g.cell / 4, pts);
        for (Vec2 p : pts) {
            double fy = (p.x - g.y_lo) / g.cell, fz = (p.y - g.z_lo) / g.cell;
            auto iy = static_cast<int>(std::floor(fy)), iz = static_cast<int>(std::floor(fz));
            if (iy == g.ny && fy <= g.ny + 1e-9)
                iy = g.ny - 1;
            if (iz == g.nz && fz <= g.nz + 1e-9)
                iz = g.nz - 1;
            if (iy < 0 && fy >= -1e-9)
                iy = 0;
            if (iz < 0 && fz >= -1e-9)
                iz = 0;
            if (iy < 0 || iy >= g.ny || iz < 0 || iz >= g.nz)
                throw std::invalid_argument("shape leaves the slice grid");
            out.set(static_cast<int>(s), iy, iz);
        }
    });
    return out;
}

SlicedSolid slice_shape_auto(const Shape& k, const Frame3& f, int nx, double cell)
{
    Vec3 c = k.center();
    double r = k.radius() * (1 + 1e-9) + cell;
    SliceGrid g;
    g.cell = cell;
    g.ny = g.nz = static_cast<int>(std::ceil(2 * r / cell));
    g.y_lo = dot(c, f.v) - r;
    g.z_lo = dot(c, f.w) - r;
    double xc = dot(c, f.d);
    return slice_shape(k, f, {xc - r, xc + r}, nx, g);
}

namespace {

bool column_occupied(const SlicedSolid& k, int s, int iy)
{
    size_t b0 = static_cast<size_t>(iy) * k.grid.nz, b1 = b0 + k.grid.nz;
    const auto& w = k.bits[static_cast<size_t>(s)];
    for (size_t b = b0; b < b1;) {
        size_t word = b >> 6, off = b & 63;
        size_t take = std::min<size_t>(64 - off, b1 - b);
        uint64_t mask = take == 64 ? ~uint64_t(0) : ((uint64_t(1) << take) - 1) << off;
        if (w[word] & mask)
            return true;
        b += take;
    }
    return false;
}

}

std::vector<ProfileEntry> slice_cover_profile(const SlicedSolid& k)
{
    std::vector<ProfileEntry> out;
    for (int s = 0; s < k.nx; ++s) {
        int n = 0;
        for (int iy = 0; iy < k.grid.ny; ++iy)
            n += column_occupied(k, s, iy);
        out.push_back({k.x_at(s), n});
    }
    return out;
}

CylinderlikeResult is_cylinderlike(const SlicedSolid& k, int n, double tol)
{
    if (tol < 0)
        tol = k.dx();
    CylinderlikeResult r;
    for (const ProfileEntry& e : slice_cover_profile(k)) {
        r.max_n = std::max(r.max_n, e.n);
        if (e.n > n)
            r.exception_measure += k.dx();
    }
    r.ok = r.exception_measure < tol;
    return r;
}

FrameSearch find_cylinder_frame(const Shape& k, const Vec3& d, int n, int nx, double cell, int angles)
{
    if (angles < 1)
        throw std::invalid_argument("angles must be positive");
    FrameSearch best;
    bool have = false;
    for (int i = 0; i < angles; ++i) {
        Frame3 f = Frame3::around(d, pi * i / angles);
        CylinderlikeResult r = is_cylinderlike(slice_shape_auto(k, f, nx, cell), n);
        bool better = !have || (r.ok && !best.result.ok) ||
                      (r.ok == best.result.ok && (r.exception_measure < best.result.exception_measure ||
                                                  (r.exception_measure == best.result.exception_measure &&
                                                   r.max_n < best.result.max_n)));
        if (better) {
            best.frame = f;
            best.result = r;
            have = true;
        }
    }
    best.found = best.result.ok;
    return best;
}

// ---- planar rasters ----

PlanarRaster::PlanarRaster(double x0_, double y0_, double cell_, int nx_, int ny_)
    : x0(x0_), y0(y0_), cell(cell_), nx(nx_), ny(ny_)
{
    if (nx < 1 || ny < 1 || !(cell > 0))
        throw std::invalid_argument("invalid planar raster");
    occ.assign(static_cast<size_t>(nx) * ny, 0);
}

bool PlanarRaster::get(int i, int j) const
{
    if (i < 0 || j < 0 || i >= nx || j >= ny)
        return false;
    return occ[static_cast<size_t>(j) * nx + i];
}

bool PlanarRaster::at(Vec2 p) const
{
    return get(static_cast<int>(std::floor((p.x - x0) / cell)), static_cast<int>(std::floor((p.y - y0) / cell)));
}

void PlanarRaster::mark(Vec2 p)
{
    auto i = static_cast<int>(std::floor((p.x - x0) / cell)), j = static_cast<int>(std::floor((p.y - y0) / cell));
    if (i >= 0 && j >= 0 && i < nx && j < ny)
        occ[static_cast<size_t>(j) * nx + i] = 1;
}

void PlanarRaster::draw_polyline(std::span<const Vec2> pts, double thickness)
{
    double r = thickness * cell;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        Vec2 a = pts[k], b = pts[k + 1];
        int i0 = std::max(0, static_cast<int>(std::floor((std::min(a.x, b.x) - r - x0) / cell)));
        int i1 = std::min(nx - 1, static_cast<int>(std::floor((std::max(a.x, b.x) + r - x0) / cell)));
        int j0 = std::max(0, static_cast<int>(std::floor((std::min(a.y, b.y) - r - y0) / cell)));
        int j1 = std::min(ny - 1, static_cast<int>(std::floor((std::max(a.y, b.y) + r - y0) / cell)));
        Vec2 ab = b - a;
        double len2 = dot(ab, ab);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                Vec2 c{x0 + (i + 0.5) * cell, y0 + (j + 0.5) * cell};
                double u = len2 > 0 ? std::clamp(dot(c - a, ab) / len2, 0.0, 1.0) : 0.0;
                if (norm(c - (a + ab * u)) <= r)
                    occ[static_cast<size_t>(j) * nx + i] = 1;
            }
    }
}

int line_count_profile(const PlanarRaster& a, double direction, double halo)
{
    Vec2 d{std::cos(direction), std::sin(direction)};
    struct Cell {
        double s;
        int i, j;
    };
    std::vector<Cell> cells;
    for (int j = 0; j < a.ny; ++j)
        for (int i = 0; i < a.nx; ++i)
            if (a.get(i, j))
                cells.push_back({dot(Vec2{a.x0 + (i + 0.5) * a.cell, a.y0 + (j + 0.5) * a.cell}, d), i, j});
    if (cells.empty())
        return 0;
    std::sort(cells.begin(), cells.end(), [](const Cell& l, const Cell& r) { return l.s < r.s; });

    // A line meets the cells within half a cell of it; two of those belong to
    // the same run when occupied cells within `halo` cells of the line join
    // them.
    double reach = halo * a.cell;
    int best = 0;
    std::unordered_map<uint64_t, size_t> index;
    std::vector<size_t> parent;
    auto key = [](int i, int j) { return (static_cast<uint64_t>(static_cast<uint32_t>(i)) << 32) | static_cast<uint32_t>(j); };
    auto find = [&parent](size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    for (double s = cells.front().s; s <= cells.back().s + a.cell / 4; s += a.cell / 2) {
        auto lo = std::lower_bound(cells.begin(), cells.end(), s - reach, [](const Cell& c, double v) { return c.s < v; });
        auto hi = std::upper_bound(cells.begin(), cells.end(), s + reach, [](double v, const Cell& c) { return v < c.s; });
        index.clear();
        parent.clear();
        for (auto it = lo; it != hi; ++it) {
            index[key(it->i, it->j)] = parent.size();
            parent.push_back(parent.size());
        }
        for (auto it = lo; it != hi; ++it) {
            size_t me = index[key(it->i, it->j)];
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    auto nb = index.find(key(it->i + di, it->j + dj));
                    if (nb != index.end())
                        parent[find(me)] = find(nb->second);
                }
        }
        std::vector<size_t> roots;
        for (auto it = lo; it != hi; ++it)
            if (std::abs(it->s - s) <= a.cell / 2)
                roots.push_back(find(index[key(it->i, it->j)]));
        std::sort(roots.begin(), roots.end());
        best = std::max(best, static_cast<int>(std::unique(roots.begin(), roots.end()) - roots.begin()));
    }
    return best;
}

// ---- volume sweeps ----

namespace {

SweepOptions localized(const MotionPath& m, SweepOptions opt)
{
    if (!m.empty() && opt.home_radius >= 1e299) {
        opt.home_center = m.start().origin;
        opt.home_radius = 8;
    }
    return opt;
}

}

VolumeReport sweep_volume(const SlicedSolid& k, const MotionPath& m, double resolution, const SquareEmbedding& e,
                          const SweepOptions& opt_in)
{
    if (!(resolution >= 256))
        throw std::invalid_argument("raster resolution must be at least 256 cells per unit");
    SweepOptions opt = localized(m, opt_in);
    const SliceGrid& g = k.grid;
    VolumeReport rep;
    rep.dx = k.dx();
    rep.slices.resize(static_cast<size_t>(k.nx));

    // Check the fit before spending time on rasters.
    for (int s = 0; s < k.nx; ++s)
        for (int iy = 0; iy < g.ny; ++iy) {
            if (!column_occupied(k, s, iy))
                continue;
            double h = g.y_lo + (iy + 0.5) * g.cell - e.y0;
            if (h < -1e-9 || h > 1 + 1e-9)
                throw std::invalid_argument("slice projection does not fit the moved square");
            for (int iz = 0; iz < g.nz; ++iz) {
                if (!k.get(s, iy, iz))
                    continue;
                double t = g.z_lo + (iz + 0.5) * g.cell - e.z_mid;
                if (t < -0.5 - 1e-9 || t > 0.5 + 1e-9)
                    throw std::invalid_argument("slice projection does not fit the moved square");
            }
        }

    parallel_for(rep.slices.size(), [&](size_t si) {
        int s = static_cast<int>(si);
        SliceSweep& out = rep.slices[si];
        out.x = k.x_at(s);
        Raster raster(resolution);
        SegmentSweep acc;
        for (int iy = 0; iy < g.ny; ++iy) {
            if (!column_occupied(k, s, iy))
                continue;
            ++out.columns;
            if (m.empty())
                continue;
            double h = std::clamp(g.y_lo + (iy + 0.5) * g.cell - e.y0, 0.0, 1.0);
            for (int iz = 0; iz < g.nz;) {
                if (!k.get(s, iy, iz)) {
                    ++iz;
                    continue;
                }
                int iz1 = iz;
                while (iz1 + 1 < g.nz && k.get(s, iy, iz1 + 1))
                    ++iz1;
                double t0 = std::max(-0.5, g.z_lo + iz * g.cell - e.z_mid);
                double t1 = std::min(0.5, g.z_lo + (iz1 + 1) * g.cell - e.z_mid);
                accumulate_segment_sweep(m, h, t0, t1, raster, acc, opt);
                iz = iz1 + 1;
            }
        }
        acc.raster_area = raster.area();
        acc.error_bound += raster.boundary_allowance();
        out.raster_area = acc.raster_area;
        out.far_area = acc.far_area;
        out.analytic_area = acc.analytic_area;
        out.error_bound = acc.error_bound;
        out.area = acc.area();
    });
    for (const SliceSweep& s : rep.slices) {
        rep.volume += s.area * rep.dx;
        rep.error_bound += s.error_bound * rep.dx;
    }
    return rep;
}

RotationRealization realize_rotation(const Schedule& s, const SquareEmbedding& e, Vec2 center, double angle)
{
    RotationRealization out;
    if (s.path.empty())
        throw std::invalid_argument("empty schedule");
    double alpha = std::fmod(-angle, 2 * pi);
    if (alpha < 0)
        alpha += 2 * pi;
    if (alpha == 0)
        return out;
    Pose2 start = s.path.start();
    // (y, z) -> (h, t) reverses orientation, so the plane turns by -angle.
    Vec2 c = start.body_to_world(center.y - e.z_mid, center.x - e.y0);
    double done = 0;
    for (const MotionPiece& p : s.path.pieces) {
        if (p.kind == PieceKind::rotate && done + p.amount >= alpha) {
            out.path.pieces.push_back(make_rotation(p.start, p.vec, alpha - done));
            done = alpha;
            break;
        }
        out.path.pieces.push_back(p);
        if (p.kind == PieceKind::rotate)
            done += p.amount;
    }
    if (done != alpha)
        throw std::runtime_error("schedule does not turn far enough");
    Pose2 reached = out.path.end();
    Pose2 target{rotate_about(start.origin, c, -angle), reached.angle};
    MotionPath join = pal_join(reached, target, s.join_distance);
    out.path.append(join);
    out.per_height_bound = s.ledger.total + pal_join_budget(join);
    return out;
}

// ---- strong Kakeya plans ----

namespace {

struct FrameData {
    Frame3 frame;
    SlicedSolid solid;
    SquareEmbedding embed;
    Vec2 center;  // rotation center in slice coordinates
    int max_columns = 0;
    double x_extent = 0;
};

FrameData prepare_frame(const Shape& k, const Frame3& f, const StrongOptions& opt)
{
    FrameData fd;
    fd.frame = f;
    fd.solid = slice_shape_auto(k, f, opt.slices, opt.cell);
    const SliceGrid& g = fd.solid.grid;
    double ylo = 1e300, yhi = -1e300, zlo = 1e300, zhi = -1e300;
    int used = 0;
    for (int s = 0; s < fd.solid.nx; ++s) {
        bool any = false;
        int cols = 0;
        for (int iy = 0; iy < g.ny; ++iy) {
            bool col = false;
            for (int iz = 0; iz < g.nz; ++iz)
                if (fd.solid.get(s, iy, iz)) {
                    col = true;
                    ylo = std::min(ylo, g.y_lo + iy * g.cell);
                    yhi = std::max(yhi, g.y_lo + (iy + 1) * g.cell);
                    zlo = std::min(zlo, g.z_lo + iz * g.cell);
                    zhi = std::max(zhi, g.z_lo + (iz + 1) * g.cell);
                }
            cols += col;
            any = any || col;
        }
        used += any;
        fd.max_columns = std::max(fd.max_columns, cols);
    }
    if (used == 0)
        throw std::invalid_argument("shape has empty slices");
    if (yhi - ylo > 1 + g.cell + 1e-9 || zhi - zlo > 1 + g.cell + 1e-9)
        throw std::invalid_argument("shape does not fit the unit square in the slice frame");
    fd.embed = {ylo, (zlo + zhi) / 2};
    Vec3 c = k.center();
    fd.center = {dot(c, f.v), dot(c, f.w)};
    fd.x_extent = used * fd.solid.dx();
    return fd;
}

double pose_distance(const Rigid& a, const Rigid& b, const Vec3& d1, const Vec3& d2, const Vec3& c)
{
    return std::max({norm(a.R * d1 - b.R * d1), norm(a.R * d2 - b.R * d2), norm(a(c) - b(c))});
}

}

StrongPlan strong_kakeya_plan(const Shape& k, const Vec3& d1_in, const Vec3& d2_in, const Rigid& target,
                              const StrongOptions& opt)
{
    Vec3 dir[2] = {normalized(d1_in), normalized(d2_in)};
    if (norm(cross(dir[0], dir[1])) < 1e-9)
        throw std::invalid_argument("directions are parallel");
    Mat3 rtr = target.R.transpose() * target.R;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(rtr.m[i][j] - (i == j)) > 1e-9)
                throw std::invalid_argument("target is not a rigid motion");

    StrongPlan plan;
    Vec3 c = k.center();
    if (pose_distance(Rigid{}, target, dir[0], dir[1], c) <= opt.tol)
        return plan;

    FrameData fd[2];
    for (int i = 0; i < 2; ++i) {
        FrameSearch fs = find_cylinder_frame(k, dir[i], opt.max_lines, 32, opt.cell);
        if (!fs.found) {
            std::ostringstream os;
            os << "shape is not cylinderlike from direction (" << dir[i].x << ", " << dir[i].y << ", " << dir[i].z
               << ")";
            throw std::invalid_argument(os.str());
        }
        fd[i] = prepare_frame(k, fs.frame, opt);
        plan.frames[i] = fs.frame;
    }

    StageSet stage = build_stage(opt.stage_m, {});
    SlabCover cover = build_slab_cover(stage, gap_rule_delta(stage));
    PlanOptions po;
    po.join_distance = opt.join_distance;
    Schedule sched = plan_full_rotation(cover, std::numeric_limits<double>::infinity(), po);

    Rigid cur;
    auto apply = [&](SpaceStep st) {
        Rigid g = st.kind == SpaceKind::translate ? Rigid::translation(st.axis * st.amount)
                                                  : Rigid::rotation_about(st.point, st.axis, st.amount);
        cur = g.compose(cur);
        plan.steps.push_back(st);
    };
    auto audit_rotation = [&](int frame, double angle, double per_height) {
        SpaceStep st;
        st.kind = SpaceKind::rotate;
        st.frame = frame;
        st.axis = cur.R * dir[frame];
        st.point = cur(c);
        st.amount = angle;
        st.budget = fd[frame].max_columns * per_height * fd[frame].x_extent;
        return st;
    };

    // Translation block: the offset is split into a part perpendicular to d1
    // and a part perpendicular to d2, each done as a join in that plane.
    Vec3 shift = target.t + target.R * c - c;
    Vec3 q = dir[0] - dir[1] * dot(dir[0], dir[1]);
    Vec3 part[2];
    part[1] = q * (dot(shift, dir[0]) / dot(q, dir[0]));
    part[0] = shift - part[1];
    double D = opt.join_distance;
    for (int i = 0; i < 2; ++i) {
        if (norm(part[i]) <= 1e-15)
            continue;
        Vec3 w = cur.R * fd[i].frame.w, v = cur.R * fd[i].frame.v;
        double gamma = std::atan2(dot(part[i], v), D - dot(part[i], w));
        double back = std::hypot(D - dot(part[i], w), dot(part[i], v));
        double reach = k.radius();
        double per_height = std::abs(gamma) * reach * reach;

        SpaceStep out;
        out.kind = SpaceKind::translate;
        out.frame = i;
        out.axis = w;
        out.amount = D;
        out.audited = 0;
        apply(out);
        apply(audit_rotation(i, gamma, per_height));
        SpaceStep ret;
        ret.kind = SpaceKind::translate;
        ret.frame = i;
        ret.axis = -(cur.R * fd[i].frame.w);
        ret.amount = back;
        ret.audited = 0;
        apply(ret);
        apply(audit_rotation(i, -gamma, per_height));
    }

    SphereConfig cfg{dir[0], dir[1], normalized(target.R * dir[0]), normalized(target.R * dir[1])};
    plan.needle_steps = plan_needles(cfg);
    std::vector<RotationRealization> realized;
    for (const RotationStep& rs : plan.needle_steps) {
        int i = rs.pivot == Needle::one ? 0 : 1;
        RotationRealization rr = realize_rotation(sched, fd[i].embed, fd[i].center, rs.angle);
        SpaceStep st = audit_rotation(i, rs.angle, rr.per_height_bound);
        st.needle = i;
        apply(st);
        realized.push_back(std::move(rr));
    }

    if (opt.audit) {
        size_t needle_index = 0;
        for (SpaceStep& st : plan.steps) {
            if (st.kind != SpaceKind::rotate)
                continue;
            MotionPath path;
            if (st.needle >= 0) {
                path = realized[needle_index++].path;
            } else if (st.amount != 0) {
                Pose2 start = sched.path.start();
                const FrameData& f = fd[st.frame];
                Vec2 ctr = start.body_to_world(f.center.y - f.embed.z_mid, f.center.x - f.embed.y0);
                path.pieces.push_back(make_rotation(start, ctr, -st.amount));
            }
            SweepOptions so;
            so.thin_analytic = true;
            VolumeReport vr = sweep_volume(fd[st.frame].solid, path, opt.resolution, fd[st.frame].embed, so);
            st.audited = vr.volume;
            plan.total_audited += vr.volume;
            plan.raster_tolerance += vr.error_bound;
        }
    }
    for (const SpaceStep& st : plan.steps)
        plan.total_budget += st.budget;
    plan.achieved = cur;
    plan.pose_error = pose_distance(cur, target, dir[0], dir[1], c);
    return plan;
}

}
