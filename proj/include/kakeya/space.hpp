#pragma once

#include "kakeya/geometry.hpp"
#include "kakeya/motion.hpp"
#include "kakeya/rotation.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace kakeya {

// ---- sphere with two needles ----

struct SphereConfig {
    Vec3 n1, n2, p1, p2;

    // Throws unless all four vectors are unit and arc(n1, n2) = arc(p1, p2).
    void validate(double tol = 1e-12) const;
    double t() const { return arc(n1, n2); }
};

enum class Needle : uint8_t { one, two };

struct RotationStep {
    Needle pivot = Needle::one;
    double angle = 0;
};

struct NeedleState {
    Vec3 n1, n2;
    void apply(const RotationStep& s);
};

std::vector<RotationStep> plan_needles(const SphereConfig& cfg, double tol = 1e-12);

struct NeedleReport {
    double error1 = 0, error2 = 0;  // final arcs to p1 and p2
    double max_drift = 0;           // largest |arc(n1, n2) - t| after any step
    size_t steps = 0;
};

NeedleReport simulate_needles(const SphereConfig& cfg, const std::vector<RotationStep>& steps);

// Random configuration with arc(n1, n2) = t.
SphereConfig random_sphere_config(std::mt19937_64& rng, double t);

// ---- rigid maps ----

struct Mat3 {
    double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    static Mat3 rotation(const Vec3& axis, double angle);
    Vec3 operator*(const Vec3& v) const;
    Mat3 operator*(const Mat3& o) const;
    Mat3 transpose() const;
};

struct Rigid {
    Mat3 R;
    Vec3 t;

    Vec3 operator()(const Vec3& p) const { return R * p + t; }
    // this after other
    Rigid compose(const Rigid& other) const;
    static Rigid rotation_about(const Vec3& point, const Vec3& axis, double angle);
    static Rigid translation(const Vec3& v);
};

// ---- shapes and slices ----

// Orthonormal right handed frame: slices are {p . d = x}, a slice point has
// coordinates y = p . v, z = p . w and "vertical lines" run along w.
struct Frame3 {
    Vec3 d{1, 0, 0}, v{0, 1, 0}, w{0, 0, 1};

    // w at angle phi in the plane perpendicular to d.
    static Frame3 around(const Vec3& d, double phi);
};

class Shape {
public:
    virtual ~Shape() = default;
    // Points of the intersection with {p . frame.d = x} as (y, z) slice
    // coordinates, sampled with the given spacing.
    virtual void slice(const Frame3& f, double x, double spacing, std::vector<Vec2>& out) const = 0;
    virtual Vec3 center() const = 0;
    virtual double radius() const = 0;
};

using ShapePtr = std::shared_ptr<const Shape>;

// Planar polyline in the (x, y) plane times z in [z0, z1].
ShapePtr make_prism(std::vector<Vec2> polyline, double z0, double z1);
// Curved surface of a cylinder with axis along z.
ShapePtr make_cylinder_surface(Vec2 center_xy, double r, double z0, double z1, int segments = 512);
// Parallelogram c + u e1 + v e2 with u, v in [-1, 1].
ShapePtr make_plane_piece(const Vec3& c, const Vec3& e1, const Vec3& e2);
ShapePtr make_ball(const Vec3& c, double r);
ShapePtr make_box(const Vec3& lo, const Vec3& hi);
ShapePtr make_transformed(ShapePtr inner, const Rigid& map);
ShapePtr make_union(std::vector<ShapePtr> parts);
// Graph y = f(x) of a function sampled on [x0, x1], as a polyline.
std::vector<Vec2> function_graph(double (*f)(double), double x0, double x1, int samples);

struct SliceGrid {
    double y_lo = 0, z_lo = 0, cell = 1.0 / 64;
    int ny = 64, nz = 64;
};

struct SlicedSolid {
    Interval x_range{0, 1};
    int nx = 1;
    SliceGrid grid;
    // slice s, cell (iy, iz) at bit iy * nz + iz
    std::vector<std::vector<uint64_t>> bits;

    SlicedSolid() = default;
    SlicedSolid(Interval xr, int nx, const SliceGrid& g);

    double dx() const { return x_range.length() / nx; }
    double x_at(int s) const { return x_range.lo + (s + 0.5) * dx(); }
    bool get(int s, int iy, int iz) const;
    void set(int s, int iy, int iz);
    size_t occupied() const;
};

SlicedSolid slice_shape(const Shape& k, const Frame3& f, Interval x_range, int nx, const SliceGrid& g);
// Grid and x-range sized from the shape's bounding sphere.
SlicedSolid slice_shape_auto(const Shape& k, const Frame3& f, int nx, double cell);

struct ProfileEntry {
    double x = 0;
    int n = 0;
};

std::vector<ProfileEntry> slice_cover_profile(const SlicedSolid& k);

struct CylinderlikeResult {
    bool ok = false;
    double exception_measure = 0;
    int max_n = 0;
};

// tol < 0 selects one slice spacing.
CylinderlikeResult is_cylinderlike(const SlicedSolid& k, int n, double tol = -1);

struct FrameSearch {
    Frame3 frame;
    CylinderlikeResult result;
    bool found = false;
};

// Searches the vertical direction w perpendicular to d for which k is
// cylinderlike with at most n lines per slice.
FrameSearch find_cylinder_frame(const Shape& k, const Vec3& d, int n, int nx = 32, double cell = 1.0 / 64,
                                int angles = 72);

// ---- planar line counts ----

struct PlanarRaster {
    double x0 = 0, y0 = 0, cell = 1.0 / 256;
    int nx = 0, ny = 0;
    std::vector<uint8_t> occ;

    PlanarRaster(double x0, double y0, double cell, int nx, int ny);
    bool get(int i, int j) const;
    bool at(Vec2 p) const;
    void mark(Vec2 p);
    // Marks every cell within distance `thickness` cells of the polyline.
    void draw_polyline(std::span<const Vec2> pts, double thickness = 0.75);
};

// Largest number of occupied runs met by a line perpendicular to `direction`.
// Cells of a run are connected through occupied cells within `halo` cells of
// the line, which keeps staircase edges of the raster from splitting runs.
int line_count_profile(const PlanarRaster& a, double direction, double halo = 3);

// ---- volume sweeps ----

// Slice coordinates (y, z) sit on the square body at h = y - y0, t = z - z_mid.
struct SquareEmbedding {
    double y0 = 0, z_mid = 0.5;
};

struct SliceSweep {
    double x = 0;
    int columns = 0;
    double area = 0;
    double raster_area = 0, far_area = 0, analytic_area = 0, error_bound = 0;
};

struct VolumeReport {
    std::vector<SliceSweep> slices;
    double dx = 0;
    double volume = 0;
    double error_bound = 0;  // raster tolerance times dx, summed
};

VolumeReport sweep_volume(const SlicedSolid& k, const MotionPath& m, double resolution,
                          const SquareEmbedding& e = {}, const SweepOptions& opt = {});

// Square motion realizing a rotation by `angle` (right hand rule about the
// slice axis) of the slice plane about slice point `center`, built from a
// prefix of a full-rotation schedule followed by a join. The square starts at
// the schedule's start pose.
struct RotationRealization {
    MotionPath path;
    double per_height_bound = 0;  // schedule ledger plus join budget
};

RotationRealization realize_rotation(const Schedule& s, const SquareEmbedding& e, Vec2 center, double angle);

// ---- strong Kakeya plans ----

enum class SpaceKind : uint8_t { translate, rotate };

struct SpaceStep {
    SpaceKind kind = SpaceKind::translate;
    Vec3 axis;    // unit direction of translation or rotation axis
    Vec3 point;   // point on the rotation axis
    double amount = 0;
    int needle = -1;  // 0 or 1 for steps of the needle plan
    int frame = 0;    // frame whose slices account for the step
    double budget = 0;
    double audited = std::numeric_limits<double>::quiet_NaN();
};

struct StrongOptions {
    int stage_m = 2;
    double join_distance = 1000;
    double tol = 1e-9;
    double resolution = 512;
    int slices = 8;
    double cell = 1.0 / 64;
    int max_lines = 8;
    bool audit = true;
};

struct StrongPlan {
    std::vector<SpaceStep> steps;
    std::vector<RotationStep> needle_steps;
    Frame3 frames[2];
    Rigid achieved;
    double pose_error = 0;
    double total_budget = 0;
    double total_audited = 0;
    double raster_tolerance = 0;
};

StrongPlan strong_kakeya_plan(const Shape& k, const Vec3& d1, const Vec3& d2, const Rigid& target,
                              const StrongOptions& opt = {});

}
