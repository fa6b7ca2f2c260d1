#pragma once

#include "kakeya/geometry.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace kakeya {

// Pose of the unit square in the plane. Body point (t, h), t in [-1/2, 1/2]
// along the base side T and h in [0, 1] towards the opposite side, sits at
// origin + t * u(angle) + h * n(angle) with n = (cos, sin) and u = (sin, -cos).
// The angle is kept unwrapped so the net rotation of a path can be read off.
struct Pose2 {
    Vec2 origin;
    double angle = 0;

    Vec2 normal() const { return {std::cos(angle), std::sin(angle)}; }
    Vec2 along() const { return {std::sin(angle), -std::cos(angle)}; }
    Vec2 body_to_world(double t, double h) const { return origin + along() * t + normal() * h; }
};

struct SegmentPose {
    Vec2 p, q;
};

// Segment at height h of the square, restricted to body t in [t0, t1].
SegmentPose square_segment(const Pose2& pose, double h, double t0 = -0.5, double t1 = 0.5);

enum class PieceKind : uint8_t { translate, rotate };

// One rigid piece of a planar motion. For a translation `vec` is the unit
// direction and `amount` the length; for a rotation `vec` is the center and
// `amount` the signed angle.
struct MotionPiece {
    PieceKind kind = PieceKind::translate;
    Pose2 start;
    Vec2 vec;
    double amount = 0;

    Pose2 end() const;
    Pose2 at(double fraction) const;
};

MotionPiece make_translation(const Pose2& start, Vec2 direction, double length);
MotionPiece make_rotation(const Pose2& start, Vec2 center, double angle);

struct MotionPath {
    std::vector<MotionPiece> pieces;

    bool empty() const { return pieces.empty(); }
    Pose2 start() const { return pieces.front().start; }
    Pose2 end() const { return pieces.back().end(); }
    double net_rotation() const;
    double total_translation() const;
    void append(const MotionPath& other);
};

struct ValidationReport {
    bool ok = true;
    long index = -1;
    std::string message;
};

ValidationReport validate_motion(const MotionPath& path, double tol = 1e-9);

// Exact area swept by the segment pq rotated by `angle` about `center`,
// valid for |angle| <= pi.
double rotating_segment_area(Vec2 p, Vec2 q, Vec2 center, double angle);

// Sparse bitmap of grid cells of side 1/resolution; a cell is counted when its
// sample point, placed at a fixed irrational offset inside the cell, lies in a
// rasterized polygon.
class Raster {
public:
    explicit Raster(double resolution);

    double resolution() const { return res_; }
    double cell() const { return 1.0 / res_; }

    // Convex polygon (vertices in any cyclic order).
    void fill_convex(std::span<const Vec2> poly);
    // Region between two consecutive positions of a moving segment.
    void fill_quad(const SegmentPose& a, const SegmentPose& b);

    uint64_t count() const;
    double area() const { return count() * cell() * cell(); }
    // Set cells with an unset 4-neighbour.
    uint64_t boundary_count() const;
    double boundary_allowance() const { return boundary_count() * cell() * cell(); }
    void clear();

private:
    struct Tile {
        uint64_t col[64] = {};
    };
    void mark_run(int64_t i, int64_t j0, int64_t j1, bool transposed);
    Tile& tile(int64_t ti, int64_t tj);

    double res_;
    std::unordered_map<uint64_t, Tile> tiles_;
    uint64_t last_key_ = ~uint64_t(0);
    Tile* last_ = nullptr;
};

struct SweepArea {
    double area = 0;
    double error_bound = 0;
    uint64_t cells = 0;
};

// Area of the union of the regions between consecutive segment positions.
SweepArea swept_region_area(std::span<const SegmentPose> poses, double resolution);

struct SweepOptions {
    // Pieces whose exact swept area is below this many cell areas are added
    // analytically instead of being rasterized.
    double subcell_fraction = 0.05;
    // When set, pieces whose swept region is nowhere wider than a cell are
    // added analytically too. Such slivers can fall between sample points, so
    // this trades sampling for an upper bound that ignores their overlaps.
    bool thin_analytic = false;
    // Pieces whose sweep stays farther than home_radius from home_center are
    // rasterized in spatial groups of side group_size that are counted and
    // discarded one at a time, so distant excursions cost no resident memory.
    // Overlaps between different groups are counted twice.
    Vec2 home_center;
    double home_radius = 1e300;
    double group_size = 4;
};

struct SegmentSweep {
    double raster_area = 0;   // cells of the shared raster
    double far_area = 0;      // cells of distant groups
    double analytic_area = 0; // exact areas of sub-cell pieces
    double error_bound = 0;
    double area() const { return raster_area + far_area + analytic_area; }
};

// Feeds the sweep of the body segment {(t, h) : t in [t0, t1]} under `path`
// into `raster`. Distant and sub-cell parts go straight into `acc`; the caller
// adds raster.area() and raster.boundary_allowance() when done.
void accumulate_segment_sweep(const MotionPath& path, double h, double t0, double t1, Raster& raster,
                              SegmentSweep& acc, const SweepOptions& opt = {});

SegmentSweep segment_sweep(const MotionPath& path, double h, double resolution, const SweepOptions& opt = {});

}
