#pragma once

#include "kakeya/geometry.hpp"
#include "kakeya/motion.hpp"
#include "kakeya/projection.hpp"
#include "kakeya/stage.hpp"

#include <limits>
#include <vector>

namespace kakeya {

// Rectangle with sides 1 and sqrt(2), short side T in {y = 0}, tilted 45
// degrees into y >= 0. `base` is the midpoint of T in the (x, z) plane and
// `theta` the direction of T. Its slice at height y = h projects onto the
// segment at distance h from T of the unit square with pose square_pose().
struct InterestingRect {
    Vec2 base;
    double theta = 0;

    Pose2 square_pose() const;
    static InterestingRect from_pose(const Pose2& p);
    // Point at body coordinates t in [-1/2, 1/2] along T and height h in [0, 1].
    Vec3 point(double t, double h) const;
};

// Rotation of an interesting rectangle about the axis through (center.x, y,
// center.y) parallel to the y axis.
InterestingRect rotate_rect(const InterestingRect& r, Vec2 center, double angle);

struct Box {
    double x_lo = -1, x_hi = 1, z_lo = -1, z_hi = 1;
    static Box symmetric(double n) { return {-n, n, -n, n}; }
};

// Station geometry shared by covers and plans: the square rotates about the
// point of its base side at body coordinate t = -pivot_offset, which sits on
// the line x = 0 at height z = a of the stage rectangle's center.
struct StationGeometry {
    double pivot_offset = 0.2;
};

struct Slab {
    PlaneTriple plane;
    double half_width = 0;  // delta; the slice strip has vertical half height delta (1 + |b|)
    double b_lo = 0, b_hi = 0;  // band of the stage rectangle
    double strip_half_height() const { return half_width * (1 + std::abs(plane.b)); }
};

struct SlabCover {
    std::vector<Slab> slabs;
    Box box;
    double delta = 0;
    double largest_gap = 0;
    StationGeometry geometry;
    IntervalSet directions;  // slopes b reachable by stations inside their slabs
    double certified_eps = std::numeric_limits<double>::quiet_NaN();
    int h_grid = 0;
};

// Smallest delta for which every station of the stage reaches the edges of
// its band without leaving its slab.
double gap_rule_delta(const StageSet& s, const StationGeometry& g = {});

// n_box <= 0 selects the smallest symmetric box holding every station.
SlabCover build_slab_cover(const StageSet& s, double delta, double n_box = 0, const StationGeometry& g = {});

enum class SliceClip {
    box,      // strips clipped to the cover's box
    stations  // strips restricted to the x-range each station's rectangle occupies
};

enum class GridTransfer {
    modulus,   // add the largest change between neighbouring grid heights
    thickening // evaluate the grid at thickening delta + grid spacing
};

struct CertifyOptions {
    int x_samples = 256;
    SliceClip clip = SliceClip::box;
    GridTransfer transfer = GridTransfer::modulus;
};

struct SliceCertificate {
    std::vector<double> h, area, quadrature_error;
    double grid_max = 0;
    double correction = 0;
    double certified_eps = 0;
};

SliceCertificate certify_slices(SlabCover& u, int h_grid, const CertifyOptions& opt = {});

struct Station {
    InterestingRect rect;  // at the slab's central direction
    double margin = 0;     // admissible rotation either way, radians
    Vec2 pivot;
    double b_lo = 0, b_hi = 0;  // band traversed by the plan
    size_t slab = 0;
};

std::vector<Station> station_cover(const SlabCover& u);

// N-shaped move between parallel poses: out along the free direction by D,
// turn by gamma about the base point, back along the new free direction,
// turn by -gamma.
MotionPath pal_join(const Pose2& from, const Pose2& to, double D);
MotionPath pal_join(const InterestingRect& from, const InterestingRect& to, double D);

// Per-height sweep bound of the rotations in a join: |gamma| / 4 each.
double pal_join_budget(const MotionPath& join);

struct Ledger {
    int frames = 0;
    double frame_eps = 0;        // certified union of station sweeps per frame
    double frame_correction = 0; // part of frame_eps from quadrature and grid transfer
    double join_total = 0;       // sum of join budgets
    double total = 0;            // frames * frame_eps + join_total
    double slab_eps = std::numeric_limits<double>::quiet_NaN();
    long slab_visits = 0;
    long joins = 0;
};

struct StationVisit {
    int frame = 0;
    size_t station = 0;
    size_t piece = 0;
};

struct Schedule {
    MotionPath path;
    std::vector<StationVisit> visits;
    std::vector<double> piece_budget;
    Ledger ledger;
    double join_distance = 0;
};

struct PlanOptions {
    double join_distance = 1000;
    int ledger_h_grid = 64;
    int x_samples = 256;
};

// Union over a frame of the regions swept at height h by the station
// rotations, sampled on a grid of heights.
SliceCertificate station_sweep_certificate(const SlabCover& u, const std::vector<Station>& stations, int h_grid,
                                           int x_samples);

Schedule plan_full_rotation(const SlabCover& u, double target_eps, const PlanOptions& opt = {});

MotionPath project_to_square(const Schedule& s);

struct AuditRow {
    int index = 0;
    double h = 0;
    double area = 0;
    double raster_area = 0;
    double far_area = 0;
    double analytic_area = 0;
    double error_bound = 0;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    double max_area = 0;
    int argmax = -1;
    double bound = std::numeric_limits<double>::quiet_NaN();
};

AuditReport audit_square_sweep(const MotionPath& m, int n_segments, double resolution,
                               double bound = std::numeric_limits<double>::quiet_NaN());

}
