#pragma once

#include "kakeya/geometry.hpp"
#include "kakeya/stage.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kakeya {

// Plane z = a + b x + c y, kept on the sheet c^2 - b^2 = 1, c > 0.
struct PlaneTriple {
    double a = 0, b = 0, c = 1;

    PlaneTriple() = default;
    PlaneTriple(double a_, double b_, double c_);
};

PlaneTriple lift_f(double a, double b);

// Direction (1, x, y) of the line family the planes are projected along.
struct Direction2 {
    double x = 0, y = 0;
};

// Projection of the lifted point (a, b) along direction d.
double lifted_projection(double a, double b, Direction2 d);

// Range of x b + y sqrt(1 + b^2) for b in [b0, b1].
Interval lifted_range(double b0, double b1, Direction2 d);

// Slope of the line x * X + y * Y = const (in the (x, y) plane of planes)
// traced by the plane with slope b: -x - y b / sqrt(1 + b^2).
double tangent_slope(Direction2 d, double b);

// Half-line of b values on which the tangent slope is non-negative.
struct HalfPlaneF {
    enum class Kind { all, empty, b_at_most, b_at_least };
    Kind kind = Kind::all;
    double threshold = 0;

    bool contains(double b) const;
    // Restriction of [b0, b1] to this set; empty optional when the overlap has no length.
    std::optional<Interval> clip(double b0, double b1) const;
};

HalfPlaneF region_F(Direction2 d);

Interval project_lifted_rect(const AxisRect& r, Direction2 d);

double stage_projection_measure(const StageSet& s, Direction2 d, const std::optional<HalfPlaneF>& clip = std::nullopt);

// Same measure restricted to the complement of the clip set.
double stage_projection_measure_complement(const StageSet& s, Direction2 d, const HalfPlaneF& clip);

struct McEstimate {
    double estimate = 0;
    double standard_error = 0;
    double ci = 0;  // half width: 3 standard errors plus the bin edge allowance
    int runs = 0;
};

// Histogram estimate of the projection measure from area-weighted samples.
McEstimate mc_oracle(const StageSet& s, Direction2 d, uint64_t samples, int bins, uint64_t seed,
                     const std::optional<HalfPlaneF>& clip = std::nullopt);

// Hit-or-miss estimate: uniform points of the projection hull tested for
// membership in some projected rectangle. Unbiased, ci = 3 standard errors.
// Stays consistent on stages whose projection is finely fragmented, where
// the covered-bin histogram overcounts.
McEstimate mc_hit_oracle(const StageSet& s, Direction2 d, uint64_t samples, uint64_t seed,
                         const std::optional<HalfPlaneF>& clip = std::nullopt);

struct ClaimRow {
    double x = 0, y = 0;
    double measured = 0;            // projection measure of the part over F
    double measured_complement = 0; // projection measure of the rest
    double bound = 0;
    bool covered = false;
    bool pass = false;
};

std::vector<double> claim_grid_axis(int points, double limit);

// Checks the projection measure of the stage over F against the bound from the
// previous stage's width and depth, on a points x points grid inside |x|,|y| < m.
std::vector<ClaimRow> claim_report(const StageSet& s, int points);

// Mid segment [A, B] of a parallelogram with horizontal bottom edge, scaled
// about its midpoint.
std::pair<Vec2, Vec2> scaled_mid_segment(const Parallelogram& p, double factor);

// True when every line through a vertex of the given parallelograms with side
// tangent in [lo, hi] meets the height of segment ab inside [a, b].
bool verify_funnel(Vec2 a, Vec2 b, std::span<const Parallelogram> family, double lo, double hi);

}
