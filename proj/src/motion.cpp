#include "kakeya/motion.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace kakeya {

SegmentPose square_segment(const Pose2& pose, double h, double t0, double t1)
{
    return {pose.body_to_world(t0, h), pose.body_to_world(t1, h)};
}

Pose2 MotionPiece::at(double f) const
{
    if (kind == PieceKind::translate)
        return {start.origin + vec * (amount * f), start.angle};
    return {rotate_about(start.origin, vec, amount * f), start.angle + amount * f};
}

Pose2 MotionPiece::end() const
{
    return at(1.0);
}

MotionPiece make_translation(const Pose2& start, Vec2 direction, double length)
{
    double n = norm(direction);
    if (!(n > 0))
        throw std::invalid_argument("translation with zero direction");
    return {PieceKind::translate, start, direction / n, length};
}

MotionPiece make_rotation(const Pose2& start, Vec2 center, double angle)
{
    return {PieceKind::rotate, start, center, angle};
}

double MotionPath::net_rotation() const
{
    double total = 0;
    for (const MotionPiece& p : pieces)
        if (p.kind == PieceKind::rotate)
            total += p.amount;
    return total;
}

double MotionPath::total_translation() const
{
    double total = 0;
    for (const MotionPiece& p : pieces)
        if (p.kind == PieceKind::translate)
            total += std::abs(p.amount);
    return total;
}

void MotionPath::append(const MotionPath& other)
{
    pieces.insert(pieces.end(), other.pieces.begin(), other.pieces.end());
}

ValidationReport validate_motion(const MotionPath& path, double tol)
{
    auto finite = [](double v) { return std::isfinite(v); };
    for (size_t i = 0; i < path.pieces.size(); ++i) {
        const MotionPiece& p = path.pieces[i];
        if (!finite(p.start.origin.x) || !finite(p.start.origin.y) || !finite(p.start.angle) || !finite(p.vec.x) ||
            !finite(p.vec.y) || !finite(p.amount))
            return {false, static_cast<long>(i), "non-finite value"};
        if (p.kind == PieceKind::translate && std::abs(norm(p.vec) - 1) > 1e-9)
            return {false, static_cast<long>(i), "translation direction is not a unit vector"};
        if (i + 1 < path.pieces.size()) {
            Pose2 e = p.end();
            const Pose2& s = path.pieces[i + 1].start;
            double scale = 1 + std::max(norm(e.origin), norm(s.origin));
            if (norm(e.origin - s.origin) > tol * scale || std::abs(e.angle - s.angle) > tol * (1 + std::abs(e.angle))) {
                std::ostringstream os;
                os << "piece " << i + 1 << " does not start where piece " << i << " ends";
                return {false, static_cast<long>(i + 1), os.str()};
            }
        }
    }
    return {};
}

double rotating_segment_area(Vec2 p, Vec2 q, Vec2 center, double angle)
{
    double g = std::abs(angle);
    if (g > std::numbers::pi + 1e-12)
        throw std::invalid_argument("rotating_segment_area needs |angle| <= pi");
    Vec2 d = q - p;
    double len = norm(d);
    if (len == 0 || g == 0)
        return 0;
    Vec2 u = d / len;
    double tp = dot(p - center, u);
    double tq = tp + len;
    double h = std::abs(cross(u, p - center));
    if (tp >= 0 || tq <= 0)
        return g * std::abs(tq * tq - tp * tp) / 2;
    double area = g * (tp * tp + tq * tq) / 2;
    if (h == 0)
        return area;
    double reach = std::sqrt(h * h + std::min(tp * tp, tq * tq));
    double c = std::cos(g / 2);
    double r1 = c > 0 ? std::min(h / c, reach) : reach;
    if (r1 <= h)
        return area;
    auto F = [h](double r) { return r * r / 2 * std::acos(std::min(1.0, h / r)) - h / 2 * std::sqrt(r * r - h * h); };
    double overlap = g * (r1 * r1 - h * h) / 2 - 2 * F(r1);
    return area - std::max(0.0, overlap);
}

SweepArea swept_region_area(std::span<const SegmentPose> poses, double resolution)
{
    if (!(resolution >= 256))
        throw std::invalid_argument("raster resolution must be at least 256 cells per unit");
    Raster r(resolution);
    for (size_t i = 1; i < poses.size(); ++i)
        r.fill_quad(poses[i - 1], poses[i]);
    return {r.area(), r.boundary_allowance(), r.count()};
}

namespace {

// Rasterizes the sweep of one piece, sub-stepping rotations so consecutive
// positions move less than a cell.
void rasterize_piece(const MotionPiece& piece, const SegmentPose& s0, Raster& raster)
{
    if (piece.kind == PieceKind::translate) {
        Vec2 shift = piece.vec * piece.amount;
        raster.fill_quad(s0, {s0.p + shift, s0.q + shift});
        return;
    }
    double g = piece.amount;
    double rho = std::max(norm(s0.p - piece.vec), norm(s0.q - piece.vec));
    long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(g) * rho * raster.resolution())));
    SegmentPose prev = s0;
    for (long k = 1; k <= steps; ++k) {
        double a = g * k / steps;
        SegmentPose cur{rotate_about(s0.p, piece.vec, a), rotate_about(s0.q, piece.vec, a)};
        raster.fill_quad(prev, cur);
        prev = cur;
    }
}

}

void accumulate_segment_sweep(const MotionPath& path, double h, double t0, double t1, Raster& raster,
                              SegmentSweep& acc, const SweepOptions& opt)
{
    double cell_area = raster.cell() * raster.cell();
    double threshold = opt.subcell_fraction * cell_area;
    std::vector<std::pair<uint64_t, size_t>> far;
    auto group_key = [&opt](Vec2 p) {
        auto gx = static_cast<int64_t>(std::floor(p.x / opt.group_size));
        auto gy = static_cast<int64_t>(std::floor(p.y / opt.group_size));
        return (static_cast<uint64_t>(static_cast<uint32_t>(gx)) << 32) | static_cast<uint32_t>(gy);
    };

    for (size_t i = 0; i < path.pieces.size(); ++i) {
        const MotionPiece& piece = path.pieces[i];
        if (piece.amount == 0)
            continue;
        SegmentPose s0 = square_segment(piece.start, h, t0, t1);
        double reach;
        Vec2 anchor;
        if (piece.kind == PieceKind::translate) {
            Vec2 seg = s0.q - s0.p;
            double area = std::abs(cross(piece.vec * piece.amount, seg));
            if (area <= 1e-12 * norm(seg) * std::abs(piece.amount))
                continue;
            if (area < threshold || (opt.thin_analytic && area < norm(seg) * raster.cell())) {
                acc.analytic_area += area;
                continue;
            }
            anchor = (s0.p + s0.q) * 0.5 + piece.vec * (piece.amount / 2);
            reach = (norm(seg) + std::abs(piece.amount)) / 2;
        } else {
            if (std::abs(piece.amount) <= std::numbers::pi) {
                double area = rotating_segment_area(s0.p, s0.q, piece.vec, piece.amount);
                double width = std::abs(piece.amount) * std::max(norm(s0.p - piece.vec), norm(s0.q - piece.vec));
                if (area < threshold || (opt.thin_analytic && width < raster.cell())) {
                    acc.analytic_area += area;
                    continue;
                }
            }
            anchor = piece.vec;
            reach = std::max(norm(s0.p - piece.vec), norm(s0.q - piece.vec));
        }
        if (norm(anchor - opt.home_center) - reach > opt.home_radius)
            far.emplace_back(group_key(anchor), i);
        else
            rasterize_piece(piece, s0, raster);
    }

    if (far.empty())
        return;
    std::sort(far.begin(), far.end());
    Raster scratch(raster.resolution());
    for (size_t i = 0; i < far.size();) {
        size_t j = i;
        scratch.clear();
        for (; j < far.size() && far[j].first == far[i].first; ++j) {
            const MotionPiece& piece = path.pieces[far[j].second];
            rasterize_piece(piece, square_segment(piece.start, h, t0, t1), scratch);
        }
        acc.far_area += scratch.area();
        acc.error_bound += scratch.boundary_allowance();
        i = j;
    }
}

SegmentSweep segment_sweep(const MotionPath& path, double h, double resolution, const SweepOptions& opt)
{
    Raster r(resolution);
    SegmentSweep acc;
    accumulate_segment_sweep(path, h, -0.5, 0.5, r, acc, opt);
    acc.raster_area = r.area();
    acc.error_bound += r.boundary_allowance();
    return acc;
}

}
