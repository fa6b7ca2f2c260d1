#include "kakeya/rotation.hpp"
#include "kakeya/errors.hpp"
#include "kakeya/parallel.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace kakeya {

namespace {

constexpr double pi = std::numbers::pi;

double c_of(double b)
{
    return std::sqrt(1 + b * b);
}

// Pose of the square lying in the plane (a, b) with its pivot at (0, a).
Pose2 station_pose(double a, double b, double s)
{
    double c = c_of(b);
    return {Vec2{s / c, a + s * b / c}, std::atan2(1.0, -b)};
}

// Largest |x| reached by the square of a station whose slope stays in [b0, b1].
double x_reach(double b0, double b1, double s)
{
    double r = 0;
    for (double b : {b0, b1}) {
        double c = c_of(b);
        r = std::max({r, std::abs(s + 0.5) / c, std::abs(s - 0.5 - b) / c, std::abs(s - 0.5) / c});
    }
    return r;
}

// x-range of the station square's slice at height h over slopes [b0, b1].
Interval x_window(double b0, double b1, double h, double s)
{
    double lo = 1e300, hi = -1e300;
    for (double b : {b0, b1}) {
        double c = c_of(b);
        lo = std::min(lo, (s - 0.5 - h * b) / c);
        hi = std::max(hi, (s + 0.5 - h * b) / c);
    }
    double pad = 1e-12 * (1 + std::abs(hi - lo));
    return {lo - pad, hi + pad};
}

// Slope half-range over which a station stays inside its slab.
double slope_reach(const Slab& slab, double s)
{
    double b = slab.plane.b;
    double band = slab.b_hi - slab.b_lo;
    double lever = 1 + x_reach(b - band - slab.half_width * 4, b + band + slab.half_width * 4, s);
    return slab.strip_half_height() / lever;
}

double body_radius(double s)
{
    return std::hypot(0.5 + s, 1.0);
}

bool full_turn_fits(const Slab& slab, const Box& box, double s)
{
    double R = body_radius(s);
    double a = slab.plane.a;
    bool in_box = box.x_lo <= -R && R <= box.x_hi && box.z_lo <= a - R && a + R <= box.z_hi;
    return in_box && slab.strip_half_height() >= R * (1 + std::abs(slab.plane.b)) + slab.plane.c;
}

Vec2 frame_point(int f, Vec2 p)
{
    if (f % 2)
        p = {-p.y, -p.x};
    for (int j = 0; j < f / 2; ++j)
        p = {-p.y, p.x};
    return p;
}

double frame_angle(int f, double phi)
{
    double a = (f % 2) ? 1.5 * pi - phi : phi;
    return a + (f / 2) * pi / 2;
}

Pose2 frame_pose(int f, const Pose2& p)
{
    return {frame_point(f, p.origin), frame_angle(f, p.angle)};
}

template <class Provider>
double integrate_x(Interval xr, int samples, std::vector<Interval>& scratch, Provider&& provider, double& error)
{
    if (samples % 2)
        ++samples;
    double dx = (xr.hi - xr.lo) / samples;
    std::vector<double> f(static_cast<size_t>(samples) + 1);
    for (int i = 0; i <= samples; ++i) {
        scratch.clear();
        provider(xr.lo + i * dx, scratch);
        f[static_cast<size_t>(i)] = union_measure_inplace(scratch);
    }
    double fine = 0, coarse = 0;
    for (int i = 0; i <= samples; ++i) {
        double w = (i == 0 || i == samples) ? 0.5 : 1.0;
        fine += w * f[static_cast<size_t>(i)];
        if (i % 2 == 0)
            coarse += w * f[static_cast<size_t>(i)];
    }
    fine *= dx;
    coarse *= 2 * dx;
    error = std::abs(fine - coarse);
    return fine;
}

SliceCertificate finish(std::vector<double> h, std::vector<double> area, std::vector<double> err, bool modulus)
{
    SliceCertificate c;
    c.h = std::move(h);
    c.area = std::move(area);
    c.quadrature_error = std::move(err);
    for (size_t j = 0; j < c.h.size(); ++j) {
        c.grid_max = std::max(c.grid_max, c.area[j] + c.quadrature_error[j]);
        if (modulus && j > 0)
            c.correction = std::max(c.correction, std::abs(c.area[j] - c.area[j - 1]));
    }
    c.certified_eps = c.grid_max + c.correction;
    return c;
}

}

Pose2 InterestingRect::square_pose() const
{
    return {base, theta + pi / 2};
}

InterestingRect InterestingRect::from_pose(const Pose2& p)
{
    return {p.origin, p.angle - pi / 2};
}

Vec3 InterestingRect::point(double t, double h) const
{
    Vec2 q = square_pose().body_to_world(t, h);
    return {q.x, h, q.y};
}

InterestingRect rotate_rect(const InterestingRect& r, Vec2 center, double angle)
{
    return {rotate_about(r.base, center, angle), r.theta + angle};
}

double gap_rule_delta(const StageSet& s, const StationGeometry& g)
{
    double band = s.band_height();
    double delta = band / 2;
    for (size_t n = 0; n < s.size(); ++n) {
        double b = (n + 0.5) * band;
        // reach needed: half a band; lever evaluated generously around the band
        double lever = 1 + x_reach(b - 2 * band, b + 2 * band, g.pivot_offset);
        delta = std::max(delta, lever * band / 2 / (1 + b));
    }
    // slope_reach widens its lever window by 4 delta; iterate to a fixed point
    for (int it = 0; it < 50; ++it) {
        double need = band / 2;
        for (size_t n = 0; n < s.size(); ++n) {
            double b = (n + 0.5) * band;
            double lever = 1 + x_reach(b - band - 4 * delta, b + band + 4 * delta, g.pivot_offset);
            need = std::max(need, lever * band / 2 / (1 + b));
        }
        if (need <= delta)
            break;
        delta = need;
    }
    return delta * (1 + 1e-9);
}

SlabCover build_slab_cover(const StageSet& s, double delta, double n_box, const StationGeometry& g)
{
    if (!(delta > 0))
        throw std::invalid_argument("slab half width must be positive");
    SlabCover u;
    u.delta = delta;
    u.geometry = g;
    double w = s.rect_width();
    double band = s.band_height();
    for (size_t n = 0; n < s.size(); ++n) {
        Slab slab;
        slab.plane = lift_f(s.anchors[n] + w / 2, (n + 0.5) * band);
        slab.half_width = delta;
        slab.b_lo = n * band;
        slab.b_hi = (n + 1) * band;
        u.slabs.push_back(slab);
    }
    for (size_t i = 1; i < u.slabs.size(); ++i)
        u.largest_gap = std::max(u.largest_gap, u.slabs[i].plane.b - u.slabs[i - 1].plane.b);
    if (delta < u.largest_gap / 2) {
        std::ostringstream os;
        os << "delta " << delta << " too small to close direction gaps; largest gap " << u.largest_gap;
        throw std::invalid_argument(os.str());
    }

    double extent = 0;
    for (const Slab& slab : u.slabs) {
        double rho = slope_reach(slab, g.pivot_offset);
        u.directions.add({slab.plane.b - rho, slab.plane.b + rho});
        for (double b : {slab.plane.b - rho, slab.plane.b + rho}) {
            InterestingRect r = InterestingRect::from_pose(station_pose(slab.plane.a, b, g.pivot_offset));
            for (double t : {-0.5, 0.5})
                for (double h : {0.0, 1.0}) {
                    Vec3 p = r.point(t, h);
                    extent = std::max({extent, std::abs(p.x), std::abs(p.z)});
                }
        }
    }
    u.box = Box::symmetric(n_box > 0 ? n_box : extent * (1 + 1e-9));
    return u;
}

SliceCertificate certify_slices(SlabCover& u, int h_grid, const CertifyOptions& opt)
{
    if (h_grid < 64)
        throw std::invalid_argument("certify_slices needs h_grid >= 64");
    if (u.slabs.empty())
        throw std::invalid_argument("empty slab cover");
    double dh = 1.0 / h_grid;
    double thick = opt.transfer == GridTransfer::thickening ? u.delta + dh : u.delta;
    double s = u.geometry.pivot_offset;
    std::vector<double> reach(u.slabs.size());
    for (size_t i = 0; i < u.slabs.size(); ++i)
        reach[i] = slope_reach(u.slabs[i], s);

    size_t nh = static_cast<size_t>(h_grid) + 1;
    std::vector<double> hs(nh), area(nh), err(nh);
    parallel_for(nh, [&](size_t j) {
        double h = j * dh;
        hs[j] = h;
        std::vector<Interval> scratch;
        scratch.reserve(u.slabs.size());
        std::vector<Interval> windows;
        Interval xr(u.box.x_lo, u.box.x_hi);
        if (opt.clip == SliceClip::stations) {
            double lo = 1e300, hi = -1e300;
            for (size_t i = 0; i < u.slabs.size(); ++i) {
                double b = u.slabs[i].plane.b;
                windows.push_back(x_window(b - reach[i], b + reach[i], h, s));
                lo = std::min(lo, windows.back().lo);
                hi = std::max(hi, windows.back().hi);
            }
            xr = Interval(std::max(lo, u.box.x_lo), std::min(hi, u.box.x_hi));
        }
        auto provider = [&](double x, std::vector<Interval>& out) {
            for (size_t i = 0; i < u.slabs.size(); ++i) {
                if (!windows.empty() && (x < windows[i].lo || x > windows[i].hi))
                    continue;
                const Slab& sl = u.slabs[i];
                double z = sl.plane.a + sl.plane.b * x + sl.plane.c * h;
                double hw = thick * (1 + std::abs(sl.plane.b));
                double lo = std::max(z - hw, u.box.z_lo), hi = std::min(z + hw, u.box.z_hi);
                if (lo < hi)
                    out.push_back({lo, hi});
            }
        };
        area[j] = integrate_x(xr, opt.x_samples, scratch, provider, err[j]);
    });
    SliceCertificate c = finish(hs, area, err, opt.transfer == GridTransfer::modulus);
    u.certified_eps = c.certified_eps;
    u.h_grid = h_grid;
    return c;
}

std::vector<Station> station_cover(const SlabCover& u)
{
    if (u.slabs.empty())
        throw std::invalid_argument("empty slab cover");
    double s = u.geometry.pivot_offset;
    std::vector<Station> out;
    for (size_t i = 0; i < u.slabs.size(); ++i) {
        const Slab& slab = u.slabs[i];
        double b = slab.plane.b;
        Station st;
        st.pivot = {0, slab.plane.a};
        st.rect = InterestingRect::from_pose(station_pose(slab.plane.a, b, s));
        st.b_lo = slab.b_lo;
        st.b_hi = slab.b_hi;
        st.slab = i;
        if (full_turn_fits(slab, u.box, s)) {
            st.margin = pi;
            out.push_back(st);
            continue;
        }
        double rho = slope_reach(slab, s);
        if (slab.b_lo < b - rho - 1e-12 || slab.b_hi > b + rho + 1e-12) {
            std::ostringstream os;
            os << "directions not coverable: slopes [" << slab.b_lo << ", " << b - rho << "] or [" << b + rho << ", "
               << slab.b_hi << "] lie outside station " << i;
            throw std::invalid_argument(os.str());
        }
        st.margin = std::min(std::atan(b + rho) - std::atan(b), std::atan(b) - std::atan(b - rho));
        for (double bb : {b - rho, b + rho}) {
            InterestingRect r = InterestingRect::from_pose(station_pose(slab.plane.a, bb, s));
            for (double t : {-0.5, 0.5})
                for (double h : {0.0, 1.0}) {
                    Vec3 p = r.point(t, h);
                    if (p.x < u.box.x_lo || p.x > u.box.x_hi || p.z < u.box.z_lo || p.z > u.box.z_hi) {
                        std::ostringstream os;
                        os << "station " << i << " leaves the box";
                        throw std::invalid_argument(os.str());
                    }
                }
        }
        out.push_back(st);
    }
    return out;
}

MotionPath pal_join(const Pose2& from, const Pose2& to, double D)
{
    if (std::abs(from.angle - to.angle) > 1e-9)
        throw std::invalid_argument("pal_join needs parallel poses");
    if (!(D > 0))
        throw std::invalid_argument("join distance must be positive");
    MotionPath path;
    Vec2 o = to.origin - from.origin;
    if (o.x == 0 && o.y == 0)
        return path;
    Vec2 u = from.along(), n = from.normal();
    double par = dot(o, u), perp = dot(o, n);
    double gamma = std::atan2(-perp, D - par);
    double back = std::hypot(D - par, perp);
    path.pieces.push_back(make_translation(from, u, D));
    Pose2 p1 = path.pieces.back().end();
    path.pieces.push_back(make_rotation(p1, p1.origin, gamma));
    Pose2 p2 = path.pieces.back().end();
    path.pieces.push_back(make_translation(p2, -p2.along(), back));
    Pose2 p3 = path.pieces.back().end();
    path.pieces.push_back(make_rotation(p3, p3.origin, -gamma));
    return path;
}

MotionPath pal_join(const InterestingRect& from, const InterestingRect& to, double D)
{
    return pal_join(from.square_pose(), to.square_pose(), D);
}

double pal_join_budget(const MotionPath& join)
{
    double total = 0;
    for (const MotionPiece& p : join.pieces)
        if (p.kind == PieceKind::rotate)
            total += std::abs(p.amount) / 4;
    return total;
}

SliceCertificate station_sweep_certificate(const SlabCover& u, const std::vector<Station>& stations, int h_grid,
                                           int x_samples)
{
    if (stations.empty())
        throw std::invalid_argument("no stations");
    double s = u.geometry.pivot_offset;
    double dh = 1.0 / h_grid;
    size_t nh = static_cast<size_t>(h_grid) + 1;
    std::vector<double> hs(nh), area(nh), err(nh);
    parallel_for(nh, [&](size_t j) {
        double h = j * dh;
        hs[j] = h;
        std::vector<Interval> windows;
        double lo = 1e300, hi = -1e300;
        for (const Station& st : stations) {
            windows.push_back(x_window(st.b_lo, st.b_hi, h, s));
            lo = std::min(lo, windows.back().lo);
            hi = std::max(hi, windows.back().hi);
        }
        std::vector<Interval> scratch;
        scratch.reserve(stations.size());
        auto provider = [&](double x, std::vector<Interval>& out) {
            Direction2 d{x, h};
            for (size_t i = 0; i < stations.size(); ++i) {
                if (x < windows[i].lo || x > windows[i].hi)
                    continue;
                Interval g = lifted_range(stations[i].b_lo, stations[i].b_hi, d);
                out.push_back({stations[i].pivot.y + g.lo, stations[i].pivot.y + g.hi});
            }
        };
        area[j] = integrate_x({lo, hi}, x_samples, scratch, provider, err[j]);
    });
    return finish(hs, area, err, true);
}

Schedule plan_full_rotation(const SlabCover& u, double target_eps, const PlanOptions& opt)
{
    std::vector<Station> stations = station_cover(u);
    double s = u.geometry.pivot_offset;
    double D = opt.join_distance;
    Schedule out;
    out.join_distance = D;
    out.ledger.slab_eps = u.certified_eps;

    if (stations.size() == 1 && stations[0].margin >= pi) {
        const Station& st = stations[0];
        Pose2 start = st.rect.square_pose();
        out.path.pieces.push_back(make_rotation(start, st.pivot, 2 * pi));
        // Full turn at height h: annulus between the segment's distance to the
        // pivot and its farthest endpoint.
        double worst = 0;
        for (int j = 0; j <= 64; ++j) {
            double h = j / 64.0;
            double far = std::max(std::hypot(0.5 + s, h), std::hypot(0.5 - s, h));
            worst = std::max(worst, pi * (far * far - h * h));
        }
        out.piece_budget.push_back(worst);
        out.visits.push_back({0, 0, 0});
        out.ledger.frames = 1;
        out.ledger.frame_eps = worst;
        out.ledger.total = worst;
        out.ledger.slab_visits = 1;
    } else {
        for (size_t i = 0; i < stations.size(); ++i) {
            if (i > 0 && std::abs(stations[i].b_lo - stations[i - 1].b_hi) > 1e-12)
                throw std::invalid_argument("station bands do not tile the slope interval");
        }
        if (std::abs(stations.front().b_lo) > 1e-12 || std::abs(stations.back().b_hi - 1) > 1e-12)
            throw std::invalid_argument("station bands do not span slopes [0, 1]");

        SliceCertificate cert = station_sweep_certificate(u, stations, opt.ledger_h_grid, opt.x_samples);
        out.ledger.frames = 8;
        out.ledger.frame_eps = cert.certified_eps;
        out.ledger.frame_correction = cert.certified_eps - *std::max_element(cert.area.begin(), cert.area.end());

        double station_jacobian = ((0.5 + s) * (0.5 + s) + (0.5 - s) * (0.5 - s)) / 2;
        out.path.pieces.reserve(8 * stations.size() * 5 + 8);
        out.piece_budget.reserve(out.path.pieces.capacity());
        bool have_prev = false;
        Pose2 prev_end, first_start;
        auto add_join = [&](const Pose2& from, const Pose2& to) {
            MotionPath j = pal_join(from, to, D);
            if (j.empty())
                return;
            for (const MotionPiece& p : j.pieces) {
                out.path.pieces.push_back(p);
                out.piece_budget.push_back(p.kind == PieceKind::rotate ? std::abs(p.amount) / 4 : 0.0);
            }
            out.ledger.join_total += pal_join_budget(j);
            ++out.ledger.joins;
        };
        for (int f = 0; f < 8; ++f) {
            bool reverse = f % 2;
            for (size_t k = 0; k < stations.size(); ++k) {
                const Station& st = stations[reverse ? stations.size() - 1 - k : k];
                double b_from = reverse ? st.b_hi : st.b_lo;
                double b_to = reverse ? st.b_lo : st.b_hi;
                Pose2 start = frame_pose(f, station_pose(st.pivot.y, b_from, s));
                Pose2 stop = frame_pose(f, station_pose(st.pivot.y, b_to, s));
                if (have_prev)
                    add_join(prev_end, start);
                else
                    first_start = start;
                out.visits.push_back({f, st.slab, out.path.pieces.size()});
                out.path.pieces.push_back(make_rotation(start, frame_point(f, st.pivot), stop.angle - start.angle));
                out.piece_budget.push_back(std::abs(stop.angle - start.angle) * station_jacobian);
                prev_end = out.path.pieces.back().end();
                have_prev = true;
                ++out.ledger.slab_visits;
            }
        }
        Pose2 home = first_start;
        home.angle += 2 * pi;
        prev_end.angle = home.angle;
        add_join(prev_end, home);
        out.ledger.total = out.ledger.frames * out.ledger.frame_eps + out.ledger.join_total;
    }

    if (out.ledger.total > target_eps) {
        std::ostringstream os;
        os.precision(6);
        os << "target sweep " << target_eps << " not reachable with this cover; achievable eps = " << out.ledger.total;
        throw BoundError(os.str());
    }
    return out;
}

MotionPath project_to_square(const Schedule& s)
{
    return s.path;
}

AuditReport audit_square_sweep(const MotionPath& m, int n_segments, double resolution, double bound)
{
    if (n_segments < 1)
        throw std::invalid_argument("audit needs at least one segment");
    if (!(resolution >= 256))
        throw std::invalid_argument("raster resolution must be at least 256 cells per unit");
    AuditReport report;
    report.bound = bound;
    report.rows.resize(static_cast<size_t>(n_segments));
    SweepOptions opt;
    if (!m.empty()) {
        opt.home_center = m.start().origin;
        opt.home_radius = 8;
    }
    parallel_for(report.rows.size(), [&](size_t i) {
        AuditRow& row = report.rows[i];
        row.index = static_cast<int>(i);
        row.h = (i + 0.5) / n_segments;
        SegmentSweep sw = segment_sweep(m, row.h, resolution, opt);
        row.area = sw.area();
        row.raster_area = sw.raster_area;
        row.far_area = sw.far_area;
        row.analytic_area = sw.analytic_area;
        row.error_bound = sw.error_bound;
    });
    for (const AuditRow& row : report.rows) {
        if (report.argmax < 0 || row.area > report.max_area) {
            report.max_area = row.area;
            report.argmax = row.index;
        }
    }
    return report;
}

}
