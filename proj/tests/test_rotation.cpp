#include "kakeya/errors.hpp"
#include "kakeya/rotation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace kakeya;

namespace {

constexpr double pi = std::numbers::pi;

SlabCover one_slab(PlaneTriple plane, double delta, double box)
{
    SlabCover u;
    u.delta = delta;
    u.box = Box::symmetric(box);
    Slab s;
    s.plane = plane;
    s.half_width = delta;
    s.b_lo = plane.b - 0.01;
    s.b_hi = plane.b + 0.01;
    u.slabs.push_back(s);
    return u;
}

double plane_offset(const Slab& s, const Vec3& p)
{
    return p.z - (s.plane.a + s.plane.b * p.x + s.plane.c * p.y);
}

}

TEST_CASE("interesting rectangles and square poses")
{
    Pose2 p{{0.3, -0.2}, 1.1};
    InterestingRect r = InterestingRect::from_pose(p);
    Pose2 q = r.square_pose();
    CHECK(norm(q.origin - p.origin) < 1e-15);
    CHECK(q.angle == doctest::Approx(p.angle));
    // the slice at height h lies on the square segment at height h
    for (double h : {0.0, 0.4, 1.0}) {
        SegmentPose seg = square_segment(p, h);
        Vec3 a = r.point(-0.5, h), b = r.point(0.5, h);
        CHECK(a.y == h);
        CHECK(norm(Vec2{a.x, a.z} - seg.p) < 1e-14);
        CHECK(norm(Vec2{b.x, b.z} - seg.q) < 1e-14);
    }
}

TEST_CASE("rotating a rectangle matches the square rotation")
{
    Pose2 p{{0.3, -0.2}, 1.1};
    InterestingRect r = InterestingRect::from_pose(p);
    Vec2 c{0.1, 0.7};
    Pose2 want = make_rotation(p, c, 0.4).end();
    Pose2 got = rotate_rect(r, c, 0.4).square_pose();
    CHECK(norm(want.origin - got.origin) < 1e-14);
    CHECK(want.angle == doctest::Approx(got.angle));
}

TEST_CASE("slab cover of the first stage")
{
    StageSet s1 = build_stage(1);
    SlabCover u = build_slab_cover(s1, 0.3);
    REQUIRE(u.slabs.size() == 1);
    REQUIRE_FALSE(u.directions.empty());
    CHECK(u.directions.parts().front().lo <= 0 + 0.3);
    CHECK(u.directions.parts().back().hi >= 1 - 0.3);
}

TEST_CASE("slab cover of the second stage")
{
    StageSet s2 = build_stage(2);
    SlabCover u = build_slab_cover(s2, 1.0 / 16);
    CHECK(u.slabs.size() == 8);
    for (const Slab& s : u.slabs)
        CHECK(std::abs(s.plane.c * s.plane.c - s.plane.b * s.plane.b - 1) < 1e-12);
    CHECK(u.largest_gap == doctest::Approx(1.0 / 8));
    CHECK_THROWS_AS(build_slab_cover(s2, 0.01), std::invalid_argument);
}

TEST_CASE("gap rule closes gaps and lets stations reach their bands")
{
    for (int m : {2, 3}) {
        StageSet s = build_stage(m);
        double d = gap_rule_delta(s);
        SlabCover u = build_slab_cover(s, d);
        CHECK(d >= u.largest_gap / 2);
        auto st = station_cover(u);
        CHECK(st.size() == u.slabs.size());
    }
}

TEST_CASE("single slab certificate equals the strip area")
{
    PlaneTriple plane = lift_f(0.2, 0.1);
    SlabCover u = one_slab(plane, 0.01, 2);
    SliceCertificate c = certify_slices(u, 64);
    double strip = 4 * 2 * 0.01 * (1 + 0.1);
    CHECK(c.certified_eps == doctest::Approx(strip).epsilon(1e-9));
    CHECK(c.grid_max == doctest::Approx(strip).epsilon(1e-9));
    for (double a : c.area)
        CHECK(a == doctest::Approx(strip).epsilon(1e-9));
    CHECK(u.certified_eps == c.certified_eps);
    CHECK(u.h_grid == 64);

    SlabCover twice = u;
    twice.slabs.push_back(u.slabs[0]);
    SliceCertificate c2 = certify_slices(twice, 64);
    CHECK(c2.certified_eps == doctest::Approx(c.certified_eps).epsilon(1e-12));
}

TEST_CASE("thickening transfer is never smaller than the grid value")
{
    StageSet s2 = build_stage(2);
    SlabCover u = build_slab_cover(s2, gap_rule_delta(s2));
    CertifyOptions opt;
    SliceCertificate mod = certify_slices(u, 64, opt);
    opt.transfer = GridTransfer::thickening;
    SliceCertificate thick = certify_slices(u, 64, opt);
    CHECK(thick.certified_eps >= mod.grid_max - 1e-12);
    CHECK(mod.certified_eps >= mod.grid_max);
    CHECK(mod.correction >= 0);
    CHECK_THROWS_AS(certify_slices(u, 16), std::invalid_argument);
}

TEST_CASE("stations of the second stage stay in their slabs")
{
    StageSet s2 = build_stage(2);
    SlabCover u = build_slab_cover(s2, gap_rule_delta(s2));
    auto stations = station_cover(u);
    CHECK(stations.size() <= 8 * static_cast<size_t>(std::ceil(1 / (2 * stations[0].margin * 8))));
    IntervalSet traversed;
    for (const Station& st : stations) {
        const Slab& slab = u.slabs[st.slab];
        CHECK(st.margin > 0);
        double phi = std::atan(slab.plane.b);
        traversed.add({st.b_lo, st.b_hi});
        auto inside = [&](double ang) {
            InterestingRect r = rotate_rect(st.rect, st.pivot, ang);
            for (double t : {-0.5, 0.5})
                for (double h : {0.0, 1.0})
                    CHECK(std::abs(plane_offset(slab, r.point(t, h))) <= slab.strip_half_height() * (1 + 1e-9));
        };
        double lo = std::atan(st.b_lo) - phi, hi = std::atan(st.b_hi) - phi;
        for (int k = 0; k <= 32; ++k) {
            inside(-st.margin + 2 * st.margin * k / 32);
            inside(lo + (hi - lo) * k / 32);
        }
    }
    REQUIRE(traversed.parts().size() == 1);
    CHECK(traversed.parts()[0].lo <= 0);
    CHECK(traversed.parts()[0].hi >= 1);
}

TEST_CASE("a wide slab gives one full-turn station")
{
    SlabCover u = one_slab(lift_f(0, 0), 5, 10);
    auto st = station_cover(u);
    REQUIRE(st.size() == 1);
    CHECK(st[0].margin == doctest::Approx(pi));
    Schedule sc = plan_full_rotation(u, 1e9);
    REQUIRE(sc.path.pieces.size() == 1);
    CHECK(sc.path.pieces[0].kind == PieceKind::rotate);
    CHECK(sc.path.net_rotation() == doctest::Approx(2 * pi));
}

TEST_CASE("join between parallel poses")
{
    Pose2 from{{0.2, 0.1}, 0.7};
    CHECK(pal_join(from, from, 100).empty());
    Pose2 to = from;
    to.origin = from.origin + from.normal() * 0.1;
    MotionPath j = pal_join(from, to, 100);
    REQUIRE(j.pieces.size() == 4);
    CHECK(validate_motion(j).ok);
    CHECK(norm(j.end().origin - to.origin) < 1e-12);
    CHECK(j.end().angle == doctest::Approx(to.angle));
    double gamma = 0;
    for (const MotionPiece& p : j.pieces)
        if (p.kind == PieceKind::rotate)
            gamma = std::max(gamma, std::abs(p.amount));
    CHECK(gamma == doctest::Approx(1e-3).epsilon(0.01));
    CHECK(pal_join_budget(j) == doctest::Approx(2 * gamma / 4));

    SweepOptions opt;
    opt.home_center = from.origin;
    opt.home_radius = 8;
    for (double h : {0.0, 0.5, 1.0}) {
        SegmentSweep s = segment_sweep(j, h, 4096, opt);
        CHECK(s.area() <= 2e-3);
    }
    CHECK_THROWS_AS(pal_join(from, Pose2{to.origin, 0.2}, 100), std::invalid_argument);
}

TEST_CASE("doubling the join distance halves the sweep")
{
    Pose2 from{{0, 0}, pi / 2};
    Pose2 to = from;
    to.origin = from.origin + from.normal() * 0.1;
    SweepOptions opt;
    opt.thin_analytic = true;
    opt.home_center = from.origin;
    opt.home_radius = 8;
    for (double D : {100.0, 1000.0}) {
        MotionPath a = pal_join(from, to, D), b = pal_join(from, to, 2 * D);
        for (double h : {0.25, 0.75}) {
            double sa = segment_sweep(a, h, 1024, opt).area();
            double sb = segment_sweep(b, h, 1024, opt).area();
            CHECK(sa / sb == doctest::Approx(2).epsilon(0.1));
        }
    }
}

TEST_CASE("full rotation plan for the second stage")
{
    StageSet s2 = build_stage(2);
    SlabCover u = build_slab_cover(s2, gap_rule_delta(s2));
    certify_slices(u, 64);
    Schedule sc = plan_full_rotation(u, 1e9);
    CHECK(validate_motion(sc.path).ok);
    CHECK(sc.path.net_rotation() == doctest::Approx(2 * pi).epsilon(1e-12));
    CHECK(sc.ledger.frames == 8);
    CHECK(sc.ledger.total == doctest::Approx(8 * sc.ledger.frame_eps + sc.ledger.join_total));
    CHECK(sc.ledger.total <= sc.ledger.frames * u.certified_eps + sc.ledger.join_total + 1e-9);
    CHECK(sc.piece_budget.size() == sc.path.pieces.size());
    MotionPath sq = project_to_square(sc);
    CHECK(sq.pieces.size() == sc.path.pieces.size());
    CHECK(sq.net_rotation() == doctest::Approx(2 * pi).epsilon(1e-12));

    AuditReport r = audit_square_sweep(sq, 8, 512, sc.ledger.total);
    REQUIRE(r.rows.size() == 8);
    for (const AuditRow& row : r.rows)
        CHECK(row.area <= sc.ledger.total + row.error_bound);

    CHECK_THROWS_AS(plan_full_rotation(u, 0.01), BoundError);
}

TEST_CASE("empty schedule projects to an empty motion")
{
    Schedule s;
    CHECK(project_to_square(s).empty());
}

TEST_CASE("audit of a square turning about its center")
{
    MotionPath m;
    m.pieces.push_back(make_rotation(Pose2{{0.5, 0}, pi / 2}, {0.5, 0.5}, 2 * pi));
    AuditReport r = audit_square_sweep(m, 16, 1024);
    REQUIRE(r.rows.size() == 16);
    // every segment sweeps an annulus of area pi/4
    for (const AuditRow& row : r.rows)
        CHECK(std::abs(row.area - pi / 4) <= row.error_bound);
    CHECK(r.argmax >= 0);
    CHECK(r.max_area == doctest::Approx(r.rows[static_cast<size_t>(r.argmax)].area));
}
