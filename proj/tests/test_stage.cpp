#include "kakeya/errors.hpp"
#include "kakeya/stage.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace kakeya;

namespace {

struct Node {
    int gen;
    Parallelogram p;
};

std::vector<Node> all_nodes(const AxisRect& r, int k, double eps, int64_t N)
{
    std::vector<Node> out;
    sprout_visit(r, k, eps, N, [&](int gen, const Parallelogram& p) { out.push_back({gen, p}); });
    return out;
}

double b_low(const Parallelogram& p)
{
    double lo = 1e300;
    for (Vec2 v : p.vertices())
        lo = std::min(lo, v.y);
    return lo;
}

}

TEST_CASE("initial stage")
{
    StageSet s = initial_stage();
    CHECK(s.m == 1);
    CHECK(s.eps == 1);
    CHECK(s.N == 1);
    REQUIRE(s.size() == 1);
    AxisRect r = s.rect(0);
    CHECK(r.a0 == 0);
    CHECK(r.a1 == 1);
    CHECK(r.b0 == 0);
    CHECK(r.b1 == 1);
    CHECK(s.a_projection() == 1);
}

TEST_CASE("schedule arithmetic for the first two stages")
{
    StageParams p1 = schedule_params(1, 1, 1);
    CHECK(p1.k_m == 2);
    CHECK(p1.eps_next == doctest::Approx(1.0 / 3));
    CHECK(p1.N_next == 8);

    StageOptions plain;
    plain.containment = false;
    StageParams p2 = schedule_params(2, 1.0 / 3, 8, plain);
    CHECK(p2.k_m == 12);
    CHECK(p2.eps_next == doctest::Approx(0.25));
    CHECK(p2.N_next == 32768);

    // Keeping every new rectangle inside its leaf needs a larger multiple.
    StageParams p2c = schedule_params(2, 1.0 / 3, 8);
    CHECK(p2c.k_m == 12);
    CHECK(p2c.N_next % 32768 == 0);
    CHECK(p2c.N_next == 7 * 32768);

    for (const StageParams& p : {p1, p2, p2c}) {
        CHECK(p.k_m * p.eps_m >= 2.0 * p.m - 1e-12);
        CHECK(p.N_next >= 2.0 * p.m / p.eps_next);
        CHECK(p.conforming);
    }
}

TEST_CASE("default width rule")
{
    StageOptions opt;
    CHECK(opt.eps_for(1) == 1);
    CHECK(opt.eps_for(2) == doctest::Approx(1.0 / 3));
    CHECK(opt.eps_for(3) == doctest::Approx(0.25));
    opt.eps_rule = [](int m) { return 0.5 / (m + 1); };
    CHECK(opt.eps_for(3) == doctest::Approx(0.125));
}

TEST_CASE("first split of the unit square")
{
    Parallelogram sq({0, 0}, {1, 0}, {0, 1});
    auto [lower, upper] = split_step(sq, 1, 1, 1);
    for (const Parallelogram& c : {lower, upper}) {
        CHECK(c.width() == doctest::Approx(0.5));
        CHECK(c.height() == doctest::Approx(0.5));
        CHECK(std::abs(c.side_tangent()) == doctest::Approx(0.5));
    }
    CHECK(b_low(lower) == doctest::Approx(0));
    CHECK(b_low(upper) == doctest::Approx(0.5));
    CHECK(sq.side_tangent() == 0);
    for (const Parallelogram& c : {lower, upper})
        for (Vec2 v : c.vertices())
            CHECK(sq.contains(v, 1e-12));
}

TEST_CASE("sprouting once gives the split")
{
    AxisRect r(0, 1, 0, 1);
    auto leaves = sprout(r, 1, 1, 1);
    REQUIRE(leaves.size() == 2);
    auto [lower, upper] = split_step(Parallelogram({0, 0}, {1, 0}, {0, 1}), 1, 1, 1);
    std::sort(leaves.begin(), leaves.end(), [](auto& x, auto& y) { return b_low(x) < b_low(y); });
    for (auto [got, want] : {std::pair{leaves[0], lower}, std::pair{leaves[1], upper}})
        for (size_t i = 0; i < 4; ++i) {
            CHECK(got.vertices()[i].x == doctest::Approx(want.vertices()[i].x));
            CHECK(got.vertices()[i].y == doctest::Approx(want.vertices()[i].y));
        }
}

TEST_CASE("leaves reach tangent m and partition the band")
{
    for (int m : {1, 2}) {
        StageSet s = build_stage(m);
        StageParams p = schedule_params(m, s.eps, s.N);
        AxisRect r = s.rect(0);
        auto leaves = sprout(r, p.k_m, s.eps, s.N);
        REQUIRE(leaves.size() == (size_t(1) << p.k_m));
        std::vector<double> lows;
        for (const Parallelogram& l : leaves) {
            CHECK(l.side_tangent() >= m - 1e-12);
            CHECK(l.height() == doctest::Approx(std::ldexp(1.0, -p.k_m) / s.N).epsilon(1e-12));
            lows.push_back(b_low(l));
        }
        std::sort(lows.begin(), lows.end());
        double step = std::ldexp(1.0, -p.k_m) / s.N;
        for (size_t j = 0; j < lows.size(); ++j)
            CHECK(std::abs(lows[j] - (r.b0 + j * step)) < 1e-12);
    }
}

TEST_CASE("generation invariants across sprouted families")
{
    for (int m : {1, 2}) {
        StageSet s = build_stage(m);
        StageParams p = schedule_params(m, s.eps, s.N);
        for (size_t n : {size_t(0), s.size() / 2, s.size() - 1}) {
            for (const Node& node : all_nodes(s.rect(n), p.k_m, s.eps, s.N)) {
                double tang = node.gen * s.eps / 2;
                double w = std::ldexp(s.eps / s.N, -node.gen), h = std::ldexp(1.0 / s.N, -node.gen);
                CHECK(std::abs(std::abs(node.p.side_tangent()) - tang) <= 1e-12);
                CHECK(std::abs(node.p.width() - w) <= 1e-12);
                CHECK(std::abs(node.p.height() - h) <= 1e-12);
            }
        }
    }
}

TEST_CASE("discretizing the unit square leaf")
{
    Parallelogram sq({0, 0}, {1, 0}, {0, 1});
    auto rects = discretize_leaf(sq, 2, 0.5);
    REQUIRE(rects.size() == 2);
    for (const AxisRect& r : rects) {
        CHECK(r.width() == doctest::Approx(0.25));
        CHECK(r.height() == doctest::Approx(0.5));
        CHECK(r.a0 == doctest::Approx(0));
    }
    CHECK(rects[0].b0 == 0);
    CHECK(rects[1].b0 == doctest::Approx(0.5));
}

TEST_CASE("discretized rectangles stay inside a slanted leaf")
{
    Parallelogram leaf({0.2, 0.25}, {0.125, 0}, {0.25 * 1.5, 0.25});
    auto rects = discretize_leaf(leaf, 64, 0.05);
    CHECK(rects.size() == 16);
    double lo = 1, hi = 0;
    for (const AxisRect& r : rects) {
        for (Vec2 v : r.vertices())
            CHECK(leaf.contains(v, 1e-12));
        lo = std::min(lo, r.b0);
        hi = std::max(hi, r.b1);
    }
    CHECK(lo == doctest::Approx(0.25));
    CHECK(hi == doctest::Approx(0.5));
}

TEST_CASE("advancing the initial stage")
{
    StageSet s2 = advance_stage(initial_stage());
    CHECK(s2.m == 2);
    CHECK(s2.N == 8);
    CHECK(s2.size() == 8);
    CHECK(s2.a_projection() <= 0.5);
    CHECK(s2.a_projection() <= s2.eps * (1 + 1e-12));
    REQUIRE(s2.parent);
    CHECK(s2.parent->k_m == 2);
    for (size_t n = 0; n < s2.size(); ++n) {
        AxisRect r = s2.rect(n);
        CHECK(r.b0 == doctest::Approx(n / 8.0));
        CHECK(r.width() == doctest::Approx(1.0 / 24));
        CHECK(r.a0 >= -1e-12);
        CHECK(r.a1 <= 1 + 1e-12);
    }
}

TEST_CASE("stages decrease and their a-projections obey the bound")
{
    StageSet s2 = build_stage(2);
    StageSet s3 = build_stage(3);
    CHECK(s3.N == 229376);
    CHECK(s3.a_projection() <= 1.0 / 3);
    CHECK(s3.a_projection() <= s2.a_projection());
    CHECK(s3.conforming);
    int64_t ratio = s3.N / s2.N;
    for (size_t n = 0; n < s3.size(); ++n) {
        AxisRect r = s3.rect(n);
        AxisRect parent = s2.rect(n / static_cast<size_t>(ratio));
        CHECK(r.b0 >= parent.b0 - 1e-12);
        CHECK(r.b1 <= parent.b1 + 1e-12);
        if (r.a0 < parent.a0 - 1e-12 || r.a1 > parent.a1 + 1e-12) {
            FAIL("stage 3 rectangle " << n << " leaves its stage 2 rectangle");
            break;
        }
    }
}

TEST_CASE("reflection")
{
    AxisRect r(0, 0.1, 0, 0.5);
    AxisRect f = reflect_S(r);
    CHECK(f.a0 == 0);
    CHECK(f.a1 == 0.1);
    CHECK(f.b0 == 0.5);
    CHECK(f.b1 == 1);
    StageSet s = build_stage(2);
    StageSet back = reflect_S(reflect_S(s));
    CHECK(back.anchors == s.anchors);
    StageSet once = reflect_S(s);
    CHECK(once.rect(0).b0 == 0);
    CHECK(once.rect(once.size() - 1).b1 == doctest::Approx(1));
    CHECK(once.a_projection() == doctest::Approx(s.a_projection()).epsilon(1e-15));
}

TEST_CASE("budget guard")
{
    StageOptions opt;
    opt.budget = 1000;
    CHECK_THROWS_AS(build_stage(3, opt), BudgetError);
    CHECK_THROWS_AS(schedule_params(2, 1.0 / 3, 8, opt), BudgetError);
    CHECK_THROWS_AS(sprout(AxisRect(0, 1, 0, 1), 20, 1, 1, 1000), BudgetError);
    CHECK_THROWS_AS(build_stage(4), BudgetError);
}

TEST_CASE("relaxed depth marks stages non-conforming")
{
    StageOptions opt;
    opt.relaxed_k = 1;
    StageSet s = build_stage(2, opt);
    CHECK_FALSE(s.conforming);
    CHECK(build_stage(2).conforming);
}

TEST_CASE("invalid parameters")
{
    CHECK_THROWS_AS(schedule_params(0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(schedule_params(2, 0.9, 8), std::invalid_argument);
    CHECK_THROWS_AS(split_step(Parallelogram({0, 0}, {1, 0}, {0, 1}), 0, 1, 1), std::invalid_argument);
}
