#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kakeya/kakeya.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const double pi = 3.14159265358979323846;

fs::path fresh_dir(const char* name)
{
    fs::path p = fs::current_path() / "capi_work" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}

TEST_CASE("version and error state")
{
    CHECK(std::string(kk_version()) == "0.1.0");
    CHECK(kk_stage_build(0, nullptr, nullptr) == KK_ERR_INVALID);
    CHECK(std::string(kk_last_error()).size() > 0);
    kk_stage* s = nullptr;
    REQUIRE(kk_stage_build(1, nullptr, &s) == KK_OK);
    CHECK(std::string(kk_last_error()).empty());
    kk_stage_free(s);
    kk_stage_free(nullptr);
    CHECK(kk_set_threads(-1) == KK_ERR_INVALID);
    CHECK(kk_set_threads(0) == KK_OK);
}

TEST_CASE("stages through the C interface")
{
    fs::path dir = fresh_dir("stages");
    kk_stage* s = nullptr;
    REQUIRE(kk_stage_build(2, (dir / "cache").c_str(), &s) == KK_OK);
    kk_stage_info info{};
    REQUIRE(kk_stage_get_info(s, &info) == KK_OK);
    CHECK(info.m == 2);
    CHECK(info.N == 8);
    CHECK(info.eps == doctest::Approx(1.0 / 3));
    CHECK(info.conforming == 1);
    CHECK(info.a_projection <= 0.5);
    CHECK(!fs::is_empty(dir / "cache"));

    double r[4];
    REQUIRE(kk_stage_rect(s, 3, r) == KK_OK);
    CHECK(r[2] == doctest::Approx(3.0 / 8));
    CHECK(r[1] - r[0] == doctest::Approx(1.0 / 24));
    CHECK(kk_stage_rect(s, 8, r) == KK_ERR_INVALID);

    std::string path = (dir / "s2.json").string();
    REQUIRE(kk_stage_save(s, path.c_str()) == KK_OK);
    kk_stage* back = nullptr;
    REQUIRE(kk_stage_load(path.c_str(), &back) == KK_OK);
    double m1 = 0, m2 = 0;
    REQUIRE(kk_stage_measure(s, 0.2, -0.1, KK_CLIP_NONE, &m1) == KK_OK);
    REQUIRE(kk_stage_measure(back, 0.2, -0.1, KK_CLIP_NONE, &m2) == KK_OK);
    CHECK(m1 == m2);
    double in = 0, out = 0;
    REQUIRE(kk_stage_measure(s, 0.2, -0.1, KK_CLIP_F, &in) == KK_OK);
    REQUIRE(kk_stage_measure(s, 0.2, -0.1, KK_CLIP_COMPLEMENT, &out) == KK_OK);
    CHECK(m1 <= in + out + 1e-12);
    CHECK(kk_stage_measure(s, 0, 0, static_cast<kk_clip>(9), &in) == KK_ERR_INVALID);

    kk_mc_result mc{};
    REQUIRE(kk_stage_mc(s, 0, 0, 50000, 256, 4, &mc) == KK_OK);
    double exact = 0;
    kk_stage_measure(s, 0, 0, KK_CLIP_NONE, &exact);
    CHECK(std::abs(mc.estimate - exact) <= mc.ci);

    kk_claim_summary cs{};
    std::string csv = (dir / "claim.csv").string();
    CHECK(kk_claim(s, 5, csv.c_str(), &cs) == KK_OK);
    CHECK(cs.rows == 25);
    CHECK(cs.failures == 0);
    CHECK(slurp(csv).rfind("x,y,measured,bound,covered_by_claim,pass\n", 0) == 0);

    std::string svg = (dir / "s2.svg").string();
    CHECK(kk_stage_write_svg(s, svg.c_str()) == KK_OK);
    CHECK(fs::file_size(svg) > 0);

    kk_stage* one = nullptr;
    REQUIRE(kk_stage_build(1, nullptr, &one) == KK_OK);
    CHECK(kk_claim(one, 5, nullptr, &cs) == KK_ERR_INVALID);
    kk_stage_free(one);
    kk_stage_free(back);
    kk_stage_free(s);
}

TEST_CASE("error codes")
{
    kk_stage* s = nullptr;
    CHECK(kk_stage_load("/nonexistent/dir/stage.json", &s) == KK_ERR_IO);
    CHECK(s == nullptr);
    CHECK(kk_stage_get_info(nullptr, nullptr) == KK_ERR_INVALID);

    fs::path dir = fresh_dir("errors");
    std::string junk = (dir / "junk.json").string();
    std::ofstream(junk) << "{\"schema\": 3}";
    CHECK(kk_stage_load(junk.c_str(), &s) == KK_ERR_INVALID);

    REQUIRE(kk_set_budget(100) == KK_OK);
    CHECK(kk_stage_build(3, nullptr, &s) == KK_ERR_BUDGET);
    CHECK(std::string(kk_last_error()).find("budget") != std::string::npos);
    REQUIRE(kk_set_budget(0) == KK_OK);

    kk_stage* s2 = nullptr;
    REQUIRE(kk_stage_build(2, nullptr, &s2) == KK_OK);
    kk_cover* c = nullptr;
    CHECK(kk_cover_build(s2, 0.001, 0, &c) == KK_ERR_INVALID);
    kk_stage_free(s2);
}

TEST_CASE("covers, schedules and audits")
{
    fs::path dir = fresh_dir("schedules");
    kk_stage* s = nullptr;
    REQUIRE(kk_stage_build(1, nullptr, &s) == KK_OK);
    kk_cover* c = nullptr;
    REQUIRE(kk_cover_build(s, 0, 0, &c) == KK_OK);
    kk_cover_info ci{};
    REQUIRE(kk_cover_get_info(c, &ci) == KK_OK);
    CHECK(ci.slabs >= 1);
    CHECK(ci.delta > 0);
    CHECK(std::isnan(ci.certified_eps));
    double eps = 0;
    REQUIRE(kk_cover_certify(c, 64, KK_TRANSFER_MODULUS, &eps) == KK_OK);
    REQUIRE(kk_cover_get_info(c, &ci) == KK_OK);
    CHECK(ci.certified_eps == eps);
    CHECK(ci.h_grid == 64);

    kk_schedule* tight = nullptr;
    CHECK(kk_plan_square(c, 1e-3, 1000, 64, &tight) == KK_ERR_BOUND);
    CHECK(tight == nullptr);

    kk_schedule* sc = nullptr;
    REQUIRE(kk_plan_square(c, INFINITY, 1000, 64, &sc) == KK_OK);
    kk_schedule_info si{};
    REQUIRE(kk_schedule_get_info(sc, &si) == KK_OK);
    CHECK(si.valid == 1);
    CHECK(si.pieces > 0);
    CHECK(si.net_rotation == doctest::Approx(2 * pi).epsilon(1e-12));
    CHECK(si.frames == 8);
    CHECK(si.ledger_total == doctest::Approx(si.frames * si.frame_eps + si.join_total));
    CHECK(si.join_distance == 1000);

    std::string path = (dir / "sched.json").string();
    REQUIRE(kk_schedule_save(sc, path.c_str()) == KK_OK);
    kk_schedule* back = nullptr;
    REQUIRE(kk_schedule_load(path.c_str(), &back) == KK_OK);
    kk_schedule_info bi{};
    REQUIRE(kk_schedule_get_info(back, &bi) == KK_OK);
    CHECK(bi.pieces == si.pieces);
    CHECK(bi.ledger_total == si.ledger_total);

    kk_audit_summary as{};
    std::string csv = (dir / "audit.csv").string();
    CHECK(kk_schedule_audit(back, 4, 512, -1, csv.c_str(), &as) == KK_OK);
    CHECK(as.segments == 4);
    CHECK(as.pass == 1);
    CHECK(as.bound == si.ledger_total);
    CHECK(as.max_area <= as.bound + as.tolerance);
    CHECK(slurp(csv).rfind("segment_index,area,bound\n", 0) == 0);
    CHECK(kk_schedule_audit(back, 4, 512, 1e-6, nullptr, &as) == KK_ERR_BOUND);
    CHECK(as.pass == 0);
    CHECK(kk_schedule_audit(back, 4, 100, -1, nullptr, &as) == KK_ERR_INVALID);

    fs::path frames = dir / "frames";
    CHECK(kk_schedule_render(back, frames.c_str(), 0.5, 3, 0) == KK_OK);
    CHECK(fs::exists(frames / "index.html"));

    kk_schedule_free(back);
    kk_schedule_free(sc);
    kk_cover_free(c);
    kk_stage_free(s);
}

TEST_CASE("needles through the C interface")
{
    fs::path dir = fresh_dir("needles");
    double n1[3] = {0, 0, 1}, n2[3] = {1, 0, 0}, p1[3] = {1, 0, 0}, p2[3] = {0, 1, 0};
    kk_needle_summary ns{};
    std::string json = (dir / "n.json").string();
    REQUIRE(kk_plan_needles(n1, n2, p1, p2, json.c_str(), &ns) == KK_OK);
    CHECK(ns.t == doctest::Approx(pi / 2));
    CHECK(ns.steps <= 3);
    CHECK(ns.error1 <= 1e-9);
    CHECK(ns.error2 <= 1e-9);
    CHECK(fs::file_size(json) > 0);

    double scaled[3] = {0, 0, 5};
    CHECK(kk_plan_needles(scaled, n2, p1, p2, nullptr, &ns) == KK_OK);
    double off[3] = {1, 1, 0};
    CHECK(kk_plan_needles(n1, n2, p1, off, nullptr, &ns) == KK_ERR_INVALID);

    REQUIRE(kk_plan_needles_random(1.0, 7, nullptr, &ns) == KK_OK);
    CHECK(ns.t == doctest::Approx(1.0));
    CHECK(ns.steps <= ns.step_bound);
    CHECK(ns.max_drift <= 1e-12);
}

TEST_CASE("small cylinder sweep")
{
    fs::path dir = fresh_dir("sweep");
    kk_stage* s = nullptr;
    REQUIRE(kk_stage_build(1, nullptr, &s) == KK_OK);
    kk_cover* c = nullptr;
    REQUIRE(kk_cover_build(s, 0, 0, &c) == KK_OK);
    kk_schedule* sc = nullptr;
    REQUIRE(kk_plan_square(c, INFINITY, 1000, 64, &sc) == KK_OK);
    kk_schedule_info si{};
    kk_schedule_get_info(sc, &si);

    kk_volume_summary vs{};
    std::string csv = (dir / "vol.csv").string(), vox = (dir / "cyl.kkvox").string();
    CHECK(kk_sweep_cylinder(sc, 0.25, 2, 1.0 / 32, 256, csv.c_str(), vox.c_str(), &vs) == KK_OK);
    CHECK(vs.slices == 2);
    CHECK(vs.max_lines == 2);
    CHECK(vs.x_extent == doctest::Approx(0.5));
    CHECK(vs.bound == doctest::Approx(vs.max_lines * si.ledger_total * vs.x_extent));
    CHECK(vs.volume <= vs.bound + vs.tolerance);
    CHECK(vs.pass == 1);
    CHECK(slurp(vox).rfind("KKVOX 1\n", 0) == 0);
    CHECK(slurp(csv).rfind("x,area\n", 0) == 0);
    CHECK(kk_sweep_cylinder(sc, 0.75, 2, 1.0 / 32, 256, nullptr, nullptr, &vs) == KK_ERR_INVALID);

    kk_schedule_free(sc);
    kk_cover_free(c);
    kk_stage_free(s);
}
