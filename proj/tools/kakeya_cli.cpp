#include "kakeya/kakeya.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_bound = 2;

int report(kk_status st, const char* what)
{
    if (st == KK_OK)
        return exit_ok;
    std::fprintf(stderr, "%s: %s\n", what, kk_last_error());
    return st == KK_ERR_BOUND ? exit_bound : exit_usage;
}

struct StageDeleter {
    void operator()(kk_stage* s) const { kk_stage_free(s); }
};
struct CoverDeleter {
    void operator()(kk_cover* c) const { kk_cover_free(c); }
};
struct ScheduleDeleter {
    void operator()(kk_schedule* s) const { kk_schedule_free(s); }
};
using StageHandle = std::unique_ptr<kk_stage, StageDeleter>;
using CoverHandle = std::unique_ptr<kk_cover, CoverDeleter>;
using ScheduleHandle = std::unique_ptr<kk_schedule, ScheduleDeleter>;

struct Global {
    int threads = 0;
    uint64_t seed = 1;
    uint64_t budget = 0;
    std::string cache;
};

struct StageSource {
    std::string path;
    int m = 0;
};

void add_stage_source(CLI::App* cmd, StageSource& src)
{
    auto* path = cmd->add_option("--stage", src.path, "stage JSON file");
    auto* m = cmd->add_option("--m", src.m, "build stage m instead of loading one")->check(CLI::Range(1, 8));
    path->excludes(m);
}

kk_status open_stage(const StageSource& src, const Global& g, StageHandle& out)
{
    kk_stage* s = nullptr;
    kk_status st;
    if (!src.path.empty())
        st = kk_stage_load(src.path.c_str(), &s);
    else if (src.m > 0)
        st = kk_stage_build(src.m, g.cache.empty() ? nullptr : g.cache.c_str(), &s);
    else {
        std::fprintf(stderr, "one of --stage or --m is required\n");
        return KK_ERR_INVALID;
    }
    out.reset(s);
    return st;
}

void print_stage(const kk_stage* s)
{
    kk_stage_info info{};
    kk_stage_get_info(s, &info);
    std::printf("{\"m\": %d, \"eps_m\": %.17g, \"N\": %lld, \"conforming\": %s, \"a_projection\": %.17g}\n", info.m,
                info.eps, static_cast<long long>(info.N), info.conforming ? "true" : "false", info.a_projection);
}

}

int main(int argc, char** argv)
{
    CLI::App app{"Kakeya set constructions, projection bounds and rotation planners"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kk_version()));
    Global g;
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--budget", g.budget, "work budget for stage builds (default KAKEYA_BUDGET or 1e7)");
    app.add_option("--cache", g.cache, "directory for cached stage files");

    // construct
    auto* construct = app.add_subcommand("construct", "build stage m and write it as JSON");
    int c_m = 1;
    std::string c_out, c_svg;
    construct->add_option("--m", c_m, "stage index")->required()->check(CLI::Range(1, 8));
    construct->add_option("--out", c_out, "output stage JSON")->required();
    construct->add_option("--svg", c_svg, "also draw the rectangles");

    // measure
    auto* measure = app.add_subcommand("measure", "projection measure of a lifted stage");
    StageSource m_src;
    add_stage_source(measure, m_src);
    double m_x = 0, m_y = 0;
    std::string m_clip = "none";
    uint64_t m_mc = 0;
    measure->add_option("--x", m_x, "direction (1, x, y)");
    measure->add_option("--y", m_y, "direction (1, x, y)");
    measure->add_option("--clip", m_clip, "restrict to F, its complement or nothing")
        ->check(CLI::IsMember({"none", "F", "complement"}));
    measure->add_option("--mc", m_mc, "also run the sampling oracle with this many samples");

    // claim
    auto* claim = app.add_subcommand("claim", "check the projection bound on a grid of directions");
    StageSource cl_src;
    add_stage_source(claim, cl_src);
    int cl_grid = 5;
    std::string cl_out;
    claim->add_option("--grid", cl_grid, "points per axis")->check(CLI::Range(1, 1000));
    claim->add_option("--out", cl_out, "CSV report");

    // cover
    auto* cover = app.add_subcommand("cover", "slab cover of a stage and its slice certificate");
    StageSource cv_src;
    add_stage_source(cover, cv_src);
    double cv_delta = 0, cv_box = 0;
    int cv_grid = 256;
    std::string cv_transfer = "modulus";
    cover->add_option("--delta", cv_delta, "slab half width (default: gap rule)");
    cover->add_option("--box", cv_box, "half side of the box (default: fit the stations)");
    cover->add_option("--h-grid", cv_grid, "heights on the certificate grid")->check(CLI::Range(64, 1 << 20));
    cover->add_option("--transfer", cv_transfer, "grid to continuum transfer")
        ->check(CLI::IsMember({"modulus", "thickening"}));

    // plan-square
    auto* plan_sq = app.add_subcommand("plan-square", "plan a full rotation of the unit square");
    StageSource ps_src;
    add_stage_source(plan_sq, ps_src);
    double ps_delta = 0, ps_D = 1000, ps_eps = INFINITY;
    int ps_grid = 64;
    std::string ps_out;
    plan_sq->add_option("--delta", ps_delta, "slab half width (default: gap rule)");
    plan_sq->add_option("--D", ps_D, "join distance")->check(CLI::PositiveNumber);
    plan_sq->add_option("--eps", ps_eps, "target sweep per height");
    plan_sq->add_option("--h-grid", ps_grid, "heights on the ledger grid")->check(CLI::Range(64, 1 << 20));
    plan_sq->add_option("--out", ps_out, "schedule JSON");

    // audit
    auto* audit = app.add_subcommand("audit", "rasterized sweep of every segment of a schedule");
    std::string au_in, au_out;
    int au_segments = 64;
    double au_res = 2048, au_bound = -1;
    audit->add_option("--schedule", au_in, "schedule JSON")->required();
    audit->add_option("--segments", au_segments, "segments of the square")->check(CLI::Range(1, 1 << 16));
    audit->add_option("--resolution", au_res, "raster cells per unit")->check(CLI::Range(256.0, 65536.0));
    audit->add_option("--bound", au_bound, "bound per segment (default: ledger total)");
    audit->add_option("--out", au_out, "CSV report");

    // plan-sphere
    auto* sphere = app.add_subcommand("plan-sphere", "move two needles on the sphere to target positions");
    double sp_t = 1.0;
    std::vector<double> sp_cfg;
    std::string sp_out;
    auto* sp_t_opt = sphere->add_option("--t", sp_t, "arc between the needles (random configuration)");
    auto* sp_cfg_opt = sphere->add_option("--config", sp_cfg, "n1 n2 p1 p2 as 12 numbers")->expected(12);
    sp_t_opt->excludes(sp_cfg_opt);
    sphere->add_option("--out", sp_out, "plan JSON");

    // sweep3d
    auto* sweep = app.add_subcommand("sweep3d", "sweep a cylinder surface slice by slice with a schedule");
    std::string sw_in, sw_out, sw_vox;
    double sw_r = 0.25, sw_cell = 1.0 / 64, sw_res = 2048;
    int sw_slices = 8;
    sweep->add_option("--schedule", sw_in, "schedule JSON")->required();
    sweep->add_option("--radius", sw_r, "cylinder radius");
    sweep->add_option("--slices", sw_slices, "slices along x")->check(CLI::Range(1, 4096));
    sweep->add_option("--cell", sw_cell, "slice grid cell");
    sweep->add_option("--resolution", sw_res, "raster cells per unit")->check(CLI::Range(256.0, 65536.0));
    sweep->add_option("--out", sw_out, "CSV of per-slice areas");
    sweep->add_option("--voxels", sw_vox, "voxel file of the sliced cylinder");

    // render
    auto* render = app.add_subcommand("render", "SVG figures of a stage or of a schedule");
    std::string r_stage, r_sched, r_out;
    double r_h = 0.5, r_box = 0;
    int r_frames = 24;
    auto* r_stage_opt = render->add_option("--stage", r_stage, "stage JSON");
    auto* r_sched_opt = render->add_option("--schedule", r_sched, "schedule JSON");
    r_stage_opt->excludes(r_sched_opt);
    render->add_option("--out", r_out, "SVG file for a stage, directory for a schedule")->required();
    render->add_option("--height", r_h, "height of the traced segment")->check(CLI::Range(0.0, 1.0));
    render->add_option("--frames", r_frames, "frames")->check(CLI::Range(2, 10000));
    render->add_option("--box", r_box, "half side of the view (default: around the start)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    kk_set_threads(g.threads);
    kk_set_budget(g.budget);

    if (*construct) {
        kk_stage* raw = nullptr;
        if (int rc = report(kk_stage_build(c_m, g.cache.empty() ? nullptr : g.cache.c_str(), &raw), "construct"))
            return rc;
        StageHandle s(raw);
        if (int rc = report(kk_stage_save(s.get(), c_out.c_str()), "construct"))
            return rc;
        if (!c_svg.empty())
            if (int rc = report(kk_stage_write_svg(s.get(), c_svg.c_str()), "construct"))
                return rc;
        print_stage(s.get());
        return exit_ok;
    }

    if (*measure) {
        StageHandle s;
        if (int rc = report(open_stage(m_src, g, s), "measure"))
            return rc;
        kk_clip clip = m_clip == "F" ? KK_CLIP_F : m_clip == "complement" ? KK_CLIP_COMPLEMENT : KK_CLIP_NONE;
        double v = 0;
        if (int rc = report(kk_stage_measure(s.get(), m_x, m_y, clip, &v), "measure"))
            return rc;
        std::printf("x,y,clip,measure");
        if (m_mc)
            std::printf(",mc_estimate,mc_standard_error,mc_ci");
        std::printf("\n%.17g,%.17g,%s,%.17g", m_x, m_y, m_clip.c_str(), v);
        if (m_mc) {
            kk_mc_result mc{};
            if (int rc = report(kk_stage_mc(s.get(), m_x, m_y, m_mc, 256, g.seed, &mc), "measure"))
                return rc;
            std::printf(",%.17g,%.17g,%.17g", mc.estimate, mc.standard_error, mc.ci);
        }
        std::printf("\n");
        return exit_ok;
    }

    if (*claim) {
        StageHandle s;
        if (int rc = report(open_stage(cl_src, g, s), "claim"))
            return rc;
        kk_claim_summary sum{};
        kk_status st = kk_claim(s.get(), cl_grid, cl_out.empty() ? nullptr : cl_out.c_str(), &sum);
        if (st == KK_OK || st == KK_ERR_BOUND)
            std::printf("{\"rows\": %d, \"covered\": %d, \"failures\": %d, \"worst_ratio\": %.17g}\n", sum.rows,
                        sum.covered, sum.failures, sum.worst_ratio);
        return report(st, "claim");
    }

    if (*cover) {
        StageHandle s;
        if (int rc = report(open_stage(cv_src, g, s), "cover"))
            return rc;
        kk_cover* raw = nullptr;
        if (int rc = report(kk_cover_build(s.get(), cv_delta, cv_box, &raw), "cover"))
            return rc;
        CoverHandle c(raw);
        double eps = 0;
        kk_transfer tr = cv_transfer == "thickening" ? KK_TRANSFER_THICKENING : KK_TRANSFER_MODULUS;
        if (int rc = report(kk_cover_certify(c.get(), cv_grid, tr, &eps), "cover"))
            return rc;
        kk_cover_info info{};
        kk_cover_get_info(c.get(), &info);
        std::printf("{\"slabs\": %zu, \"delta\": %.17g, \"largest_gap\": %.17g, \"box\": [%.17g, %.17g, %.17g, "
                    "%.17g], \"h_grid\": %d, \"certified_eps\": %.17g}\n",
                    info.slabs, info.delta, info.largest_gap, info.box[0], info.box[1], info.box[2], info.box[3],
                    info.h_grid, eps);
        return exit_ok;
    }

    if (*plan_sq) {
        StageHandle s;
        if (int rc = report(open_stage(ps_src, g, s), "plan-square"))
            return rc;
        kk_cover* craw = nullptr;
        if (int rc = report(kk_cover_build(s.get(), ps_delta, 0, &craw), "plan-square"))
            return rc;
        CoverHandle c(craw);
        kk_schedule* raw = nullptr;
        if (int rc = report(kk_plan_square(c.get(), ps_eps, ps_D, ps_grid, &raw), "plan-square"))
            return rc;
        ScheduleHandle sc(raw);
        if (!ps_out.empty())
            if (int rc = report(kk_schedule_save(sc.get(), ps_out.c_str()), "plan-square"))
                return rc;
        kk_schedule_info info{};
        kk_schedule_get_info(sc.get(), &info);
        std::printf("{\"pieces\": %zu, \"net_rotation\": %.17g, \"valid\": %s, \"frames\": %d, \"frame_eps\": "
                    "%.17g, \"join_total\": %.17g, \"ledger_total\": %.17g}\n",
                    info.pieces, info.net_rotation, info.valid ? "true" : "false", info.frames, info.frame_eps,
                    info.join_total, info.ledger_total);
        return info.valid ? exit_ok : exit_bound;
    }

    if (*audit) {
        kk_schedule* raw = nullptr;
        if (int rc = report(kk_schedule_load(au_in.c_str(), &raw), "audit"))
            return rc;
        ScheduleHandle sc(raw);
        kk_audit_summary sum{};
        kk_status st =
            kk_schedule_audit(sc.get(), au_segments, au_res, au_bound, au_out.empty() ? nullptr : au_out.c_str(), &sum);
        if (st == KK_OK || st == KK_ERR_BOUND)
            std::printf("{\"segments\": %d, \"max_area\": %.17g, \"argmax\": %d, \"bound\": %.17g, \"tolerance\": "
                        "%.17g, \"pass\": %s}\n",
                        sum.segments, sum.max_area, sum.argmax, sum.bound, sum.tolerance, sum.pass ? "true" : "false");
        return report(st, "audit");
    }

    if (*sphere) {
        kk_needle_summary sum{};
        const char* out = sp_out.empty() ? nullptr : sp_out.c_str();
        kk_status st = sp_cfg.size() == 12
                           ? kk_plan_needles(&sp_cfg[0], &sp_cfg[3], &sp_cfg[6], &sp_cfg[9], out, &sum)
                           : kk_plan_needles_random(sp_t, g.seed, out, &sum);
        if (int rc = report(st, "plan-sphere"))
            return rc;
        bool ok = sum.error1 <= 1e-9 && sum.error2 <= 1e-9 && sum.max_drift <= 1e-12 && sum.steps <= sum.step_bound;
        std::printf("{\"t\": %.17g, \"steps\": %d, \"step_bound\": %d, \"error1\": %.17g, \"error2\": %.17g, "
                    "\"max_drift\": %.17g, \"pass\": %s}\n",
                    sum.t, sum.steps, sum.step_bound, sum.error1, sum.error2, sum.max_drift, ok ? "true" : "false");
        return ok ? exit_ok : exit_bound;
    }

    if (*sweep) {
        kk_schedule* raw = nullptr;
        if (int rc = report(kk_schedule_load(sw_in.c_str(), &raw), "sweep3d"))
            return rc;
        ScheduleHandle sc(raw);
        kk_volume_summary sum{};
        kk_status st = kk_sweep_cylinder(sc.get(), sw_r, sw_slices, sw_cell, sw_res,
                                         sw_out.empty() ? nullptr : sw_out.c_str(),
                                         sw_vox.empty() ? nullptr : sw_vox.c_str(), &sum);
        if (st == KK_OK || st == KK_ERR_BOUND)
            std::printf("{\"slices\": %d, \"lines\": %d, \"volume\": %.17g, \"bound\": %.17g, \"tolerance\": %.17g, "
                        "\"pass\": %s}\n",
                        sum.slices, sum.max_lines, sum.volume, sum.bound, sum.tolerance, sum.pass ? "true" : "false");
        return report(st, "sweep3d");
    }

    if (*render) {
        if (!r_stage.empty()) {
            kk_stage* raw = nullptr;
            if (int rc = report(kk_stage_load(r_stage.c_str(), &raw), "render"))
                return rc;
            StageHandle s(raw);
            return report(kk_stage_write_svg(s.get(), r_out.c_str()), "render");
        }
        if (!r_sched.empty()) {
            kk_schedule* raw = nullptr;
            if (int rc = report(kk_schedule_load(r_sched.c_str(), &raw), "render"))
                return rc;
            ScheduleHandle sc(raw);
            return report(kk_schedule_render(sc.get(), r_out.c_str(), r_h, r_frames, r_box), "render");
        }
        std::fprintf(stderr, "render: one of --stage or --schedule is required\n");
        return exit_usage;
    }
    return exit_usage;
}
