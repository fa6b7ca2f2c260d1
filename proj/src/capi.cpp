#include "kakeya/kakeya.h"

#include "kakeya/errors.hpp"
#include "kakeya/io.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/projection.hpp"
#include "kakeya/rotation.hpp"
#include "kakeya/space.hpp"
#include "kakeya/stage.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <new>
#include <numbers>
#include <random>
#include <string>

using namespace kakeya;

struct kk_stage {
    StageSet s;
};

struct kk_cover {
    SlabCover u;
};

struct kk_schedule {
    Schedule s;
};

namespace {

thread_local std::string last_error;
uint64_t budget_override = 0;

template <class F>
kk_status guard(F&& f)
{
    try {
        kk_status st = f();
        if (st == KK_OK)
            last_error.clear();
        return st;
    } catch (const BudgetError& e) {
        last_error = e.what();
        return KK_ERR_BUDGET;
    } catch (const BoundError& e) {
        last_error = e.what();
        return KK_ERR_BOUND;
    } catch (const IoError& e) {
        last_error = e.what();
        return KK_ERR_IO;
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return KK_ERR_IO;
    } catch (const std::invalid_argument& e) {
        last_error = e.what();
        return KK_ERR_INVALID;
    } catch (const std::out_of_range& e) {
        last_error = e.what();
        return KK_ERR_INVALID;
    } catch (const std::domain_error& e) {
        last_error = e.what();
        return KK_ERR_INVALID;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return KK_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return KK_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return KK_ERR_INTERNAL;
    }
}

kk_status fail(kk_status st, std::string msg)
{
    last_error = std::move(msg);
    return st;
}

StageOptions stage_options()
{
    StageOptions opt;
    opt.budget = budget_override;
    return opt;
}

std::ofstream open_out(const char* path)
{
    std::ofstream f(path);
    if (!f)
        throw IoError(std::string("cannot write ") + path);
    return f;
}

void finish(std::ofstream& f, const char* path)
{
    f.flush();
    if (!f)
        throw IoError(std::string("write failed: ") + path);
}

Vec3 vec3(const double v[3]) { return {v[0], v[1], v[2]}; }

kk_status run_needles(const SphereConfig& cfg, const char* json_path, kk_needle_summary* out)
{
    cfg.validate(1e-9);
    std::vector<RotationStep> steps = plan_needles(cfg);
    NeedleReport rep = simulate_needles(cfg, steps);
    if (json_path) {
        std::ofstream f = open_out(json_path);
        write_needles_json(f, cfg, steps, rep);
        finish(f, json_path);
    }
    if (out) {
        double t = cfg.t();
        out->t = t;
        out->steps = static_cast<int>(steps.size());
        out->step_bound = 2 * static_cast<int>(std::ceil(std::numbers::pi / (2 * t))) + 3;
        out->error1 = rep.error1;
        out->error2 = rep.error2;
        out->max_drift = rep.max_drift;
    }
    return KK_OK;
}

}

extern "C" {

const char* kk_last_error(void) { return last_error.c_str(); }

const char* kk_version(void) { return "0.1.0"; }

kk_status kk_set_threads(int n)
{
    if (n < 0)
        return fail(KK_ERR_INVALID, "thread count must be non-negative");
    set_thread_count(n);
    last_error.clear();
    return KK_OK;
}

kk_status kk_set_budget(uint64_t budget)
{
    budget_override = budget;
    last_error.clear();
    return KK_OK;
}

// ---- stages ----

kk_status kk_stage_build(int m, const char* cache_dir, kk_stage** out)
{
    return guard([&] {
        if (!out)
            return fail(KK_ERR_INVALID, "null output handle");
        if (m < 1)
            return fail(KK_ERR_INVALID, "stage index must be at least 1");
        StageOptions opt = stage_options();
        auto h = std::make_unique<kk_stage>();
        h->s = cache_dir ? cached_stage(m, opt, cache_dir) : build_stage(m, opt);
        *out = h.release();
        return KK_OK;
    });
}

kk_status kk_stage_load(const char* path, kk_stage** out)
{
    return guard([&] {
        if (!path || !out)
            return fail(KK_ERR_INVALID, "null argument");
        auto h = std::make_unique<kk_stage>();
        h->s = load_stage(path);
        *out = h.release();
        return KK_OK;
    });
}

kk_status kk_stage_save(const kk_stage* s, const char* path)
{
    return guard([&] {
        if (!s || !path)
            return fail(KK_ERR_INVALID, "null argument");
        save_stage(path, s->s);
        return KK_OK;
    });
}

kk_status kk_stage_get_info(const kk_stage* s, kk_stage_info* out)
{
    return guard([&] {
        if (!s || !out)
            return fail(KK_ERR_INVALID, "null argument");
        out->m = s->s.m;
        out->eps = s->s.eps;
        out->N = s->s.N;
        out->conforming = s->s.conforming ? 1 : 0;
        out->a_projection = s->s.a_projection();
        return KK_OK;
    });
}

kk_status kk_stage_rect(const kk_stage* s, size_t n, double out[4])
{
    return guard([&] {
        if (!s || !out)
            return fail(KK_ERR_INVALID, "null argument");
        if (n >= s->s.size())
            return fail(KK_ERR_INVALID, "rectangle index out of range");
        AxisRect r = s->s.rect(n);
        out[0] = r.a0;
        out[1] = r.a1;
        out[2] = r.b0;
        out[3] = r.b1;
        return KK_OK;
    });
}

kk_status kk_stage_write_svg(const kk_stage* s, const char* path)
{
    return guard([&] {
        if (!s || !path)
            return fail(KK_ERR_INVALID, "null argument");
        std::ofstream f = open_out(path);
        write_stage_svg(f, s->s);
        finish(f, path);
        return KK_OK;
    });
}

void kk_stage_free(kk_stage* s) { delete s; }

// ---- projections ----

kk_status kk_stage_measure(const kk_stage* s, double x, double y, kk_clip clip, double* out)
{
    return guard([&] {
        if (!s || !out)
            return fail(KK_ERR_INVALID, "null argument");
        if (!std::isfinite(x) || !std::isfinite(y))
            return fail(KK_ERR_INVALID, "direction must be finite");
        Direction2 d{x, y};
        switch (clip) {
        case KK_CLIP_NONE:
            *out = stage_projection_measure(s->s, d);
            break;
        case KK_CLIP_F:
            *out = stage_projection_measure(s->s, d, region_F(d));
            break;
        case KK_CLIP_COMPLEMENT:
            *out = stage_projection_measure_complement(s->s, d, region_F(d));
            break;
        default:
            return fail(KK_ERR_INVALID, "unknown clip mode");
        }
        return KK_OK;
    });
}

kk_status kk_stage_mc(const kk_stage* s, double x, double y, uint64_t samples, int bins, uint64_t seed,
                      kk_mc_result* out)
{
    return guard([&] {
        if (!s || !out)
            return fail(KK_ERR_INVALID, "null argument");
        McEstimate e = mc_oracle(s->s, {x, y}, samples, bins, seed);
        out->estimate = e.estimate;
        out->standard_error = e.standard_error;
        out->ci = e.ci;
        return KK_OK;
    });
}

kk_status kk_claim(const kk_stage* s, int points, const char* csv_path, kk_claim_summary* out)
{
    return guard([&] {
        if (!s)
            return fail(KK_ERR_INVALID, "null stage");
        std::vector<ClaimRow> rows = claim_report(s->s, points);
        if (csv_path) {
            std::ofstream f = open_out(csv_path);
            write_claim_csv(f, rows);
            finish(f, csv_path);
        }
        kk_claim_summary sum{static_cast<int>(rows.size()), 0, 0, 0};
        for (const ClaimRow& r : rows) {
            if (!r.covered)
                continue;
            ++sum.covered;
            if (!r.pass)
                ++sum.failures;
            if (r.bound > 0)
                sum.worst_ratio = std::max(sum.worst_ratio, r.measured / r.bound);
        }
        if (out)
            *out = sum;
        if (sum.failures)
            return fail(KK_ERR_BOUND, std::to_string(sum.failures) + " covered grid points exceed the bound");
        return KK_OK;
    });
}

// ---- covers ----

kk_status kk_cover_build(const kk_stage* s, double delta, double box_half, kk_cover** out)
{
    return guard([&] {
        if (!s || !out)
            return fail(KK_ERR_INVALID, "null argument");
        double d = delta > 0 ? delta : gap_rule_delta(s->s);
        auto h = std::make_unique<kk_cover>();
        h->u = build_slab_cover(s->s, d, box_half);
        *out = h.release();
        return KK_OK;
    });
}

kk_status kk_cover_certify(kk_cover* c, int h_grid, kk_transfer transfer, double* certified_eps)
{
    return guard([&] {
        if (!c)
            return fail(KK_ERR_INVALID, "null cover");
        CertifyOptions opt;
        if (transfer == KK_TRANSFER_THICKENING)
            opt.transfer = GridTransfer::thickening;
        else if (transfer != KK_TRANSFER_MODULUS)
            return fail(KK_ERR_INVALID, "unknown transfer mode");
        SliceCertificate cert = certify_slices(c->u, h_grid, opt);
        if (certified_eps)
            *certified_eps = cert.certified_eps;
        return KK_OK;
    });
}

kk_status kk_cover_get_info(const kk_cover* c, kk_cover_info* out)
{
    return guard([&] {
        if (!c || !out)
            return fail(KK_ERR_INVALID, "null argument");
        out->slabs = c->u.slabs.size();
        out->delta = c->u.delta;
        out->largest_gap = c->u.largest_gap;
        out->box[0] = c->u.box.x_lo;
        out->box[1] = c->u.box.x_hi;
        out->box[2] = c->u.box.z_lo;
        out->box[3] = c->u.box.z_hi;
        out->certified_eps = c->u.certified_eps;
        out->h_grid = c->u.h_grid;
        return KK_OK;
    });
}

void kk_cover_free(kk_cover* c) { delete c; }

// ---- schedules ----

kk_status kk_plan_square(const kk_cover* c, double target_eps, double join_distance, int ledger_h_grid,
                         kk_schedule** out)
{
    return guard([&] {
        if (!c || !out)
            return fail(KK_ERR_INVALID, "null argument");
        PlanOptions opt;
        opt.join_distance = join_distance;
        if (ledger_h_grid > 0)
            opt.ledger_h_grid = ledger_h_grid;
        auto h = std::make_unique<kk_schedule>();
        h->s = plan_full_rotation(c->u, target_eps, opt);
        *out = h.release();
        return KK_OK;
    });
}

kk_status kk_schedule_load(const char* path, kk_schedule** out)
{
    return guard([&] {
        if (!path || !out)
            return fail(KK_ERR_INVALID, "null argument");
        std::ifstream f(path);
        if (!f)
            throw IoError(std::string("cannot read ") + path);
        auto h = std::make_unique<kk_schedule>();
        h->s = read_schedule_json(f);
        *out = h.release();
        return KK_OK;
    });
}

kk_status kk_schedule_save(const kk_schedule* s, const char* path)
{
    return guard([&] {
        if (!s || !path)
            return fail(KK_ERR_INVALID, "null argument");
        std::ofstream f = open_out(path);
        write_schedule_json(f, s->s);
        finish(f, path);
        return KK_OK;
    });
}

kk_status kk_schedule_get_info(const kk_schedule* s, kk_schedule_info* out)
{
    return guard([&] {
        if (!s || !out)
            return fail(KK_ERR_INVALID, "null argument");
        const Schedule& sc = s->s;
        out->pieces = sc.path.pieces.size();
        out->net_rotation = sc.path.empty() ? 0 : sc.path.net_rotation();
        out->valid = validate_motion(sc.path).ok ? 1 : 0;
        out->frames = sc.ledger.frames;
        out->frame_eps = sc.ledger.frame_eps;
        out->join_total = sc.ledger.join_total;
        out->ledger_total = sc.ledger.total;
        out->join_distance = sc.join_distance;
        return KK_OK;
    });
}

void kk_schedule_free(kk_schedule* s) { delete s; }

kk_status kk_schedule_audit(const kk_schedule* s, int segments, double resolution, double bound,
                            const char* csv_path, kk_audit_summary* out)
{
    return guard([&] {
        if (!s)
            return fail(KK_ERR_INVALID, "null schedule");
        if (segments < 1)
            return fail(KK_ERR_INVALID, "need at least one segment");
        double b = bound < 0 ? s->s.ledger.total : bound;
        AuditReport r = audit_square_sweep(s->s.path, segments, resolution, b);
        if (csv_path) {
            std::ofstream f = open_out(csv_path);
            write_audit_csv(f, r);
            finish(f, csv_path);
        }
        kk_audit_summary sum{segments, r.max_area, r.argmax, b, 0, 1};
        for (const AuditRow& row : r.rows)
            if (!(row.area <= b + row.error_bound))
                sum.pass = 0;
        if (r.argmax >= 0)
            sum.tolerance = r.rows[static_cast<size_t>(r.argmax)].error_bound;
        if (out)
            *out = sum;
        if (!sum.pass)
            return fail(KK_ERR_BOUND, "a segment sweeps more than the bound plus its raster tolerance");
        return KK_OK;
    });
}

kk_status kk_schedule_render(const kk_schedule* s, const char* dir, double h, int frames, double box_half)
{
    return guard([&] {
        if (!s || !dir)
            return fail(KK_ERR_INVALID, "null argument");
        if (!(h >= 0 && h <= 1))
            return fail(KK_ERR_INVALID, "segment height must lie in [0, 1]");
        const MotionPath& m = s->s.path;
        if (m.empty())
            return fail(KK_ERR_INVALID, "schedule has no pieces");
        Box box;
        if (box_half > 0) {
            box = Box::symmetric(box_half);
        } else {
            Vec2 home = m.start().origin;
            double reach = s->s.join_distance > 0 ? 0.1 * s->s.join_distance : 50;
            box = {home.x, home.x, home.y, home.y};
            for (const MotionPiece& p : m.pieces) {
                if (norm(p.start.origin - home) > reach)
                    continue;
                for (double t : {-0.5, 0.5})
                    for (double hh : {0.0, 1.0}) {
                        Vec2 q = p.start.body_to_world(t, hh);
                        box.x_lo = std::min(box.x_lo, q.x);
                        box.x_hi = std::max(box.x_hi, q.x);
                        box.z_lo = std::min(box.z_lo, q.y);
                        box.z_hi = std::max(box.z_hi, q.y);
                    }
            }
        }
        write_motion_frames(dir, m, box, h, frames);
        return KK_OK;
    });
}

// ---- needles ----

kk_status kk_plan_needles(const double n1[3], const double n2[3], const double p1[3], const double p2[3],
                          const char* json_path, kk_needle_summary* out)
{
    return guard([&] {
        if (!n1 || !n2 || !p1 || !p2)
            return fail(KK_ERR_INVALID, "null vector");
        SphereConfig cfg{vec3(n1), vec3(n2), vec3(p1), vec3(p2)};
        for (Vec3* v : {&cfg.n1, &cfg.n2, &cfg.p1, &cfg.p2}) {
            double n = norm(*v);
            if (!(n > 0) || !std::isfinite(n))
                return fail(KK_ERR_INVALID, "vectors must be finite and non-zero");
            *v = *v / n;
        }
        return run_needles(cfg, json_path, out);
    });
}

kk_status kk_plan_needles_random(double t, uint64_t seed, const char* json_path, kk_needle_summary* out)
{
    return guard([&] {
        if (!(t > 0 && t < std::numbers::pi))
            return fail(KK_ERR_INVALID, "t must lie in (0, pi)");
        std::mt19937_64 rng(seed);
        return run_needles(random_sphere_config(rng, t), json_path, out);
    });
}

// ---- volumes ----

kk_status kk_sweep_cylinder(const kk_schedule* s, double radius, int slices, double cell, double resolution,
                            const char* csv_path, const char* voxel_path, kk_volume_summary* out)
{
    return guard([&] {
        if (!s)
            return fail(KK_ERR_INVALID, "null schedule");
        if (!(radius > 0 && radius <= 0.5))
            return fail(KK_ERR_INVALID, "radius must lie in (0, 1/2]");
        if (slices < 1 || !(cell > 0 && cell <= 0.25))
            return fail(KK_ERR_INVALID, "need at least one slice and a cell size in (0, 1/4]");
        ShapePtr cyl = make_cylinder_surface({radius, 0.5}, radius, 0, 1);
        SliceGrid g;
        g.cell = cell;
        g.ny = g.nz = static_cast<int>(std::ceil(1 / cell - 1e-9));
        SlicedSolid k = slice_shape(*cyl, Frame3{}, {0, 2 * radius}, slices, g);
        int lines = 0;
        for (const ProfileEntry& e : slice_cover_profile(k))
            lines = std::max(lines, e.n);
        VolumeReport v = sweep_volume(k, s->s.path, resolution);
        if (csv_path) {
            std::ofstream f = open_out(csv_path);
            write_volume_csv(f, v);
            finish(f, csv_path);
        }
        if (voxel_path) {
            std::ofstream f = open_out(voxel_path);
            write_voxels(f, k);
            finish(f, voxel_path);
        }
        kk_volume_summary sum{};
        sum.slices = slices;
        sum.x_extent = 2 * radius;
        sum.volume = v.volume;
        sum.tolerance = v.error_bound;
        sum.max_lines = lines;
        sum.bound = lines * s->s.ledger.total * sum.x_extent;
        sum.pass = v.volume <= sum.bound + sum.tolerance ? 1 : 0;
        if (out)
            *out = sum;
        if (!sum.pass)
            return fail(KK_ERR_BOUND, "swept volume exceeds the cylinderlike bound");
        return KK_OK;
    });
}

}
