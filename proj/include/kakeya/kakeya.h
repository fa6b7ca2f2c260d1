#ifndef KAKEYA_H
#define KAKEYA_H

#include <stddef.h>
#include <stdint.h>

#if defined(KK_BUILDING_LIBRARY)
#define KK_API __attribute__((visibility("default")))
#else
#define KK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kk_status {
    KK_OK = 0,
    KK_ERR_INVALID = 1,  /* bad argument or malformed input */
    KK_ERR_BUDGET = 2,   /* work budget exceeded */
    KK_ERR_IO = 3,       /* file could not be read or written */
    KK_ERR_BOUND = 4,    /* a certified bound does not hold */
    KK_ERR_INTERNAL = 5
} kk_status;

typedef struct kk_stage kk_stage;
typedef struct kk_cover kk_cover;
typedef struct kk_schedule kk_schedule;

/* Message for the last failed call on this thread, "" after a success. */
KK_API const char* kk_last_error(void);
KK_API const char* kk_version(void);

/* Worker threads for the parallel loops; 0 uses the hardware count. */
KK_API kk_status kk_set_threads(int n);
/* Work budget for stage builds; 0 restores KAKEYA_BUDGET or the default. */
KK_API kk_status kk_set_budget(uint64_t budget);

/* ---- stages ---- */

typedef struct kk_stage_info {
    int m;
    double eps;
    int64_t N;
    int conforming;
    double a_projection;
} kk_stage_info;

/* cache_dir may be NULL; otherwise stages are loaded from and stored there. */
KK_API kk_status kk_stage_build(int m, const char* cache_dir, kk_stage** out);
KK_API kk_status kk_stage_load(const char* path, kk_stage** out);
KK_API kk_status kk_stage_save(const kk_stage* s, const char* path);
KK_API kk_status kk_stage_get_info(const kk_stage* s, kk_stage_info* out);
/* out = {a0, a1, b0, b1} */
KK_API kk_status kk_stage_rect(const kk_stage* s, size_t n, double out[4]);
KK_API kk_status kk_stage_write_svg(const kk_stage* s, const char* path);
KK_API void kk_stage_free(kk_stage* s);

/* ---- projections ---- */

typedef enum kk_clip { KK_CLIP_NONE = 0, KK_CLIP_F = 1, KK_CLIP_COMPLEMENT = 2 } kk_clip;

/* Measure of the projection of the lifted stage along (1, x, y). */
KK_API kk_status kk_stage_measure(const kk_stage* s, double x, double y, kk_clip clip, double* out);

typedef struct kk_mc_result {
    double estimate;
    double standard_error;
    double ci;
} kk_mc_result;

KK_API kk_status kk_stage_mc(const kk_stage* s, double x, double y, uint64_t samples, int bins, uint64_t seed,
                             kk_mc_result* out);

typedef struct kk_claim_summary {
    int rows;
    int covered;
    int failures;
    double worst_ratio; /* largest measured / bound over covered rows */
} kk_claim_summary;

/* csv_path may be NULL. Returns KK_ERR_BOUND when a covered row fails. */
KK_API kk_status kk_claim(const kk_stage* s, int points, const char* csv_path, kk_claim_summary* out);

/* ---- slab covers ---- */

typedef enum kk_transfer { KK_TRANSFER_MODULUS = 0, KK_TRANSFER_THICKENING = 1 } kk_transfer;

typedef struct kk_cover_info {
    size_t slabs;
    double delta;
    double largest_gap;
    double box[4]; /* x_lo, x_hi, z_lo, z_hi */
    double certified_eps; /* NaN until certified */
    int h_grid;
} kk_cover_info;

/* delta <= 0 selects the gap rule; box_half <= 0 sizes the box to the stations. */
KK_API kk_status kk_cover_build(const kk_stage* s, double delta, double box_half, kk_cover** out);
KK_API kk_status kk_cover_certify(kk_cover* c, int h_grid, kk_transfer transfer, double* certified_eps);
KK_API kk_status kk_cover_get_info(const kk_cover* c, kk_cover_info* out);
KK_API void kk_cover_free(kk_cover* c);

/* ---- square rotations ---- */

typedef struct kk_schedule_info {
    size_t pieces;
    double net_rotation;
    int valid;
    int frames;
    double frame_eps;
    double join_total;
    double ledger_total;
    double join_distance;
} kk_schedule_info;

/* Returns KK_ERR_BOUND when the ledger exceeds target_eps. */
KK_API kk_status kk_plan_square(const kk_cover* c, double target_eps, double join_distance, int ledger_h_grid,
                                kk_schedule** out);
KK_API kk_status kk_schedule_load(const char* path, kk_schedule** out);
KK_API kk_status kk_schedule_save(const kk_schedule* s, const char* path);
KK_API kk_status kk_schedule_get_info(const kk_schedule* s, kk_schedule_info* out);
KK_API void kk_schedule_free(kk_schedule* s);

typedef struct kk_audit_summary {
    int segments;
    double max_area;
    int argmax;
    double bound;
    double tolerance; /* raster error bound of the worst segment */
    int pass;
} kk_audit_summary;

/* bound < 0 uses the ledger total. csv_path may be NULL. Returns
   KK_ERR_BOUND when a segment exceeds bound plus its raster tolerance. */
KK_API kk_status kk_schedule_audit(const kk_schedule* s, int segments, double resolution, double bound,
                                   const char* csv_path, kk_audit_summary* out);

/* SVG frames of the motion with the trace of the segment at height h, plus
   index.html. box_half <= 0 frames the poses near the start. */
KK_API kk_status kk_schedule_render(const kk_schedule* s, const char* dir, double h, int frames, double box_half);

/* ---- needles on the sphere ---- */

typedef struct kk_needle_summary {
    double t;
    int steps;
    int step_bound;
    double error1, error2;
    double max_drift;
} kk_needle_summary;

/* Vectors are normalized; |arc(n1, n2) - arc(p1, p2)| must be below 1e-9. */
KK_API kk_status kk_plan_needles(const double n1[3], const double n2[3], const double p1[3], const double p2[3],
                                 const char* json_path, kk_needle_summary* out);
/* Random configuration with arc t drawn from the seed. */
KK_API kk_status kk_plan_needles_random(double t, uint64_t seed, const char* json_path, kk_needle_summary* out);

/* ---- volume sweeps ---- */

typedef struct kk_volume_summary {
    int slices;
    double x_extent;
    double volume;
    double tolerance;
    double bound; /* lines * ledger total * x_extent */
    int max_lines;
    int pass;
} kk_volume_summary;

/* Cylinder surface of the given radius around the vertical axis through
   (radius, 1/2), height 1, swept slice by slice with the schedule. csv_path
   and voxel_path may be NULL. Returns KK_ERR_BOUND when volume exceeds bound
   plus tolerance. */
KK_API kk_status kk_sweep_cylinder(const kk_schedule* s, double radius, int slices, double cell, double resolution,
                                   const char* csv_path, const char* voxel_path, kk_volume_summary* out);

#ifdef __cplusplus
}
#endif

#endif
