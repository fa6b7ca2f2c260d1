#pragma once

#include "kakeya/projection.hpp"
#include "kakeya/rotation.hpp"
#include "kakeya/space.hpp"
#include "kakeya/stage.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kakeya {

// Stage documents: {schema, m, eps_m, N, parity, conforming, parent, rects}.
void write_stage_json(std::ostream& os, const StageSet& s);
StageSet read_stage_json(std::istream& is);
void save_stage(const std::string& path, const StageSet& s);
StageSet load_stage(const std::string& path);

void write_schedule_json(std::ostream& os, const Schedule& s);
Schedule read_schedule_json(std::istream& is);

void write_claim_csv(std::ostream& os, const std::vector<ClaimRow>& rows);
void write_audit_csv(std::ostream& os, const AuditReport& r);
void write_needles_json(std::ostream& os, const SphereConfig& cfg, const std::vector<RotationStep>& steps,
                        const NeedleReport& report);
void write_volume_csv(std::ostream& os, const VolumeReport& r);

// Voxel solids: "KKVOX 1" header with dims, spacing and origin, followed by
// run lengths of alternating empty and occupied cells in (slice, y, z) order.
void write_voxels(std::ostream& os, const SlicedSolid& k);
SlicedSolid read_voxels(std::istream& is);

uint64_t fnv1a64(const std::string& bytes);

// Cache file name for a stage built with the given options.
std::string stage_cache_name(int m, const StageOptions& opt);
// Loads the cached stage from `dir` or builds and stores it.
StageSet cached_stage(int m, const StageOptions& opt, const std::string& dir);

// SVG output: the stage rectangles, and frames of a square motion with the
// trace of one segment plus an index page linking them.
void write_stage_svg(std::ostream& os, const StageSet& s);
std::vector<std::string> write_motion_frames(const std::string& dir, const MotionPath& m, const Box& box, double h,
                                             int frames);

}
