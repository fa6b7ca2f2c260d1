#include "kakeya/io.hpp"

#include "kakeya/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace kakeya {

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string points(std::initializer_list<Vec2> pts)
{
    std::string s;
    for (Vec2 p : pts)
        s += fmt(p.x) + "," + fmt(p.y) + " ";
    return s;
}

void write_frame(std::ostream& os, const Box& box, const Pose2& pose, const std::vector<SegmentPose>& trace,
                 double h, size_t piece, size_t pieces)
{
    double pad = 0.05 * std::max(box.x_hi - box.x_lo, box.z_hi - box.z_lo);
    double x0 = box.x_lo - pad, w = box.x_hi - box.x_lo + 2 * pad;
    double z0 = box.z_lo - pad, hgt = box.z_hi - box.z_lo + 2 * pad;
    double stroke = w / 600;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"" << fmt(600 * hgt / w)
       << "\" viewBox=\"" << fmt(x0) << " " << fmt(-(z0 + hgt)) << " " << fmt(w) << " " << fmt(hgt) << "\">\n";
    os << "<g transform=\"scale(1,-1)\">\n";
    os << "<rect x=\"" << fmt(box.x_lo) << "\" y=\"" << fmt(box.z_lo) << "\" width=\"" << fmt(box.x_hi - box.x_lo)
       << "\" height=\"" << fmt(box.z_hi - box.z_lo) << "\" fill=\"none\" stroke=\"#999\" stroke-width=\""
       << fmt(stroke) << "\"/>\n";
    for (const SegmentPose& s : trace)
        os << "<line x1=\"" << fmt(s.p.x) << "\" y1=\"" << fmt(s.p.y) << "\" x2=\"" << fmt(s.q.x) << "\" y2=\""
           << fmt(s.q.y) << "\" stroke=\"#d62728\" stroke-opacity=\"0.25\" stroke-width=\"" << fmt(stroke)
           << "\"/>\n";
    Vec2 a = pose.body_to_world(-0.5, 0), b = pose.body_to_world(0.5, 0);
    Vec2 c = pose.body_to_world(0.5, 1), d = pose.body_to_world(-0.5, 1);
    os << "<polygon points=\"" << points({a, b, c, d}) << "\" fill=\"#1f77b4\" fill-opacity=\"0.3\" stroke=\"#1f77b4\""
       << " stroke-width=\"" << fmt(stroke) << "\"/>\n";
    SegmentPose seg = square_segment(pose, h);
    os << "<line x1=\"" << fmt(seg.p.x) << "\" y1=\"" << fmt(seg.p.y) << "\" x2=\"" << fmt(seg.q.x) << "\" y2=\""
       << fmt(seg.q.y) << "\" stroke=\"#d62728\" stroke-width=\"" << fmt(3 * stroke) << "\"/>\n";
    os << "</g>\n";
    os << "<text x=\"" << fmt(x0 + pad / 2) << "\" y=\"" << fmt(-(z0 + hgt) + pad) << "\" font-size=\""
       << fmt(pad * 0.6) << "\">piece " << piece << " / " << pieces << "</text>\n";
    os << "</svg>\n";
}

}

void write_stage_svg(std::ostream& os, const StageSet& s)
{
    double lo = 0, hi = 1;
    for (double a : s.anchors) {
        lo = std::min(lo, a);
        hi = std::max(hi, a + s.rect_width());
    }
    double w = hi - lo, pad = 0.05 * std::max(w, 1.0);
    double scale = 800 / (w + 2 * pad);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" << fmt(scale * (1 + 2 * pad))
       << "\" viewBox=\"" << fmt(lo - pad) << " " << fmt(-1 - pad) << " " << fmt(w + 2 * pad) << " "
       << fmt(1 + 2 * pad) << "\">\n";
    os << "<g transform=\"scale(1,-1)\" fill=\"#1f77b4\" stroke=\"none\">\n";
    // Very thin rectangles are widened to a hairline so they stay visible.
    double min_w = (w + 2 * pad) / 1600;
    for (size_t n = 0; n < s.size(); ++n) {
        AxisRect r = s.rect(n);
        double rw = std::max(r.a1 - r.a0, min_w);
        os << "<rect x=\"" << fmt(r.a0) << "\" y=\"" << fmt(r.b0) << "\" width=\"" << fmt(rw) << "\" height=\""
           << fmt(r.b1 - r.b0) << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
}

std::vector<std::string> write_motion_frames(const std::string& dir, const MotionPath& m, const Box& box, double h,
                                             int frames)
{
    if (m.empty())
        throw std::invalid_argument("motion has no pieces");
    if (frames < 2)
        throw std::invalid_argument("need at least two frames");
    std::filesystem::create_directories(dir);
    size_t n = m.pieces.size();
    const size_t trace_max = 400;
    std::vector<std::string> files;
    for (int f = 0; f < frames; ++f) {
        size_t upto = static_cast<size_t>(std::llround(static_cast<double>(f) / (frames - 1) * n));
        Pose2 pose = upto == 0 ? m.start() : m.pieces[upto - 1].end();
        std::vector<SegmentPose> trace;
        size_t stride = std::max<size_t>(1, upto / trace_max);
        for (size_t i = 0; i < upto; i += stride)
            trace.push_back(square_segment(m.pieces[i].end(), h));
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.svg", f);
        std::ofstream os(std::filesystem::path(dir) / name);
        if (!os)
            throw IoError(std::string("cannot write ") + name);
        write_frame(os, box, pose, trace, h, upto, n);
        files.push_back(name);
    }
    std::ofstream idx(std::filesystem::path(dir) / "index.html");
    if (!idx)
        throw IoError("cannot write index.html");
    idx << "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>square motion</title></head><body>\n";
    idx << "<p>" << n << " pieces, segment at height " << fmt(h) << "</p>\n";
    for (const std::string& f : files)
        idx << "<div><a href=\"" << f << "\"><img src=\"" << f << "\" width=\"400\"></a></div>\n";
    idx << "</body></html>\n";
    files.push_back("index.html");
    return files;
}

}
