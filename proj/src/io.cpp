#include "kakeya/io.hpp"

#include "kakeya/errors.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kakeya {

using nlohmann::json;

namespace {

std::string num(double v)
{
    if (!std::isfinite(v))
        return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string params_json(const StageParams& p)
{
    std::ostringstream os;
    os << "{\"m\": " << p.m << ", \"eps_m\": " << num(p.eps_m) << ", \"N\": " << p.N << ", \"k_m\": " << p.k_m
       << ", \"eps_next\": " << num(p.eps_next) << ", \"multiple\": " << p.multiple << ", \"N_next\": " << p.N_next
       << ", \"conforming\": " << (p.conforming ? "true" : "false") << "}";
    return os.str();
}

const json& field(const json& j, const char* name)
{
    auto it = j.find(name);
    if (it == j.end())
        throw std::invalid_argument(std::string("missing field \"") + name + "\"");
    return *it;
}

double number(const json& j, const char* name)
{
    const json& v = field(j, name);
    if (!v.is_number())
        throw std::invalid_argument(std::string("field \"") + name + "\" is not a number");
    return v.get<double>();
}

int64_t integer(const json& j, const char* name)
{
    const json& v = field(j, name);
    if (!v.is_number_integer())
        throw std::invalid_argument(std::string("field \"") + name + "\" is not an integer");
    return v.get<int64_t>();
}

}

// ---- stages ----

void write_stage_json(std::ostream& os, const StageSet& s)
{
    os << "{\n  \"schema\": \"kakeya.stage/1\",\n";
    os << "  \"m\": " << s.m << ",\n";
    os << "  \"eps_m\": " << num(s.eps) << ",\n";
    os << "  \"N\": " << s.N << ",\n";
    os << "  \"parity\": \"" << (s.even() ? "even" : "odd") << "\",\n";
    os << "  \"conforming\": " << (s.conforming ? "true" : "false") << ",\n";
    os << "  \"parent\": " << (s.parent ? params_json(*s.parent) : std::string("null")) << ",\n";
    os << "  \"rects\": [";
    for (size_t n = 0; n < s.size(); ++n) {
        AxisRect r = s.rect(n);
        os << (n ? ",\n    " : "\n    ") << "[" << num(r.a0) << ", " << num(r.a1) << ", " << num(r.b0) << ", "
           << num(r.b1) << "]";
    }
    os << "\n  ]\n}\n";
}

StageSet read_stage_json(std::istream& is)
{
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("stage file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || field(j, "schema") != "kakeya.stage/1")
        throw std::invalid_argument("not a kakeya.stage/1 document");
    StageSet s;
    s.m = static_cast<int>(integer(j, "m"));
    s.eps = number(j, "eps_m");
    s.N = integer(j, "N");
    if (s.m < 1 || !(s.eps > 0) || s.N < 1)
        throw std::invalid_argument("stage header out of range");
    const json& parity = field(j, "parity");
    if (parity != (s.even() ? "even" : "odd"))
        throw std::invalid_argument("parity does not match m");
    if (auto it = j.find("conforming"); it != j.end())
        s.conforming = it->get<bool>();
    if (auto it = j.find("parent"); it != j.end() && !it->is_null()) {
        StageParams p;
        p.m = static_cast<int>(integer(*it, "m"));
        p.eps_m = number(*it, "eps_m");
        p.N = integer(*it, "N");
        p.k_m = static_cast<int>(integer(*it, "k_m"));
        p.eps_next = number(*it, "eps_next");
        p.multiple = integer(*it, "multiple");
        p.N_next = integer(*it, "N_next");
        p.conforming = field(*it, "conforming").get<bool>();
        s.parent = p;
    }
    const json& rects = field(j, "rects");
    if (!rects.is_array() || static_cast<int64_t>(rects.size()) != s.N)
        throw std::invalid_argument("rect count differs from N");
    double N = static_cast<double>(s.N);
    double width = s.eps / N;
    s.anchors.reserve(rects.size());
    for (size_t n = 0; n < rects.size(); ++n) {
        const json& r = rects[n];
        if (!r.is_array() || r.size() != 4)
            throw std::invalid_argument("rect entries must be [a0, a1, b0, b1]");
        double a0 = r[0].get<double>(), a1 = r[1].get<double>(), b0 = r[2].get<double>(), b1 = r[3].get<double>();
        if (std::abs(b0 - n / N) > 1e-12 || std::abs(b1 - (n + 1) / N) > 1e-12)
            throw std::invalid_argument("rect " + std::to_string(n) + " is not on its band");
        if (std::abs((a1 - a0) - width) > 1e-12 * (1 + std::abs(a0)))
            throw std::invalid_argument("rect " + std::to_string(n) + " has the wrong width");
        s.anchors.push_back(a0);
    }
    return s;
}

void save_stage(const std::string& path, const StageSet& s)
{
    std::ofstream f(path);
    if (!f)
        throw IoError("cannot write " + path);
    write_stage_json(f, s);
    if (!f)
        throw IoError("write failed: " + path);
}

StageSet load_stage(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot read " + path);
    return read_stage_json(f);
}

// ---- schedules ----

void write_schedule_json(std::ostream& os, const Schedule& s)
{
    const Ledger& l = s.ledger;
    os << "{\n  \"schema\": \"kakeya.schedule/1\",\n";
    os << "  \"join_distance\": " << num(s.join_distance) << ",\n";
    os << "  \"ledger\": {\"frames\": " << l.frames << ", \"frame_eps\": " << num(l.frame_eps)
       << ", \"frame_correction\": " << num(l.frame_correction) << ", \"join_total\": " << num(l.join_total)
       << ", \"total\": " << num(l.total) << ", \"slab_eps\": " << num(l.slab_eps)
       << ", \"slab_visits\": " << l.slab_visits << ", \"joins\": " << l.joins << "},\n";
    os << "  \"pieces\": [";
    for (size_t i = 0; i < s.path.pieces.size(); ++i) {
        const MotionPiece& p = s.path.pieces[i];
        os << (i ? ",\n    " : "\n    ");
        os << "{\"type\": \"" << (p.kind == PieceKind::rotate ? "rotate" : "translate") << "\", \"start\": ["
           << num(p.start.origin.x) << ", " << num(p.start.origin.y) << ", " << num(p.start.angle) << "], ";
        if (p.kind == PieceKind::rotate)
            os << "\"center\": [" << num(p.vec.x) << ", " << num(p.vec.y) << "], \"angle\": " << num(p.amount);
        else
            os << "\"direction\": [" << num(p.vec.x) << ", " << num(p.vec.y) << "], \"length\": " << num(p.amount);
        if (i < s.piece_budget.size())
            os << ", \"budget\": " << num(s.piece_budget[i]);
        os << "}";
    }
    os << "\n  ]\n}\n";
}

Schedule read_schedule_json(std::istream& is)
{
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("schedule file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || field(j, "schema") != "kakeya.schedule/1")
        throw std::invalid_argument("not a kakeya.schedule/1 document");
    Schedule s;
    s.join_distance = number(j, "join_distance");
    const json& l = field(j, "ledger");
    s.ledger.frames = static_cast<int>(integer(l, "frames"));
    s.ledger.frame_eps = number(l, "frame_eps");
    s.ledger.frame_correction = number(l, "frame_correction");
    s.ledger.join_total = number(l, "join_total");
    s.ledger.total = number(l, "total");
    if (const json& v = field(l, "slab_eps"); v.is_number())
        s.ledger.slab_eps = v.get<double>();
    s.ledger.slab_visits = integer(l, "slab_visits");
    s.ledger.joins = integer(l, "joins");
    for (const json& p : field(j, "pieces")) {
        const json& st = field(p, "start");
        Pose2 start{{st.at(0).get<double>(), st.at(1).get<double>()}, st.at(2).get<double>()};
        std::string type = field(p, "type").get<std::string>();
        if (type == "rotate") {
            const json& c = field(p, "center");
            s.path.pieces.push_back(make_rotation(start, {c.at(0).get<double>(), c.at(1).get<double>()},
                                                  number(p, "angle")));
        } else if (type == "translate") {
            const json& d = field(p, "direction");
            s.path.pieces.push_back(make_translation(start, {d.at(0).get<double>(), d.at(1).get<double>()},
                                                     number(p, "length")));
        } else {
            throw std::invalid_argument("unknown piece type \"" + type + "\"");
        }
        if (auto it = p.find("budget"); it != p.end())
            s.piece_budget.push_back(it->get<double>());
    }
    return s;
}

// ---- reports ----

void write_claim_csv(std::ostream& os, const std::vector<ClaimRow>& rows)
{
    os << "x,y,measured,bound,covered_by_claim,pass\n";
    for (const ClaimRow& r : rows)
        os << num(r.x) << "," << num(r.y) << "," << num(r.measured) << "," << num(r.bound) << ","
           << (r.covered ? "true" : "false") << "," << (r.pass ? "true" : "false") << "\n";
}

void write_audit_csv(std::ostream& os, const AuditReport& r)
{
    os << "segment_index,area,bound\n";
    for (const AuditRow& row : r.rows)
        os << row.index << "," << num(row.area) << "," << num(r.bound) << "\n";
}

void write_needles_json(std::ostream& os, const SphereConfig& cfg, const std::vector<RotationStep>& steps,
                        const NeedleReport& report)
{
    auto vec = [](const Vec3& v) { return "[" + num(v.x) + ", " + num(v.y) + ", " + num(v.z) + "]"; };
    os << "{\n  \"schema\": \"kakeya.needles/1\",\n";
    os << "  \"t\": " << num(cfg.t()) << ",\n";
    os << "  \"n1\": " << vec(cfg.n1) << ", \"n2\": " << vec(cfg.n2) << ",\n";
    os << "  \"p1\": " << vec(cfg.p1) << ", \"p2\": " << vec(cfg.p2) << ",\n";
    os << "  \"steps\": [";
    for (size_t i = 0; i < steps.size(); ++i)
        os << (i ? ",\n    " : "\n    ") << "{\"pivot\": " << (steps[i].pivot == Needle::one ? 1 : 2)
           << ", \"angle\": " << num(steps[i].angle) << "}";
    os << (steps.empty() ? "" : "\n  ") << "],\n";
    os << "  \"final_error\": [" << num(report.error1) << ", " << num(report.error2) << "],\n";
    os << "  \"max_drift\": " << num(report.max_drift) << "\n}\n";
}

void write_volume_csv(std::ostream& os, const VolumeReport& r)
{
    os << "x,area\n";
    for (const SliceSweep& s : r.slices)
        os << num(s.x) << "," << num(s.area) << "\n";
}

// ---- voxels ----

void write_voxels(std::ostream& os, const SlicedSolid& k)
{
    const SliceGrid& g = k.grid;
    os << "KKVOX 1\n";
    os << "dims " << k.nx << " " << g.ny << " " << g.nz << "\n";
    os << "spacing " << num(k.dx()) << " " << num(g.cell) << "\n";
    os << "origin " << num(k.x_range.lo) << " " << num(g.y_lo) << " " << num(g.z_lo) << "\n";
    bool state = false;
    uint64_t run = 0;
    int col = 0;
    auto flush = [&]() {
        os << run << ((++col % 16) ? " " : "\n");
        run = 0;
    };
    for (int s = 0; s < k.nx; ++s)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int iz = 0; iz < g.nz; ++iz) {
                bool v = k.get(s, iy, iz);
                if (v != state) {
                    flush();
                    state = v;
                }
                ++run;
            }
    flush();
    os << "\nend\n";
}

SlicedSolid read_voxels(std::istream& is)
{
    std::string magic, word;
    int version = 0;
    if (!(is >> magic >> version) || magic != "KKVOX" || version != 1)
        throw std::invalid_argument("not a KKVOX 1 file");
    int nx = 0, ny = 0, nz = 0;
    double dx = 0, cell = 0, x0 = 0, y0 = 0, z0 = 0;
    if (!(is >> word >> nx >> ny >> nz) || word != "dims")
        throw std::invalid_argument("KKVOX: bad dims line");
    if (!(is >> word >> dx >> cell) || word != "spacing")
        throw std::invalid_argument("KKVOX: bad spacing line");
    if (!(is >> word >> x0 >> y0 >> z0) || word != "origin")
        throw std::invalid_argument("KKVOX: bad origin line");
    if (nx < 1 || ny < 1 || nz < 1 || !(dx > 0) || !(cell > 0))
        throw std::invalid_argument("KKVOX: header out of range");
    SliceGrid g{y0, z0, cell, ny, nz};
    SlicedSolid k({x0, x0 + dx * nx}, nx, g);
    uint64_t total = static_cast<uint64_t>(nx) * ny * nz, pos = 0;
    bool state = false;
    while (is >> word && word != "end") {
        uint64_t run = std::stoull(word);
        if (run > total - pos)
            throw std::invalid_argument("KKVOX: runs exceed the grid");
        if (state)
            for (uint64_t i = pos; i < pos + run; ++i) {
                uint64_t s = i / (static_cast<uint64_t>(ny) * nz), rest = i % (static_cast<uint64_t>(ny) * nz);
                k.set(static_cast<int>(s), static_cast<int>(rest / nz), static_cast<int>(rest % nz));
            }
        pos += run;
        state = !state;
    }
    if (word != "end" || pos != total)
        throw std::invalid_argument("KKVOX: runs do not cover the grid");
    return k;
}

// ---- cache ----

uint64_t fnv1a64(const std::string& bytes)
{
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string stage_cache_name(int m, const StageOptions& opt)
{
    std::ostringstream key;
    key << "kakeya.stage/1;m=" << m << ";containment=" << opt.containment << ";relaxed_k=" << opt.relaxed_k;
    for (int i = 1; i <= m; ++i)
        key << ";eps" << i << "=" << num(opt.eps_for(i));
    char buf[64];
    std::snprintf(buf, sizeof buf, "stage-m%d-%016" PRIx64 ".json", m, fnv1a64(key.str()));
    return buf;
}

StageSet cached_stage(int m, const StageOptions& opt, const std::string& dir)
{
    std::filesystem::path p = std::filesystem::path(dir) / stage_cache_name(m, opt);
    if (std::filesystem::exists(p))
        return load_stage(p.string());
    StageSet s = build_stage(m, opt);
    std::filesystem::create_directories(dir);
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    save_stage(tmp.string(), s);
    std::filesystem::rename(tmp, p);
    return s;
}

}
