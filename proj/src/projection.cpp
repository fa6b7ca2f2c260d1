#include "kakeya/projection.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kakeya {

PlaneTriple::PlaneTriple(double a_, double b_, double c_) : a(a_), b(b_), c(c_)
{
    if (!(c > 0) || std::abs(c * c - b * b - 1) > 1e-12 * std::max(1.0, c * c)) {
        std::ostringstream os;
        os << "triple (" << a << ", " << b << ", " << c << ") is not on the sheet c^2 - b^2 = 1, c > 0";
        throw std::invalid_argument(os.str());
    }
}

PlaneTriple lift_f(double a, double b)
{
    return {a, b, std::sqrt(1 + b * b)};
}

double lifted_projection(double a, double b, Direction2 d)
{
    return a + d.x * b + d.y * std::sqrt(1 + b * b);
}

namespace {

double g_of(double b, Direction2 d)
{
    return d.x * b + d.y * std::sqrt(1 + b * b);
}

// Interior critical point of g, when g has one.
bool critical_b(Direction2 d, double& b)
{
    if (d.y == 0)
        return false;
    double u = -d.x / d.y;
    if (!(std::abs(u) < 1))
        return false;
    b = u / std::sqrt(1 - u * u);
    return true;
}

}

Interval lifted_range(double b0, double b1, Direction2 d)
{
    double g0 = g_of(b0, d), g1 = g_of(b1, d);
    double lo = std::min(g0, g1), hi = std::max(g0, g1);
    double bc;
    if (critical_b(d, bc) && bc > b0 && bc < b1) {
        double gc = g_of(bc, d);
        lo = std::min(lo, gc);
        hi = std::max(hi, gc);
    }
    return {lo, hi};
}

double tangent_slope(Direction2 d, double b)
{
    return -d.x - d.y * b / std::sqrt(1 + b * b);
}

bool HalfPlaneF::contains(double b) const
{
    switch (kind) {
    case Kind::all: return true;
    case Kind::empty: return false;
    case Kind::b_at_most: return b <= threshold;
    case Kind::b_at_least: return b >= threshold;
    }
    return false;
}

std::optional<Interval> HalfPlaneF::clip(double b0, double b1) const
{
    double lo = b0, hi = b1;
    switch (kind) {
    case Kind::all: break;
    case Kind::empty: return std::nullopt;
    case Kind::b_at_most: hi = std::min(hi, threshold); break;
    case Kind::b_at_least: lo = std::max(lo, threshold); break;
    }
    if (!(lo < hi))
        return std::nullopt;
    return Interval(lo, hi);
}

HalfPlaneF region_F(Direction2 d)
{
    using K = HalfPlaneF::Kind;
    if (d.y == 0)
        return {d.x <= 0 ? K::all : K::empty, 0};
    double u = -d.x / d.y;
    if (d.y > 0) {
        if (u >= 1)
            return {K::all, 0};
        if (u <= -1)
            return {K::empty, 0};
        return {K::b_at_most, u / std::sqrt(1 - u * u)};
    }
    if (u <= -1)
        return {K::all, 0};
    if (u >= 1)
        return {K::empty, 0};
    return {K::b_at_least, u / std::sqrt(1 - u * u)};
}

Interval project_lifted_rect(const AxisRect& r, Direction2 d)
{
    Interval g = lifted_range(r.b0, r.b1, d);
    return {r.a0 + g.lo, r.a1 + g.hi};
}

namespace {

double measure_with(const StageSet& s, Direction2 d, const std::function<std::optional<Interval>(double, double)>& clip)
{
    std::vector<Interval> iv;
    iv.reserve(s.size());
    double w = s.rect_width();
    double fN = static_cast<double>(s.N);
    for (size_t n = 0; n < s.size(); ++n) {
        double b0 = n / fN, b1 = (n + 1) / fN;
        std::optional<Interval> band = clip ? clip(b0, b1) : Interval(b0, b1);
        if (!band)
            continue;
        Interval g = lifted_range(band->lo, band->hi, d);
        iv.emplace_back(s.anchors[n] + g.lo, s.anchors[n] + w + g.hi);
    }
    return union_measure_inplace(iv);
}

}

double stage_projection_measure(const StageSet& s, Direction2 d, const std::optional<HalfPlaneF>& clip)
{
    if (!clip)
        return measure_with(s, d, nullptr);
    HalfPlaneF f = *clip;
    return measure_with(s, d, [f](double b0, double b1) { return f.clip(b0, b1); });
}

double stage_projection_measure_complement(const StageSet& s, Direction2 d, const HalfPlaneF& clip)
{
    using K = HalfPlaneF::Kind;
    HalfPlaneF other;
    switch (clip.kind) {
    case K::all: other = {K::empty, 0}; break;
    case K::empty: other = {K::all, 0}; break;
    case K::b_at_most: other = {K::b_at_least, clip.threshold}; break;
    case K::b_at_least: other = {K::b_at_most, clip.threshold}; break;
    }
    return stage_projection_measure(s, d, other);
}

namespace {

std::vector<AxisRect> clipped_rects(const StageSet& s, const std::optional<HalfPlaneF>& clip)
{
    std::vector<AxisRect> rects;
    for (size_t n = 0; n < s.size(); ++n) {
        AxisRect r = s.rect(n);
        if (clip) {
            std::optional<Interval> band = clip->clip(r.b0, r.b1);
            if (!band)
                continue;
            r = AxisRect(r.a0, r.a1, band->lo, band->hi);
        }
        rects.push_back(r);
    }
    return rects;
}

}

McEstimate mc_oracle(const StageSet& s, Direction2 d, uint64_t samples, int bins, uint64_t seed,
                     const std::optional<HalfPlaneF>& clip)
{
    if (samples < 10000)
        throw std::invalid_argument("mc_oracle needs at least 10^4 samples");
    if (bins < 1)
        throw std::invalid_argument("mc_oracle needs at least one bin");

    std::vector<AxisRect> rects = clipped_rects(s, clip);
    std::vector<double> cumulative;
    double total = 0;
    for (const AxisRect& r : rects) {
        total += r.area();
        cumulative.push_back(total);
    }
    if (!(total > 0))
        throw std::invalid_argument("zero-area stage");

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const AxisRect& r : rects) {
        Interval iv = project_lifted_rect(r, d);
        lo = std::min(lo, iv.lo);
        hi = std::max(hi, iv.hi);
    }

    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1p-53; };
    std::vector<uint64_t> counts(static_cast<size_t>(bins), 0);
    double w = (hi - lo) / bins;
    for (uint64_t i = 0; i < samples; ++i) {
        double pick = uniform() * total;
        size_t k = static_cast<size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        k = std::min(k, rects.size() - 1);
        const AxisRect& r = rects[k];
        double a = r.a0 + uniform() * r.width();
        double b = r.b0 + uniform() * r.height();
        double v = lifted_projection(a, b, d);
        long bin = w > 0 ? static_cast<long>((v - lo) / w) : 0;
        bin = std::clamp(bin, 0L, static_cast<long>(bins) - 1);
        ++counts[static_cast<size_t>(bin)];
    }

    McEstimate est;
    double var = 0;
    long covered = 0;
    bool in_run = false;
    double n = static_cast<double>(samples);
    for (uint64_t c : counts) {
        if (c > 0) {
            ++covered;
            double q = 1 - std::pow(1 - c / n, n);
            var += q * (1 - q);
            if (!in_run)
                ++est.runs;
        }
        in_run = c > 0;
    }
    est.estimate = covered * w;
    est.standard_error = w * std::sqrt(var);
    est.ci = 3 * est.standard_error + 4 * w * est.runs;
    return est;
}

McEstimate mc_hit_oracle(const StageSet& s, Direction2 d, uint64_t samples, uint64_t seed,
                         const std::optional<HalfPlaneF>& clip)
{
    if (samples < 10000)
        throw std::invalid_argument("mc_hit_oracle needs at least 10^4 samples");
    std::vector<Interval> iv;
    for (const AxisRect& r : clipped_rects(s, clip))
        iv.push_back(project_lifted_rect(r, d));
    if (iv.empty())
        throw std::invalid_argument("zero-area stage");
    std::sort(iv.begin(), iv.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<double> starts, reach;
    double far = -std::numeric_limits<double>::infinity();
    for (const Interval& i : iv) {
        starts.push_back(i.lo);
        far = std::max(far, i.hi);
        reach.push_back(far);
    }
    double lo = starts.front(), len = far - lo;

    std::mt19937_64 rng(seed);
    uint64_t hits = 0;
    for (uint64_t k = 0; k < samples; ++k) {
        double v = lo + static_cast<double>(rng() >> 11) * 0x1p-53 * len;
        auto it = std::upper_bound(starts.begin(), starts.end(), v);
        if (it != starts.begin() && reach[static_cast<size_t>(it - starts.begin()) - 1] >= v)
            ++hits;
    }
    double n = static_cast<double>(samples), p = hits / n;
    McEstimate est;
    est.estimate = len * p;
    est.standard_error = len * std::sqrt(p * (1 - p) / n);
    est.ci = 3 * est.standard_error + 1e-12 * len;
    return est;
}

std::vector<double> claim_grid_axis(int points, double limit)
{
    if (points < 1)
        throw std::invalid_argument("grid needs at least one point");
    std::vector<double> out;
    for (int i = 0; i < points; ++i)
        out.push_back(-limit + (i + 0.5) * 2 * limit / points);
    return out;
}

std::vector<ClaimRow> claim_report(const StageSet& s, int points)
{
    if (!s.even())
        throw std::invalid_argument("claim_report needs an even stage");
    if (!s.parent)
        throw std::invalid_argument("stage does not record the parameters of its parent stage");
    const StageParams& prev = *s.parent;
    double half = prev.eps_m / 2;
    double fN = static_cast<double>(prev.N);
    std::vector<ClaimRow> rows;
    for (double x : claim_grid_axis(points, s.m)) {
        for (double y : claim_grid_axis(points, s.m)) {
            Direction2 d{x, y};
            HalfPlaneF F = region_F(d);
            ClaimRow row;
            row.x = x;
            row.y = y;
            row.measured = stage_projection_measure(s, d, F);
            row.measured_complement = stage_projection_measure_complement(s, d, F);
            row.bound = 3 * std::sqrt(1 + x * x + y * y) / (2.0 * (s.m - 1));
            bool covered = std::abs(x) < s.m && std::abs(y) < s.m;
            for (int64_t n = 0; covered && n < prev.N; ++n) {
                std::optional<Interval> band = F.clip(n / fN, (n + 1) / fN);
                if (!band)
                    continue;
                double t0 = tangent_slope(d, band->lo), t1 = tangent_slope(d, band->hi);
                double tmin = std::max(0.0, std::min(t0, t1)), tmax = std::max(t0, t1);
                double k = std::floor(tmin / half);
                if (tmax > (k + 2) * half || k + 2 >= prev.k_m)
                    covered = false;
            }
            row.covered = covered;
            row.pass = row.measured <= row.bound;
            rows.push_back(row);
        }
    }
    return rows;
}

std::pair<Vec2, Vec2> scaled_mid_segment(const Parallelogram& p, double factor)
{
    Vec2 a = p.anchor + p.edge_v * 0.5;
    Vec2 b = a + p.edge_u;
    Vec2 m = (a + b) * 0.5;
    return {m + (a - m) * factor, m + (b - m) * factor};
}

bool verify_funnel(Vec2 a, Vec2 b, std::span<const Parallelogram> family, double lo, double hi)
{
    if (std::abs(a.y - b.y) > 1e-12 * std::max(1.0, std::abs(a.y)))
        throw std::invalid_argument("funnel segment must be horizontal");
    double left = std::min(a.x, b.x), right = std::max(a.x, b.x);
    double tol = 1e-12 * std::max(1.0, std::max(std::abs(left), std::abs(right)));
    for (const Parallelogram& p : family) {
        for (Vec2 v : p.vertices()) {
            for (double slope : {lo, hi}) {
                double x = v.x + slope * (a.y - v.y);
                if (x < left - tol || x > right + tol)
                    return false;
            }
        }
    }
    return true;
}

}
