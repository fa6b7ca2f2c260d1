#include "kakeya/stage.hpp"
#include "kakeya/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kakeya {

namespace {

bool close(double a, double b, double rel = 1e-9)
{
    return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

int64_t ceil_int(double v)
{
    return static_cast<int64_t>(std::ceil(v - 1e-9));
}

}

double StageOptions::eps_for(int m) const
{
    if (eps_rule)
        return eps_rule(m);
    return m <= 1 ? 1.0 : 1.0 / (m + 1);
}

uint64_t default_budget()
{
    if (const char* env = std::getenv("KAKEYA_BUDGET")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v >= 1)
            return static_cast<uint64_t>(v);
    }
    return 10'000'000;
}

uint64_t StageOptions::effective_budget() const
{
    return budget ? budget : default_budget();
}

AxisRect StageSet::rect(size_t n) const
{
    double a = anchors.at(n);
    double fn = static_cast<double>(N);
    return {a, a + eps / fn, n / fn, (n + 1) / fn};
}

std::vector<AxisRect> StageSet::rects() const
{
    std::vector<AxisRect> out;
    out.reserve(anchors.size());
    for (size_t n = 0; n < anchors.size(); ++n)
        out.push_back(rect(n));
    return out;
}

double StageSet::a_projection() const
{
    std::vector<Interval> iv;
    iv.reserve(anchors.size());
    double w = rect_width();
    for (double a : anchors)
        iv.emplace_back(a, a + w);
    return union_measure_inplace(iv);
}

StageSet initial_stage()
{
    StageSet s;
    s.m = 1;
    s.eps = 1;
    s.N = 1;
    s.anchors = {0.0};
    return s;
}

StageParams schedule_params(int m, double eps_m, int64_t N, const StageOptions& opt)
{
    if (m < 1)
        throw std::invalid_argument("stage index must be at least 1");
    if (!(eps_m > 0) || eps_m > 1.0 / m * (1 + 1e-12)) {
        std::ostringstream os;
        os << "width parameter " << eps_m << " outside (0, 1/" << m << "]";
        throw std::invalid_argument(os.str());
    }
    if (N < 1)
        throw std::invalid_argument("band count must be positive");

    StageParams p;
    p.m = m;
    p.eps_m = eps_m;
    p.N = N;
    int k_min = static_cast<int>(ceil_int(2.0 * m / eps_m));
    p.k_m = opt.relaxed_k > 0 ? opt.relaxed_k : k_min;
    p.conforming = p.k_m * eps_m >= 2.0 * m * (1 - 1e-12);
    p.eps_next = opt.eps_for(m + 1);
    if (!(p.eps_next > 0) || p.eps_next > 1.0 / (m + 1) * (1 + 1e-12))
        throw std::invalid_argument("next width parameter outside (0, 1/(m+1)]");

    uint64_t budget = opt.effective_budget();
    double leaves = std::ldexp(static_cast<double>(N), p.k_m);
    if (leaves > static_cast<double>(budget)) {
        std::ostringstream os;
        os << "stage budget exceeded: stage " << m + 1 << " needs " << leaves << " leaves (budget " << budget << ")";
        throw BudgetError(os.str());
    }
    int64_t base = N << p.k_m;
    int64_t c = std::max<int64_t>(1, ceil_int(2.0 * m / p.eps_next / static_cast<double>(base)));
    if (opt.containment) {
        double tau = p.k_m * eps_m / 2;
        c = std::max(c, ceil_int((tau + p.eps_next) / eps_m));
    }
    p.multiple = c;
    if (static_cast<double>(c) * base > static_cast<double>(budget)) {
        std::ostringstream os;
        os << "stage budget exceeded: stage " << m + 1 << " needs " << static_cast<double>(c) * base
           << " bands (budget " << budget << ")";
        throw BudgetError(os.str());
    }
    p.N_next = c * base;
    return p;
}

std::pair<Parallelogram, Parallelogram> split_step(const Parallelogram& p, int i, double eps, int64_t N)
{
    if (i < 1)
        throw std::invalid_argument("split_step needs generation i >= 1");
    double scale = std::ldexp(1.0, -(i - 1)) / static_cast<double>(N);
    double tau_prev = (i - 1) * eps / 2;
    if (std::abs(p.edge_u.y) > 1e-12 * std::abs(p.edge_u.x) || !close(p.width(), eps * scale) ||
        !close(p.height(), scale) || !close(p.side_tangent(), tau_prev)) {
        std::ostringstream os;
        os << "parallelogram is not of generation " << i - 1 << " (width " << p.width() << ", height "
           << p.height() << ", tangent " << p.side_tangent() << ")";
        throw std::invalid_argument(os.str());
    }
    double h = p.height();
    double tau = i * eps / 2;
    Vec2 a = p.anchor + p.edge_v * 0.5;
    Vec2 half_u = p.edge_u * 0.5;
    Vec2 mid = a + half_u;
    Vec2 v{tau * h / 2, h / 2};
    Parallelogram lower(mid - v, half_u, v);
    Parallelogram upper(a, half_u, v);
    return {lower, upper};
}

namespace {

Parallelogram root_of(const AxisRect& r, double eps, int64_t N)
{
    if (!close(r.width(), eps / static_cast<double>(N)) || !close(r.height(), 1.0 / static_cast<double>(N))) {
        std::ostringstream os;
        os << "rectangle is not a stage rectangle for eps " << eps << " and N " << N;
        throw std::invalid_argument(os.str());
    }
    return Parallelogram({r.a0, r.b0}, {r.width(), 0}, {0, r.height()});
}

void walk(const Parallelogram& p, int gen, int k, double eps, int64_t N,
          const std::function<void(int, const Parallelogram&)>& visit, std::vector<Parallelogram>* leaves)
{
    if (visit)
        visit(gen, p);
    if (gen == k) {
        if (leaves)
            leaves->push_back(p);
        return;
    }
    auto [lo, up] = split_step(p, gen + 1, eps, N);
    walk(lo, gen + 1, k, eps, N, visit, leaves);
    walk(up, gen + 1, k, eps, N, visit, leaves);
}

}

std::vector<Parallelogram> sprout(const AxisRect& r, int k, double eps, int64_t N, uint64_t budget)
{
    if (k < 0)
        throw std::invalid_argument("sprouting depth must be non-negative");
    if (!budget)
        budget = default_budget();
    if (std::ldexp(1.0, k) > static_cast<double>(budget))
        throw BudgetError("stage budget exceeded: too many leaves in sprout");
    std::vector<Parallelogram> leaves;
    leaves.reserve(size_t(1) << k);
    walk(root_of(r, eps, N), 0, k, eps, N, nullptr, &leaves);
    return leaves;
}

void sprout_visit(const AxisRect& r, int k, double eps, int64_t N,
                  const std::function<void(int, const Parallelogram&)>& visit)
{
    walk(root_of(r, eps, N), 0, k, eps, N, visit, nullptr);
}

namespace {

// Left edge of the band rectangle [u0, u1] inside `leaf`.
double band_anchor(const Parallelogram& leaf, double u0, double u1, double w_next, bool containment)
{
    double left0 = leaf.left_at(u0), left1 = leaf.left_at(u1);
    if (!containment) {
        if (w_next > leaf.width() * (1 + 1e-12))
            throw std::invalid_argument("leaf too thin for the next stage width");
        return left0;
    }
    double t = std::max(left0, left1);
    double room = std::min(left0, left1) + leaf.width();
    if (t + w_next > room + 1e-12 * std::max(1.0, std::abs(room))) {
        std::ostringstream os;
        os << "leaf too thin: band rectangle of width " << w_next << " does not fit (room " << room - t << ")";
        throw std::invalid_argument(os.str());
    }
    return t;
}

}

std::vector<AxisRect> discretize_leaf(const Parallelogram& leaf, int64_t N_next, double eps_next, bool containment)
{
    double fN = static_cast<double>(N_next);
    double bands = leaf.height() * fN;
    int64_t count = std::llround(bands);
    if (count < 1 || std::abs(bands - count) > 1e-6)
        throw std::invalid_argument("leaf height is not a whole number of bands");
    int64_t first = std::llround(leaf.anchor.y * fN);
    if (std::abs(leaf.anchor.y * fN - first) > 1e-6)
        throw std::invalid_argument("leaf does not start on a band boundary");
    double w = eps_next / fN;
    std::vector<AxisRect> out;
    for (int64_t q = 0; q < count; ++q) {
        double u0 = (first + q) / fN, u1 = (first + q + 1) / fN;
        double t = band_anchor(leaf, u0, u1, w, containment);
        out.emplace_back(t, t + w, u0, u1);
    }
    return out;
}

AxisRect reflect_S(const AxisRect& r)
{
    return {r.a0, r.a1, 1 - r.b1, 1 - r.b0};
}

StageSet reflect_S(const StageSet& s)
{
    StageSet out = s;
    std::reverse(out.anchors.begin(), out.anchors.end());
    return out;
}

StageSet advance_stage(const StageSet& s, const StageOptions& opt)
{
    if (s.anchors.size() != static_cast<size_t>(s.N))
        throw std::invalid_argument("stage is not canonical: anchor count differs from N");
    StageParams p = schedule_params(s.m, s.eps, s.N, opt);
    const StageSet src = s.even() ? reflect_S(s) : s;

    StageSet out;
    out.m = s.m + 1;
    out.eps = p.eps_next;
    out.N = p.N_next;
    out.conforming = s.conforming && p.conforming;
    out.parent = p;
    out.anchors.assign(static_cast<size_t>(p.N_next), 0.0);

    const int64_t per_rect = int64_t(1) << p.k_m;
    const double fN = static_cast<double>(p.N_next);
    const double w = p.eps_next / fN;
    for (int64_t n = 0; n < s.N; ++n) {
        AxisRect r = src.rect(static_cast<size_t>(n));
        std::vector<Parallelogram> leaves = sprout(r, p.k_m, s.eps, s.N, opt.effective_budget());
        for (int64_t j = 0; j < per_rect; ++j) {
            const Parallelogram& leaf = leaves[static_cast<size_t>(j)];
            for (int64_t q = 0; q < p.multiple; ++q) {
                int64_t band = (n * per_rect + j) * p.multiple + q;
                double u0 = band / fN, u1 = (band + 1) / fN;
                double t = band_anchor(leaf, u0, u1, w, opt.containment);
                if (opt.containment && (t < r.a0 - 1e-12 || t + w > r.a1 + 1e-12))
                    throw BoundError("new rectangle leaves its parent rectangle");
                out.anchors[static_cast<size_t>(band)] = t;
            }
        }
    }
    if (s.even())
        out = reflect_S(out);

    double proj = out.a_projection();
    if (proj > p.eps_next * (1 + 1e-9) || proj > 1.0 / out.m * (1 + 1e-9)) {
        std::ostringstream os;
        os << "a-projection " << proj << " exceeds " << p.eps_next;
        throw BoundError(os.str());
    }
    return out;
}

StageSet build_stage(int m, const StageOptions& opt)
{
    if (m < 1)
        throw std::invalid_argument("stage index must be at least 1");
    StageSet s = initial_stage();
    while (s.m < m)
        s = advance_stage(s, opt);
    return s;
}

}
