#pragma once

#include "kakeya/geometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace kakeya {

struct StageParams {
    int m = 1;
    double eps_m = 1;
    int64_t N = 1;
    int k_m = 0;           // sprouting depth
    double eps_next = 0;   // width parameter of the next stage
    int64_t multiple = 1;  // N_next / (2^k_m N)
    int64_t N_next = 0;
    bool conforming = true;
};

struct StageOptions {
    // Width parameter for stage m; 0 selects the default 1 for m = 1 and
    // 1/(m+1) afterwards.
    std::function<double(int)> eps_rule;
    // Upper bound on rectangles, leaves and bands handled by one call;
    // 0 reads KAKEYA_BUDGET or falls back to 10^7.
    uint64_t budget = 0;
    // Shift each new rectangle right far enough that it stays inside its
    // leaf; this forces a larger band count.
    bool containment = true;
    // Use this depth instead of the minimal one; outputs with k * eps < 2m are
    // stamped non-conforming.
    int relaxed_k = 0;

    double eps_for(int m) const;
    uint64_t effective_budget() const;
};

uint64_t default_budget();

// Canonical stage: one rectangle [a_n, a_n + eps/N] x [n/N, (n+1)/N] per band.
struct StageSet {
    int m = 1;
    double eps = 1;
    int64_t N = 1;
    std::vector<double> anchors;
    bool conforming = true;
    std::optional<StageParams> parent;  // parameters that produced this stage

    bool even() const { return m % 2 == 0; }
    size_t size() const { return anchors.size(); }
    double rect_width() const { return eps / static_cast<double>(N); }
    double band_height() const { return 1.0 / static_cast<double>(N); }
    AxisRect rect(size_t n) const;
    std::vector<AxisRect> rects() const;
    // Measure of the projection of the stage onto the a axis.
    double a_projection() const;
};

StageSet initial_stage();

StageParams schedule_params(int m, double eps_m, int64_t N, const StageOptions& opt = {});

// Canonical split of a generation (i-1) parallelogram into generation i
// children (lower, upper).
std::pair<Parallelogram, Parallelogram> split_step(const Parallelogram& p, int i, double eps, int64_t N);

std::vector<Parallelogram> sprout(const AxisRect& r, int k, double eps, int64_t N, uint64_t budget = 0);

// Depth first walk over every node of the sprouting tree, generation 0 first.
void sprout_visit(const AxisRect& r, int k, double eps, int64_t N,
                  const std::function<void(int gen, const Parallelogram&)>& visit);

std::vector<AxisRect> discretize_leaf(const Parallelogram& leaf, int64_t N_next, double eps_next,
                                      bool containment = true);

StageSet advance_stage(const StageSet& s, const StageOptions& opt = {});

AxisRect reflect_S(const AxisRect& r);
StageSet reflect_S(const StageSet& s);

StageSet build_stage(int m, const StageOptions& opt = {});

}
