#pragma once

#include <unordered_map>

#include "lfray/tracer.hpp"

namespace lfray {

// Discretization of a cone structure: a grid over the chart box whose cells
// carry the metric frozen at their (jittered) centers. A two-media scene is
// discretized by freezing whichever metric owns the cell center.
struct GridScene {
    Metric metric1 = Metric::quadratic(Mat::Identity(3, 3));
    Metric metric2 = Metric::quadratic(Mat::Identity(3, 3));
    std::optional<InterfaceSpec> interface_spec;  // absent: single smooth medium
    Box box;
    std::vector<int> resolution;  // per axis, each >= 2
    unsigned seed = 1;
    double jitter_scale = 1e-3;
};

class CellComplex {
public:
    CellComplex(const GridScene& grid, int jitter_draw = 0);

    const Vec& origin() const { return origin_; }
    const Vec& cell_size() const { return cell_size_; }
    const std::vector<int>& resolution() const { return res_; }

    std::vector<int> cell_of(const Vec& x) const;
    Vec center_of(const std::vector<int>& idx) const;
    const Metric& cell_metric(const std::vector<int>& idx) const;
    bool inside(const std::vector<int>& idx) const;

private:
    const GridScene* grid_;
    Vec origin_;
    Vec cell_size_;
    std::vector<int> res_;
    mutable std::unordered_map<long, Metric> cache_;
    long flat_index(const std::vector<int>& idx) const;
};

// Build the cell complex; the grid origin is jittered deterministically from
// the stored seed so cell faces avoid degenerate causal characters.
CellComplex discretize(const GridScene& grid, int jitter_draw = 0);

// Straight lightlike rays within cells, with every face crossing resolved by
// the refraction solve between the two frozen metrics; spacelike faces take
// the locally time-minimizing branch. Faces with borderline (lightlike within
// tolerance) causal character trigger a re-jittered retry; persistent
// degeneracy or an unresolvable face throws TrappedError.
Trajectory trace_discretized(const GridScene& grid, const Vec& start, const Vec& dir,
                             int max_events = 100000, const Tolerances& tol = {},
                             int stop_axis = -1, double stop_value = 0.0);

struct ConvergenceRow {
    int resolution;
    double error;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double fitted_order = 0.0;
};

// Endpoint error of the discretized trace against the smooth trace at a fixed
// stopping plane, per resolution, with the empirical order fitted from
// successive refinements.
ConvergenceTable convergence_study(const GridScene& grid, const SceneConfig& smooth_scene,
                                   const Vec& start, const Vec& dir,
                                   const std::vector<int>& resolutions, int stop_axis,
                                   double stop_value);

}  // namespace lfray
