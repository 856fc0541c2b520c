#pragma once

#include <optional>

#include "lfray/interface.hpp"
#include "lfray/metric.hpp"

namespace lfray {

enum class BranchPolicy { SnellConeGeodesicOnly, AllBranches, ReflectOnly };

const char* to_string(BranchPolicy p);

// Point source, or a submanifold source given by a point and a tangent basis.
struct SourceSpec {
    Vec point;
    Mat basis;  // zero columns for a point source

    bool is_point() const { return basis.cols() == 0; }
};

// Receiver: a parametrized curve (affine by default, callback for library
// embeddings) or a submanifold with an affine temporal function.
struct ReceiverSpec {
    enum class Kind { Curve, Submanifold };
    Kind kind = Kind::Curve;

    // Curve alpha(t) = origin + t * velocity, t in [param_min, param_max],
    // unless a callback path is supplied.
    Vec origin;
    Vec velocity;
    std::function<Vec(double)> path;
    std::function<Vec(double)> path_tangent;
    double param_min = -1e6;
    double param_max = 1e6;

    // Submanifold through `point` spanned by `basis`, with temporal function
    // t_B(x) = tB_gradient . (x - point).
    Vec point;
    Mat basis;
    Vec tB_gradient;

    Vec position(double t) const;
    Vec tangent(double t) const;

    // Euclidean distance from x to the receiver set and the nearest parameter
    // (curve case) or the temporal-function value (submanifold case).
    std::pair<double, double> distance(const Vec& x) const;
    // Minimum distance from the segment [a, b] to the receiver set.
    double segment_distance(const Vec& a, const Vec& b) const;
    // Basis of Ker(dt_B) inside the submanifold tangent space.
    Mat temporal_kernel_basis() const;
};

struct SceneConfig {
    int dim = 3;  // n+1
    Box chart;
    Metric metric1 = Metric::quadratic(Mat::Identity(3, 3));
    Metric metric2 = Metric::quadratic(Mat::Identity(3, 3));
    InterfaceSpec interface_spec = InterfaceSpec::plane(Vec::Unit(3, 1), 0.0);
    SourceSpec source;
    std::optional<ReceiverSpec> receiver;
    Tolerances tol;
    IntegrateOptions integrator;
    BranchPolicy branch_policy = BranchPolicy::SnellConeGeodesicOnly;
    int max_events = 8;
    unsigned seed = 1;

    const Metric& metric_for_side(Side s) const {
        return s == Side::Medium2 ? metric2 : metric1;
    }
};

}  // namespace lfray
