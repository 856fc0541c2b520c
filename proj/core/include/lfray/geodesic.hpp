#pragma once

#include <functional>
#include <optional>

#include "lfray/metric.hpp"

namespace lfray {

struct GeodesicState {
    Vec x;     // chart point
    Vec y;     // velocity
    double s;  // affine parameter
};

enum class StopReason { InterfaceHit, BoundsExit, MaxSteps, ReceiverHit };

const char* to_string(StopReason r);

struct Segment {
    std::vector<GeodesicState> samples;  // strictly increasing in s
    int medium = 1;
    StopReason stop_reason = StopReason::MaxSteps;
};

struct IntegrateOptions {
    double step = 1e-3;  // absolute step; scenes default it to 1e-3 of the chart diameter
    int max_steps = 200000;
    bool normalize = true;  // entry normalization: omega(y)=1 (product) or |y|=1
    bool project = true;    // cone projection after every step
};

// Inspects the step just taken; a non-empty result terminates integration.
using StopPredicate =
    std::function<std::optional<StopReason>(const GeodesicState& prev, const GeodesicState& cur)>;

// Formal Christoffel symbols of the metric at (x, y), indexed [k](i, j);
// symmetric in (i, j), identically zero for constant-coefficient metrics.
std::vector<Mat> formal_christoffel(const Metric& m, const Vec& x, const Vec& y);

// Geodesic acceleration: a^k = -gamma^k_ij(y) y^i y^j.
Vec geodesic_accel(const Metric& m, const Vec& x, const Vec& y);

// Single RK4 step of size h, optionally followed by cone projection. Used by
// the integrator and by interface-crossing refinement.
GeodesicState rk4_step(const Metric& m, const GeodesicState& state, double h, bool project = true);

// Classical RK4 with cone projection each step. The returned segment ends with
// the first state for which the stop predicate fires (the previous sample and
// the final one bracket an interface crossing when the reason is
// InterfaceHit). Throws ConeExitError when the restored velocity leaves the
// solvable neighbourhood of the cone.
Segment integrate_geodesic(const Metric& m, const GeodesicState& start, const StopPredicate& stop,
                           const IntegrateOptions& opts = {}, int medium_label = 1);

// Restore an approximately lightlike velocity onto the cone: product metrics
// re-solve the time component keeping the spatial part, quadratic and custom
// metrics adjust minimally along the time-orientation direction.
Vec project_to_cone(const Metric& m, const Vec& x, const Vec& y, const Tolerances& tol = {});

// Max over interior samples of the (normalized) component of the covariant
// acceleration orthogonal to the velocity; near zero iff the sampled curve is
// a pregeodesic.
double pregeodesic_residual(const Metric& m, const Segment& seg);

}  // namespace lfray
