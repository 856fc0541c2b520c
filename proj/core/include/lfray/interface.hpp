#pragma once

#include "lfray/causal.hpp"
#include "lfray/geodesic.hpp"
#include "lfray/scalar_field.hpp"

namespace lfray {

// Level-set representation of the interface hypersurface. Convention:
// medium 1 = {f < 0}, medium 2 = {f > 0}, interface = {f = 0}.
class InterfaceSpec {
public:
    using LevelFn = std::function<double(const Vec&)>;
    using GradFn = std::function<Vec(const Vec&)>;

    // f = normal . x - offset
    static InterfaceSpec plane(Vec normal, double offset);
    // f = x[coord] - height(x); height must not depend on x[coord]
    static InterfaceSpec graph(int coord, ScalarField height);
    // f = sum over axes of (x_a - center_a)^2 - radius^2
    static InterfaceSpec cylinder(std::vector<int> axes, Vec center, double radius);
    static InterfaceSpec custom(LevelFn level, GradFn gradient = nullptr);

    double level(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    // Scale for the |f| tolerance bands at x.
    double local_scale(const Vec& x) const;

    enum class Kind { Plane, Graph, Cylinder, Custom };
    Kind kind() const { return kind_; }
    const Vec& plane_normal() const { return normal_; }
    double plane_offset() const { return offset_; }
    int graph_coord() const { return coord_; }
    const ScalarField& graph_height() const { return height_; }
    const std::vector<int>& cylinder_axes() const { return axes_; }
    const Vec& cylinder_center() const { return center_; }
    double cylinder_radius() const { return radius_; }

private:
    Kind kind_ = Kind::Plane;
    Vec normal_;
    double offset_ = 0.0;
    int coord_ = 0;
    ScalarField height_ = ScalarField::constant(0.0);
    std::vector<int> axes_;
    Vec center_;
    double radius_ = 1.0;
    LevelFn level_fn_;
    GradFn grad_fn_;
};

enum class Side { OnInterface = 0, Medium1 = 1, Medium2 = 2 };

struct CrossingEvent {
    double tau = 0.0;   // parameter value of the crossing
    Vec point;          // on the interface, |f| within tolerance
    Vec incoming;       // velocity at tau, on the cone of the incoming medium
    Mat tangent_basis;  // n columns spanning the interface tangent space
    Vec transverse;     // nu with grad f(nu) > 0, pointing into medium 2
};

// Which side of the interface p lies on, with a tolerance band for points on
// the interface itself.
Side side(const InterfaceSpec& spec, const Vec& p, const Tolerances& tol = {});

// Refine the first sign change of f along an integrated segment by sub-step
// re-integration and regula falsi. Throws NoCrossingError when no sign change
// exists and GrazingContactError on tangential contact.
CrossingEvent locate_crossing(const InterfaceSpec& spec, const Metric& m, const Segment& seg,
                              const Tolerances& tol = {});

// Causal character of the interface tangent space at p under the metric.
SubspaceClass classify_interface(const InterfaceSpec& spec, const Metric& m, const Vec& p,
                                 const Tolerances& tol = {});

}  // namespace lfray
