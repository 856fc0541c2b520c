#pragma once

#include <functional>
#include <memory>

#include "lfray/common.hpp"
#include "lfray/scalar_field.hpp"

namespace lfray {

class Metric;

// Spatial Minkowski norm acting on the fibers Ker(dt) of a product metric
// dt^2 - F^2. Evaluators receive the full chart point, so the norm may depend
// on time as well as position.
class SpatialNorm {
public:
    enum class Kind { Isotropic, Randers, Custom };

    using NormFn = std::function<double(const Vec& x, const Vec& sv)>;

    // F = (n(x)/c0) |sv|, refractive-index field n.
    static SpatialNorm isotropic(int spatial_dim, ScalarField index, double c0 = 1.0);
    // Zermelo data: unit h-speed mover drifted by the wind W(x), |W|_h < 1.
    // F(sv) is the time needed to realize the displacement sv.
    static SpatialNorm randers(Mat h, std::vector<ScalarField> wind);
    static SpatialNorm custom(int spatial_dim, NormFn fn);

    int spatial_dim() const { return spatial_dim_; }
    Kind kind() const { return kind_; }
    bool symmetric() const;  // F(-v) = F(v)
    bool constant_coefficients() const;

    double value(const Vec& x, const Vec& sv) const;
    // dF^2/dsv and (1/2) Hess_sv F^2 by central differences (exact for none of
    // the families; the step policy is shared with Metric).
    Vec grad_sq(const Vec& x, const Vec& sv) const;
    Mat fundamental(const Vec& x, const Vec& sv) const;

    // Freeze the coefficient fields at x.
    SpatialNorm frozen_at(const Vec& x) const;

    const Mat& randers_h() const { return h_; }
    Vec randers_wind(const Vec& x) const;
    const ScalarField& wind_field(int i) const { return wind_.at(i); }
    const ScalarField& index_field() const { return index_; }
    double index_c0() const { return c0_; }

private:
    Kind kind_ = Kind::Isotropic;
    int spatial_dim_ = 0;
    ScalarField index_ = ScalarField::constant(1.0);
    double c0_ = 1.0;
    Mat h_;
    std::vector<ScalarField> wind_;
    NormFn fn_;
};

// Cone triple (omega, T, F) at a fixed chart point: a timelike one-form, an
// omega-unit timelike vector, and the spatial norm on Ker(omega) whose graph
// reconstructs the cone: v lightlike iff v = F(pi(v)) T + pi(v).
class ConeTriple {
public:
    ConeTriple(const Metric* metric, Vec point, Vec omega, Vec timelike, Mat spatial_basis);

    const Vec& point() const { return point_; }
    const Vec& omega() const { return omega_; }
    const Vec& timelike() const { return timelike_; }
    // Orthonormal (Euclidean) basis of Ker(omega), one column per spatial axis.
    const Mat& spatial_basis() const { return spatial_basis_; }

    // F(z) for z in Ker(omega): the unique a > 0 with L(a T + z) = 0.
    double norm(const Vec& z) const;
    // F(z) T + z, lightlike within tolerance.
    Vec lift(const Vec& z) const;

private:
    const Metric* metric_;
    Vec point_;
    Vec omega_;
    Vec timelike_;
    Mat spatial_basis_;
};

// A Lorentz-Finsler metric family, evaluable with derivatives at any chart
// point. Coordinate 0 is the time coordinate for product metrics. Instances
// are immutable after construction and safe to share across threads.
class Metric {
public:
    enum class Family { Quadratic, Product, CustomL };

    using CustomLFn = std::function<double(const Vec& x, const Vec& y)>;

    // L = phi(x) y^T G0 y with G0 symmetric of signature (+,-,...,-).
    // time_ref fixes the future cone: the component of {L>0} on which
    // omega = phi G0 time_ref is positive.
    static Metric quadratic(Mat g0);
    static Metric quadratic(Mat g0, ScalarField conformal);
    static Metric quadratic(Mat g0, ScalarField conformal, Vec time_ref);

    // L = (y^0)^2 - F(x, ytilde)^2, future cone y^0 > 0.
    static Metric product(SpatialNorm norm);
    static Metric product_isotropic(int dim, ScalarField index, double c0 = 1.0);

    // Library-embedding escape hatch. omega_ref is a constant covector
    // positive on the future cone (defaults to dt).
    static Metric custom(int dim, CustomLFn fn);
    static Metric custom(int dim, CustomLFn fn, Vec omega_ref);

    int dim() const { return dim_; }  // n+1
    Family family() const { return family_; }
    bool reversible() const;
    // Geodesics are straight lines; the christoffel symbols vanish.
    bool constant_coefficients() const;

    const Box& chart() const { return chart_; }
    void set_chart(Box box) { chart_ = std::move(box); }

    // L(x, y). Throws DomainError outside the chart box and
    // InvalidMetricError if the Randers wind reaches h-norm 1.
    double eval(const Vec& x, const Vec& y) const;

    // Gradient of L in y: the covector w -> 2 g_y(y, w).
    Vec grad(const Vec& x, const Vec& y) const;

    // Fundamental tensor g_y = (1/2) Hess_y L. The checked variant throws
    // DegenerateTensorError unless the signature is (+,-,...,-) with the
    // smallest |eigenvalue| above tolerance.
    Mat fundamental_tensor(const Vec& x, const Vec& y) const;
    Mat fundamental_tensor_checked(const Vec& x, const Vec& y) const;

    // Partial derivative of the components of g_y in x^i, y held fixed.
    Mat dg_dx(const Vec& x, const Vec& y, int i) const;

    // Magnitude of the terms entering L(y) before cancellation; tolerance
    // bands are relative to max(1, scale).
    double quadratic_scale(const Vec& x, const Vec& y) const;

    // Time-orientation covector at x: positive on the future cone.
    Vec time_covector(const Vec& x) const;

    ConeTriple cone_triple_at(const Vec& x) const;

    Metric frozen_at(const Vec& x) const;

    // True when the two metrics have identical frozen coefficients at the
    // respective points (used by the grid tracer to skip no-op interfaces).
    static bool same_coefficients(const Metric& a, const Vec& xa, const Metric& b, const Vec& xb,
                                  double tol = 0.0);

    const SpatialNorm* spatial_norm() const {
        return family_ == Family::Product ? &norm_ : nullptr;
    }
    const Mat& quadratic_matrix() const { return g0_; }
    const ScalarField& conformal_factor() const { return conformal_; }
    const Vec& time_reference() const { return time_ref_; }

    // Samples points and directions, checking positivity, 1-homogeneity and
    // positive-definite spatial fundamental tensor for product norms and the
    // Lorentzian signature for quadratic data. Throws InvalidMetricError.
    void validate_probabilistic(int samples = 32, unsigned seed = 7u) const;

private:
    Metric() = default;
    void check_chart(const Vec& x) const;

    Family family_ = Family::Quadratic;
    int dim_ = 0;
    Box chart_;
    bool frozen_flag_ = false;

    // Quadratic
    Mat g0_;
    ScalarField conformal_ = ScalarField::constant(1.0);
    Vec time_ref_;

    // Product
    SpatialNorm norm_ = SpatialNorm::isotropic(0, ScalarField::constant(1.0));

    // CustomL
    CustomLFn custom_;
    Vec omega_ref_;
};

// Finite-difference step policy shared by every non-quadratic family.
struct FdSteps {
    static double first(const Vec& v) { return 1e-5 * (1.0 + v.norm()); }
    static double hessian(const Vec& v) { return 1e-4 * (1.0 + v.norm()); }
    static double space(const Vec& x) { return 1e-5 * (1.0 + x.norm()); }
};

}  // namespace lfray
