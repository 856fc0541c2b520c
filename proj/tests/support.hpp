#pragma once

#include <random>

#include "lfray/grid.hpp"
#include "lfray/tracer.hpp"

// Shared fixtures and independent oracles for the test suites. Everything
// here deliberately avoids the library's own differentiation and solver
// paths: gradients and Hessians are plain central differences on eval, and
// solution sets come from dense sampling.

namespace lfray::testing {

inline Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

inline Vec vec4(double a, double b, double c, double d) {
    Vec v(4);
    v << a, b, c, d;
    return v;
}

inline Mat minkowski(int dim) {
    Mat g = -Mat::Identity(dim, dim);
    g(0, 0) = 1.0;
    return g;
}

// Independent central-difference gradient of L in y (test oracle; its step
// differs from the library's policy on purpose).
inline Vec fd_grad(const Metric& m, const Vec& x, const Vec& y, double h = 3e-6) {
    Vec g(y.size());
    Vec p = y;
    for (int i = 0; i < y.size(); ++i) {
        p(i) = y(i) + h;
        const double fp = m.eval(x, p);
        p(i) = y(i) - h;
        const double fm = m.eval(x, p);
        p(i) = y(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Independent full central-difference Hessian of L in y.
inline Mat fd_hessian(const Metric& m, const Vec& x, const Vec& y, double h = 2e-4) {
    const int d = static_cast<int>(y.size());
    Mat hess(d, d);
    const double f0 = m.eval(x, y);
    Vec p = y;
    for (int i = 0; i < d; ++i) {
        p(i) = y(i) + h;
        const double fp = m.eval(x, p);
        p(i) = y(i) - h;
        const double fm = m.eval(x, p);
        p(i) = y(i);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            p(i) = y(i) + h;
            p(j) = y(j) + h;
            const double fpp = m.eval(x, p);
            p(j) = y(j) - h;
            const double fpm = m.eval(x, p);
            p(i) = y(i) - h;
            const double fmm = m.eval(x, p);
            p(j) = y(j) + h;
            const double fmp = m.eval(x, p);
            p(i) = y(i);
            p(j) = y(j);
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    return hess;
}

// Random Lorentzian quadratic metric: G = A^T diag(1,-1,...,-1) A with A a
// bounded perturbation of the identity; the matching time reference is
// A^{-1} e0.
inline Metric random_quadratic(std::mt19937_64& rng, int dim, double spread = 0.35) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat a;
    while (true) {
        a = Mat::Identity(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) += spread * gauss(rng) / dim;
        if (std::abs(a.determinant()) > 0.2) break;
    }
    const Mat g = a.transpose() * minkowski(dim) * a;
    const Vec tref = a.inverse().col(0);
    return Metric::quadratic(g, ScalarField::constant(1.0), tref);
}

// Random future lightlike direction for a metric at x.
inline Vec random_lightlike(std::mt19937_64& rng, const Metric& m, const Vec& x) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const ConeTriple triple = m.cone_triple_at(x);
    Vec c(triple.spatial_basis().cols());
    for (int i = 0; i < c.size(); ++i) c(i) = gauss(rng);
    c.normalize();
    const Vec z = triple.spatial_basis() * c;
    return triple.timelike() + z / triple.norm(z);
}

// Dense-sampling oracle for the subspace causal character: max of L over
// both orientations of a uniformly sampled subspace sphere.
inline CausalChar subspace_char_oracle(const Metric& m, const Vec& x, const Mat& basis,
                                       int samples = 10000) {
    std::mt19937_64 rng(0xabcdefULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Vec omega = m.time_covector(x);
    double best = -std::numeric_limits<double>::infinity();
    double scale = 1.0;
    const int k = static_cast<int>(basis.cols());
    for (int s = 0; s < samples; ++s) {
        Vec c(k);
        for (int i = 0; i < k; ++i) c(i) = gauss(rng);
        c.normalize();
        for (double sign : {1.0, -1.0}) {
            const Vec w = sign * (basis * c);
            if (omega.dot(w) < 0.0) continue;
            const double l = m.eval(x, w);
            if (l > best) {
                best = l;
                scale = std::max(1.0, m.quadratic_scale(x, w));
            }
        }
    }
    const double band = 1e-9 * scale;
    if (best > band) return CausalChar::Timelike;
    if (best < -band) return CausalChar::Spacelike;
    return CausalChar::Lightlike;
}

// Classical two-media scene: isotropic product metrics n1 | n2 separated by
// the spatial plane x^1 = 0, chart box [-T,T] x [-1,1]^n.
inline SceneConfig classical_scene(int dim, double n1, double n2, double box_half = 2.0) {
    SceneConfig scene;
    scene.dim = dim;
    scene.metric1 = Metric::product_isotropic(dim, ScalarField::constant(n1));
    scene.metric2 = Metric::product_isotropic(dim, ScalarField::constant(n2));
    scene.chart = Box(Vec::Constant(dim, -box_half), Vec::Constant(dim, box_half));
    scene.metric1.set_chart(scene.chart);
    scene.metric2.set_chart(scene.chart);
    scene.interface_spec = InterfaceSpec::plane(Vec::Unit(dim, 1), 0.0);
    scene.integrator.step = 1e-3 * scene.chart.diameter();
    return scene;
}

// Incident direction at angle theta from the interface normal in the
// (normal, first-tangential) spatial plane, lifted to the medium-1 cone.
inline Vec classical_incident(const SceneConfig& scene, const Vec& p, double theta,
                              double azimuth = 0.0) {
    const int n = scene.dim - 1;
    Vec spatial = Vec::Zero(n);
    spatial(0) = std::cos(theta);
    spatial(1) = std::sin(theta) * std::cos(azimuth);
    if (n >= 3) spatial(2) = std::sin(theta) * std::sin(azimuth);
    Vec u(scene.dim);
    u(0) = scene.metric1.spatial_norm()->value(p, spatial);
    u.tail(n) = spatial;
    return u;
}

// Spatial angle of a cone direction against the interface normal axis.
inline double spatial_angle_from_normal(const Vec& v) {
    const int n = static_cast<int>(v.size()) - 1;
    const Vec sv = v.tail(n);
    return std::atan2(sv.tail(n - 1).norm(), std::abs(sv(0)));
}

}  // namespace lfray::testing
