#include "lfray/interface.hpp"

#include <cmath>

namespace lfray {

InterfaceSpec InterfaceSpec::plane(Vec normal, double offset) {
    InterfaceSpec s;
    s.kind_ = Kind::Plane;
    s.normal_ = std::move(normal);
    s.offset_ = offset;
    return s;
}

InterfaceSpec InterfaceSpec::graph(int coord, ScalarField height) {
    InterfaceSpec s;
    s.kind_ = Kind::Graph;
    s.coord_ = coord;
    s.height_ = std::move(height);
    return s;
}

InterfaceSpec InterfaceSpec::cylinder(std::vector<int> axes, Vec center, double radius) {
    InterfaceSpec s;
    s.kind_ = Kind::Cylinder;
    s.axes_ = std::move(axes);
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
}

InterfaceSpec InterfaceSpec::custom(LevelFn level, GradFn gradient) {
    InterfaceSpec s;
    s.kind_ = Kind::Custom;
    s.level_fn_ = std::move(level);
    s.grad_fn_ = std::move(gradient);
    return s;
}

double InterfaceSpec::level(const Vec& x) const {
    switch (kind_) {
        case Kind::Plane:
            return normal_.dot(x) - offset_;
        case Kind::Graph:
            return x(coord_) - height_.value(x);
        case Kind::Cylinder: {
            double s = 0.0;
            for (int a : axes_) s += sqr(x(a) - center_(a));
            return s - sqr(radius_);
        }
        case Kind::Custom:
            return level_fn_(x);
    }
    return 0.0;
}

Vec InterfaceSpec::gradient(const Vec& x) const {
    switch (kind_) {
        case Kind::Plane:
            return normal_;
        case Kind::Graph: {
            Vec g = -height_.gradient(x);
            g(coord_) += 1.0;
            return g;
        }
        case Kind::Cylinder: {
            Vec g = Vec::Zero(x.size());
            for (int a : axes_) g(a) = 2.0 * (x(a) - center_(a));
            return g;
        }
        case Kind::Custom: {
            if (grad_fn_) return grad_fn_(x);
            const double h = 1e-7 * (1.0 + x.norm());
            Vec g(x.size());
            Vec p = x;
            for (int i = 0; i < x.size(); ++i) {
                p(i) = x(i) + h;
                const double fp = level_fn_(p);
                p(i) = x(i) - h;
                const double fm = level_fn_(p);
                p(i) = x(i);
                g(i) = (fp - fm) / (2.0 * h);
            }
            return g;
        }
    }
    return Vec::Zero(x.size());
}

double InterfaceSpec::local_scale(const Vec& x) const {
    const double gn = gradient(x).norm();
    if (gn < 1e-8) throw InvalidInputError("interface gradient vanishes near the zero set");
    return std::max(1.0, gn * (1.0 + x.cwiseAbs().maxCoeff()));
}

Side side(const InterfaceSpec& spec, const Vec& p, const Tolerances& tol) {
    const double f = spec.level(p);
    const double band = 1e-10 * spec.local_scale(p);
    (void)tol;
    if (std::abs(f) <= band) return Side::OnInterface;
    return f < 0.0 ? Side::Medium1 : Side::Medium2;
}

CrossingEvent locate_crossing(const InterfaceSpec& spec, const Metric& m, const Segment& seg,
                              const Tolerances& tol) {
    const auto& smp = seg.samples;
    // Segments may begin on the interface (post-event legs); arm the sign
    // scan only once the level has clearly left the on-interface band.
    const double arm_band = 1e-7 * spec.local_scale(smp.front().x);
    size_t idx = smp.size();
    bool armed = false;
    for (size_t i = 0; i + 1 < smp.size(); ++i) {
        const double fa = spec.level(smp[i].x);
        if (!armed) {
            if (std::abs(fa) > arm_band) armed = true;
            else continue;
        }
        const double fb = spec.level(smp[i + 1].x);
        if (fa == 0.0 || fa * fb < 0.0) {
            idx = i;
            break;
        }
    }
    if (idx == smp.size()) throw NoCrossingError("locate_crossing: no sign change along segment");

    const GeodesicState& a = smp[idx];
    const GeodesicState& b = smp[idx + 1];
    const double hfull = b.s - a.s;

    // Regula falsi (Illinois) on the sub-step length, re-integrating from the
    // bracketing sample so the crossing state stays on the geodesic.
    double lo = 0.0, hi = hfull;
    double flo = spec.level(a.x), fhi = spec.level(b.x);
    GeodesicState cur = b;
    double fcur = fhi;
    const double band = tol.crossing * spec.local_scale(a.x);
    for (int it = 0; it < 200 && std::abs(fcur) > band; ++it) {
        double mid = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        cur = mid > 0.0 ? rk4_step(m, a, mid) : a;
        fcur = spec.level(cur.x);
        if (flo * fcur <= 0.0) {
            hi = mid;
            fhi = fcur;
            flo *= 0.5;  // Illinois damping
        } else {
            lo = mid;
            flo = fcur;
            fhi *= 0.5;
        }
        if (hi - lo < 1e-18 * std::max(1.0, hfull)) break;
    }
    if (std::abs(fcur) > 1e3 * band)
        throw NoCrossingError("locate_crossing: refinement failed to reach the interface");

    CrossingEvent ev;
    ev.tau = cur.s;
    ev.point = cur.x;
    ev.incoming = cur.y;
    const Vec grad = spec.gradient(ev.point);
    const double tangency = std::abs(grad.dot(ev.incoming)) / (grad.norm() * ev.incoming.norm());
    if (tangency < 1e-8)
        throw GrazingContactError("locate_crossing: tangential contact with the interface");
    ev.tangent_basis = kernel_basis(grad);
    ev.transverse = grad / grad.norm();
    return ev;
}

SubspaceClass classify_interface(const InterfaceSpec& spec, const Metric& m, const Vec& p,
                                 const Tolerances& tol) {
    const double f = spec.level(p);
    if (std::abs(f) > 1e-6 * spec.local_scale(p))
        throw InvalidInputError("classify_interface: point is not on the interface");
    const Mat basis = kernel_basis(spec.gradient(p));
    return classify_subspace(m, p, basis, tol);
}

}  // namespace lfray
