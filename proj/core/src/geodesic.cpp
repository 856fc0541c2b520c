#include "lfray/geodesic.hpp"

#include <cmath>

namespace lfray {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::InterfaceHit:
            return "interface_hit";
        case StopReason::BoundsExit:
            return "bounds_exit";
        case StopReason::MaxSteps:
            return "max_steps";
        case StopReason::ReceiverHit:
            return "receiver_hit";
    }
    return "?";
}

std::vector<Mat> formal_christoffel(const Metric& m, const Vec& x, const Vec& y) {
    const int d = m.dim();
    std::vector<Mat> gamma(d, Mat::Zero(d, d));
    if (m.constant_coefficients()) return gamma;

    const Mat g = m.fundamental_tensor(x, y);
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible()) throw DegenerateTensorError("christoffel: singular fundamental tensor");
    const Mat ginv = lu.inverse();

    std::vector<Mat> dg(d);
    for (int i = 0; i < d; ++i) dg[i] = m.dg_dx(x, y, i);

    for (int k = 0; k < d; ++k) {
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double s = 0.0;
                for (int r = 0; r < d; ++r)
                    s += ginv(k, r) * (dg[i](r, j) + dg[j](r, i) - dg[r](i, j));
                gamma[k](i, j) = gamma[k](j, i) = 0.5 * s;
            }
        }
    }
    return gamma;
}

Vec geodesic_accel(const Metric& m, const Vec& x, const Vec& y) {
    const int d = m.dim();
    if (m.constant_coefficients()) return Vec::Zero(d);
    const auto gamma = formal_christoffel(m, x, y);
    Vec a(d);
    for (int k = 0; k < d; ++k) a(k) = -y.dot(gamma[k] * y);
    return a;
}

Vec project_to_cone(const Metric& m, const Vec& x, const Vec& y, const Tolerances& tol) {
    if (m.family() == Metric::Family::Product) {
        const int n = m.dim() - 1;
        const Vec sv = y.tail(n);
        if (sv.norm() == 0.0) throw ProjectionError("project_to_cone: zero spatial part");
        Vec out = y;
        out(0) = m.spatial_norm()->value(x, sv);
        return out;
    }
    if (m.family() == Metric::Family::Quadratic) {
        const Vec t = m.time_reference();
        const Mat g = m.fundamental_tensor(x, y);
        const double a = t.dot(g * t);
        const double b = 2.0 * t.dot(g * y);
        const double c = y.dot(g * y);
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) throw ProjectionError("project_to_cone: no cone point along time direction");
        const double root = std::sqrt(disc);
        const double s1 = (-b + root) / (2.0 * a);
        const double s2 = (-b - root) / (2.0 * a);
        const double s = std::abs(s1) <= std::abs(s2) ? s1 : s2;
        return y + s * t;
    }
    // CustomL: damped Newton along the cone triple's timelike direction.
    const ConeTriple triple = m.cone_triple_at(x);
    const Vec t = triple.timelike();
    double s = 0.0;
    const double scale = std::max(1.0, m.quadratic_scale(x, y));
    for (int it = 0; it < 60; ++it) {
        const Vec v = y + s * t;
        const double l = m.eval(x, v);
        if (std::abs(l) <= tol.projection * scale) return v;
        const double dl = m.grad(x, v).dot(t);
        if (std::abs(dl) < 1e-16) break;
        s -= l / dl;
    }
    throw ProjectionError("project_to_cone: Newton failed to restore the cone constraint");
}

namespace {

struct Deriv {
    Vec dx;
    Vec dy;
};

Deriv rhs(const Metric& m, const Vec& x, const Vec& y) { return {y, geodesic_accel(m, x, y)}; }

}  // namespace

GeodesicState rk4_step(const Metric& m, const GeodesicState& state, double h, bool project) {
    const Deriv k1 = rhs(m, state.x, state.y);
    const Deriv k2 = rhs(m, state.x + 0.5 * h * k1.dx, state.y + 0.5 * h * k1.dy);
    const Deriv k3 = rhs(m, state.x + 0.5 * h * k2.dx, state.y + 0.5 * h * k2.dy);
    const Deriv k4 = rhs(m, state.x + h * k3.dx, state.y + h * k3.dy);
    GeodesicState next;
    next.x = state.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    next.y = state.y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    next.s = state.s + h;
    if (project) next.y = project_to_cone(m, next.x, next.y);
    return next;
}

Segment integrate_geodesic(const Metric& m, const GeodesicState& start, const StopPredicate& stop,
                           const IntegrateOptions& opts, int medium_label) {
    Segment seg;
    seg.medium = medium_label;

    GeodesicState state = start;
    state.y = project_to_cone(m, state.x, state.y);
    const Vec omega0 = m.time_covector(state.x);
    const double oy = omega0.dot(state.y);
    if (oy <= 0.0) throw InvalidInputError("integrate_geodesic: velocity is not future-directed");
    if (opts.normalize) {
        if (m.family() == Metric::Family::Product)
            state.y /= oy;
        else
            state.y /= state.y.norm();
    }
    seg.samples.push_back(state);

    const double h = opts.step;
    for (int n = 0; n < opts.max_steps; ++n) {
        GeodesicState next;
        try {
            next = rk4_step(m, state, h, opts.project);
        } catch (const DomainError&) {
            // The step left the chart before the bounds predicate could fire.
            seg.stop_reason = StopReason::BoundsExit;
            return seg;
        } catch (const ProjectionError& e) {
            throw ConeExitError(std::string("integrate_geodesic: ") + e.what());
        }

        seg.samples.push_back(next);
        if (stop) {
            if (auto reason = stop(state, next)) {
                seg.stop_reason = *reason;
                return seg;
            }
        }
        state = next;
    }
    seg.stop_reason = StopReason::MaxSteps;
    return seg;
}

double pregeodesic_residual(const Metric& m, const Segment& seg) {
    const auto& smp = seg.samples;
    if (smp.size() < 3) throw InvalidInputError("pregeodesic_residual: need at least 3 samples");
    double worst = 0.0;
    for (size_t i = 1; i + 1 < smp.size(); ++i) {
        const double h1 = smp[i].s - smp[i - 1].s;
        const double h2 = smp[i + 1].s - smp[i].s;
        // Second-order derivative estimate on a non-uniform grid.
        const Vec ydot = (h1 / h2 * (smp[i + 1].y - smp[i].y) + h2 / h1 * (smp[i].y - smp[i - 1].y)) /
                         (h1 + h2);
        const auto gamma = formal_christoffel(m, smp[i].x, smp[i].y);
        Vec cov = ydot;
        for (int k = 0; k < m.dim(); ++k) cov(k) += smp[i].y.dot(gamma[k] * smp[i].y);
        const Vec yhat = smp[i].y.normalized();
        const Vec orth = cov - cov.dot(yhat) * yhat;
        worst = std::max(worst, orth.norm() / std::max(1.0, smp[i].y.squaredNorm()));
    }
    return worst;
}

}  // namespace lfray
