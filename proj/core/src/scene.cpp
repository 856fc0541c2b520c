#include "lfray/scene.hpp"

#include <cmath>

namespace lfray {

const char* to_string(BranchPolicy p) {
    switch (p) {
        case BranchPolicy::SnellConeGeodesicOnly:
            return "snell";
        case BranchPolicy::AllBranches:
            return "all";
        case BranchPolicy::ReflectOnly:
            return "reflect";
    }
    return "?";
}

Vec ReceiverSpec::position(double t) const {
    if (kind == Kind::Submanifold) return point;
    if (path) return path(t);
    return origin + t * velocity;
}

Vec ReceiverSpec::tangent(double t) const {
    if (kind == Kind::Submanifold) return tB_gradient;
    if (path_tangent) return path_tangent(t);
    if (path) {
        const double h = 1e-6 * (1.0 + std::abs(t));
        return (path(t + h) - path(t - h)) / (2.0 * h);
    }
    return velocity;
}

std::pair<double, double> ReceiverSpec::distance(const Vec& x) const {
    if (kind == Kind::Submanifold) {
        Eigen::HouseholderQR<Mat> qr(basis);
        const Vec rel = x - point;
        const Vec c = qr.solve(rel);
        const double d = (rel - basis * c).norm();
        const double t = tB_gradient.dot(rel);
        return {d, t};
    }
    if (!path) {
        const double t =
            std::clamp((x - origin).dot(velocity) / velocity.squaredNorm(), param_min, param_max);
        return {(x - position(t)).norm(), t};
    }
    // Callback curve: coarse scan plus golden refinement.
    const int coarse = 256;
    double best_t = param_min, best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= coarse; ++i) {
        const double t = param_min + (param_max - param_min) * i / coarse;
        const double d = (x - path(t)).norm();
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    double lo = best_t - (param_max - param_min) / coarse;
    double hi = best_t + (param_max - param_min) / coarse;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
    auto at = [&](double t) { return (x - path(t)).norm(); };
    double f1 = at(c1), f2 = at(c2);
    for (int it = 0; it < 60; ++it) {
        if (f1 > f2) {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + gr * (hi - lo);
            f2 = at(c2);
        } else {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - gr * (hi - lo);
            f1 = at(c1);
        }
    }
    const double t = 0.5 * (lo + hi);
    return {at(t), t};
}

double ReceiverSpec::segment_distance(const Vec& a, const Vec& b) const {
    if (kind == Kind::Submanifold) {
        // Distance of a + s (b - a) to the affine plane, minimized on [0, 1].
        Eigen::HouseholderQR<Mat> qr(basis);
        auto perp = [&](const Vec& w) { return (w - basis * qr.solve(w)).eval(); };
        const Vec A = perp(a - point);
        const Vec B = perp(b - a);
        const double bb = B.squaredNorm();
        const double s = bb > 0.0 ? std::clamp(-A.dot(B) / bb, 0.0, 1.0) : 0.0;
        return (A + s * B).norm();
    }
    if (!path) {
        // Segment versus a clamped affine line: solve the unconstrained 2x2
        // normal equations, then re-optimize along each clamped boundary.
        const Vec d = b - a;
        const Vec& w = velocity;
        const Vec r = a - origin;
        const double dd = d.squaredNorm(), ww = w.squaredNorm(), dw = d.dot(w);
        const double det = dd * ww - dw * dw;
        auto eval_st = [&](double s, double t) { return (r + s * d - t * w).norm(); };
        auto t_of_s = [&](double s) {
            return std::clamp((r + s * d).dot(w) / ww, param_min, param_max);
        };
        auto s_of_t = [&](double t) {
            return dd > 0.0 ? std::clamp((t * w - r).dot(d) / dd, 0.0, 1.0) : 0.0;
        };
        double best = std::numeric_limits<double>::infinity();
        if (det > 1e-14 * dd * ww) {
            const double s = std::clamp((w.dot(r) * dw - d.dot(r) * ww) / det, 0.0, 1.0);
            best = std::min(best, eval_st(s, t_of_s(s)));
        }
        for (double s : {0.0, 1.0}) best = std::min(best, eval_st(s, t_of_s(s)));
        for (double t : {param_min, param_max}) best = std::min(best, eval_st(s_of_t(t), t));
        return best;
    }
    // Callback curve: sample the segment.
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 16; ++i) {
        const double s = i / 16.0;
        best = std::min(best, distance(a + s * (b - a)).first);
    }
    return best;
}

Mat ReceiverSpec::temporal_kernel_basis() const {
    if (kind != Kind::Submanifold)
        throw InvalidInputError("temporal_kernel_basis: receiver is not a submanifold");
    const Vec restricted = basis.transpose() * tB_gradient;
    if (restricted.norm() < 1e-12)
        throw InvalidInputError("temporal_kernel_basis: temporal function degenerate on receiver");
    if (basis.cols() == 1) return Mat(basis.rows(), 0);
    return basis * kernel_basis(restricted);
}

}  // namespace lfray
