#include "lfray/causal.hpp"

#include <cmath>
#include <random>

namespace lfray {

const char* to_string(CausalChar c) {
    switch (c) {
        case CausalChar::Timelike:
            return "timelike";
        case CausalChar::Lightlike:
            return "lightlike";
        case CausalChar::Spacelike:
            return "spacelike";
    }
    return "?";
}

VectorClass classify_vector(const Metric& m, const Vec& x, const Vec& v, const Tolerances& tol) {
    if (v.norm() == 0.0) throw InvalidInputError("classify_vector: zero vector");
    const Vec omega = m.time_covector(x);

    auto future_causal = [&](const Vec& w, VectorClass& out) {
        if (omega.dot(w) <= 0.0) return false;
        const double l = m.eval(x, w);
        const double scale = std::max(1.0, m.quadratic_scale(x, w));
        const double band = tol.lightlike * scale;
        if (l < -band) return false;
        out.character = l > band ? CausalChar::Timelike : CausalChar::Lightlike;
        out.value = l;
        out.scale = scale;
        return true;
    };

    VectorClass out;
    if (future_causal(v, out)) {
        out.future = true;
        return out;
    }
    if (future_causal(-v, out)) {
        out.future = false;
        return out;
    }
    out.character = CausalChar::Spacelike;
    out.future = false;
    out.value = m.eval(x, v);
    out.scale = std::max(1.0, m.quadratic_scale(x, v));
    return out;
}

namespace {

// Max of L over both orientations of w, restricted to the future side of the
// time covector where one exists. The cone is one-sided for irreversible
// families, so only the future representative carries causal meaning.
double oriented_max(const Metric& m, const Vec& x, const Vec& omega, const Vec& w, Vec* arg) {
    const double ow = omega.dot(w);
    double best = -std::numeric_limits<double>::infinity();
    if (ow >= 0.0) {
        best = m.eval(x, w);
        if (arg) *arg = w;
    }
    if (-ow >= 0.0) {
        const double l = m.eval(x, -w);
        if (l > best) {
            best = l;
            if (arg) *arg = -w;
        }
    }
    return best;
}

}  // namespace

SubspaceClass classify_subspace(const Metric& m, const Vec& x, const Mat& basis,
                                const Tolerances& tol) {
    const int k = static_cast<int>(basis.cols());
    if (k < 1 || k > m.dim() - 1) throw InvalidInputError("classify_subspace: bad subspace rank");
    Eigen::ColPivHouseholderQR<Mat> qr(basis);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) throw InvalidInputError("classify_subspace: rank-deficient basis");
    const Mat b = Eigen::HouseholderQR<Mat>(basis).householderQ() * Mat::Identity(m.dim(), k);

    SubspaceClass out;
    if (m.family() == Metric::Family::Quadratic) {
        const Mat g = m.fundamental_tensor(x, m.time_reference());
        const Mat r = b.transpose() * g * b;
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (r + r.transpose()));
        int imax = 0;
        es.eigenvalues().maxCoeff(&imax);
        out.extremal = es.eigenvalues()(imax);
        out.maximizer = b * es.eigenvectors().col(imax);
    } else {
        const Vec omega = m.time_covector(x);
        Vec best_arg;
        double best = -std::numeric_limits<double>::infinity();

        auto consider = [&](const Vec& c) {
            Vec arg;
            const double val = oriented_max(m, x, omega, (b * c).eval(), &arg);
            if (val > best) {
                best = val;
                best_arg = arg;
            }
        };

        if (k == 1) {
            consider(Vec::Ones(1));
        } else if (k == 2) {
            const int coarse = 256;
            double best_theta = 0.0;
            for (int i = 0; i < coarse; ++i) {
                const double th = M_PI * i / coarse;
                Vec c(2);
                c << std::cos(th), std::sin(th);
                Vec arg;
                const double val = oriented_max(m, x, omega, (b * c).eval(), &arg);
                if (val > best) {
                    best = val;
                    best_arg = arg;
                    best_theta = th;
                }
            }
            // Golden-section refinement of the best angular bracket.
            double lo = best_theta - M_PI / coarse, hi = best_theta + M_PI / coarse;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
            auto at = [&](double th) {
                Vec c(2);
                c << std::cos(th), std::sin(th);
                return oriented_max(m, x, omega, (b * c).eval(), nullptr);
            };
            double f1 = at(c1), f2 = at(c2);
            for (int it = 0; it < 80; ++it) {
                if (f1 < f2) {
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
            Vec c(2);
            c << std::cos(0.5 * (lo + hi)), std::sin(0.5 * (lo + hi));
            consider(c);
        } else {
            std::mt19937_64 rng(0x5eedULL);
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (int restart = 0; restart < 32; ++restart) {
                Vec c(k);
                for (int i = 0; i < k; ++i) c(i) = gauss(rng);
                c.normalize();
                double step = 0.3;
                Vec arg;
                double val = oriented_max(m, x, omega, (b * c).eval(), &arg);
                for (int it = 0; it < 200 && step > 1e-12; ++it) {
                    const double sgn = (arg.dot(b * c) >= 0.0) ? 1.0 : -1.0;
                    Vec grad_full = m.grad(x, (sgn * b * c).eval());
                    Vec gc = sgn * (b.transpose() * grad_full);
                    gc -= gc.dot(c) * c;
                    if (gc.norm() < 1e-14) break;
                    Vec cn = (c + step * gc.normalized()).normalized();
                    Vec argn;
                    const double valn = oriented_max(m, x, omega, (b * cn).eval(), &argn);
                    if (valn > val) {
                        c = cn;
                        val = valn;
                        arg = argn;
                    } else {
                        step *= 0.5;
                    }
                }
                if (val > best) {
                    best = val;
                    best_arg = arg;
                }
            }
        }
        out.extremal = best;
        out.maximizer = best_arg;
    }

    out.scale = std::max(1.0, m.quadratic_scale(x, out.maximizer));
    const double band = tol.classification * out.scale;
    if (out.extremal > band)
        out.character = CausalChar::Timelike;
    else if (out.extremal < -band)
        out.character = CausalChar::Spacelike;
    else
        out.character = CausalChar::Lightlike;
    out.borderline = out.character == CausalChar::Lightlike;
    return out;
}

Mat orthogonal_hyperplane(const Metric& m, const Vec& x, const Vec& v, const Tolerances& tol) {
    const double l = m.eval(x, v);
    const double scale = std::max(1.0, m.quadratic_scale(x, v));
    if (std::abs(l) > 1e-6 * scale)
        throw InvalidInputError("orthogonal_hyperplane: vector is not lightlike");
    (void)tol;
    const Vec w = m.grad(x, v);
    if (w.norm() < 1e-12 * (1.0 + scale) / (1.0 + v.norm()))
        throw DegenerateTensorError("orthogonal_hyperplane: dL vanishes");
    return kernel_basis(w);
}

Vec lift_to_cone(const ConeTriple& triple, const Vec& spatial) {
    if (spatial.norm() == 0.0) throw InvalidInputError("lift_to_cone: zero spatial vector");
    const double off = triple.omega().dot(spatial);
    if (std::abs(off) > 1e-6 * triple.omega().norm() * spatial.norm())
        throw InvalidInputError("lift_to_cone: spatial vector not in Ker(omega)");
    // Remove any residual omega-component before lifting.
    const Vec z = spatial - off * triple.timelike();
    return triple.lift(z);
}

std::vector<Vec> indicatrix_sample(const Metric& m, const Vec& x, int count) {
    if (count < 4) throw InvalidInputError("indicatrix_sample: count must be >= 4");
    const ConeTriple triple = m.cone_triple_at(x);
    const int nsp = m.dim() - 1;
    const Mat& basis = triple.spatial_basis();

    std::vector<Vec> dirs;
    dirs.reserve(count);
    auto push = [&](const Vec& c) {
        const Vec z = basis * c;
        const double f = triple.norm(z);
        dirs.push_back(triple.timelike() + z / f);
    };

    if (nsp == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = 2.0 * M_PI * i / count;
            Vec c(2);
            c << std::cos(th), std::sin(th);
            push(c);
        }
    } else if (nsp == 3) {
        // Fibonacci spiral over S^2.
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double th = golden * i;
            Vec c(3);
            c << r * std::cos(th), r * std::sin(th), z;
            push(c);
        }
    } else {
        std::mt19937_64 rng(0x1f2e3d4cULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < count; ++i) {
            Vec c(nsp);
            for (int j = 0; j < nsp; ++j) c(j) = gauss(rng);
            c.normalize();
            push(c);
        }
    }
    return dirs;
}

double finsler_angle(const SpatialNorm& f, const Vec& x, const Vec& base, const Vec& u,
                     const Vec& w) {
    if (base.norm() == 0.0 || u.norm() == 0.0 || w.norm() == 0.0)
        throw InvalidInputError("finsler_angle: zero vector");
    const Mat g = f.fundamental(x, base);
    const double c = u.dot(g * w) / (f.value(x, u) * f.value(x, w));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace lfray
