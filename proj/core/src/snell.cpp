#include "lfray/snell.hpp"

#include <cmath>
#include <sstream>

namespace lfray {

const char* to_string(RefractionCase c) {
    switch (c) {
        case RefractionCase::A_i:
            return "A_i";
        case RefractionCase::A_ii:
            return "A_ii";
        case RefractionCase::A_iii_NoCriticalPoints:
            return "A_iii_NoCriticalPoints";
        case RefractionCase::B_i:
            return "B_i";
        case RefractionCase::B_ii_Exceptional:
            return "B_ii_Exceptional";
        case RefractionCase::C_Two:
            return "C_Two";
        case RefractionCase::NoCrossing:
            return "NoCrossing";
        case RefractionCase::ExceptionalOnly:
            return "ExceptionalOnly";
        case RefractionCase::NotPossible:
            return "NotPossible";
    }
    return "?";
}

const char* to_string(ReflectionCase c) {
    switch (c) {
        case ReflectionCase::Astar_i:
            return "Astar_i";
        case ReflectionCase::Astar_ii_Unbroken:
            return "Astar_ii_Unbroken";
        case ReflectionCase::Bstar_Exceptional:
            return "Bstar_Exceptional";
        case ReflectionCase::NoReturning:
            return "NoReturning";
    }
    return "?";
}

std::string SnellOutcome::case_label() const {
    return is_reflection ? to_string(reflection_case) : to_string(refraction_case);
}

int SnellOutcome::expected_count() const {
    if (is_reflection) {
        switch (reflection_case) {
            case ReflectionCase::Astar_i:
            case ReflectionCase::Astar_ii_Unbroken:
                return 1;
            default:
                return 0;
        }
    }
    switch (refraction_case) {
        case RefractionCase::A_i:
        case RefractionCase::A_ii:
        case RefractionCase::B_i:
            return 1;
        case RefractionCase::C_Two:
            return 2;
        default:
            return 0;
    }
}

namespace {

// Sampled membership test: does the cone meet the requested side of the
// interface tangent space?
bool cone_meets_side(const Metric& m, const Vec& p, const Vec& grad, double sign, int density) {
    const auto samples = indicatrix_sample(m, p, density);
    const double gn = grad.norm();
    for (const auto& v : samples) {
        if (sign * grad.dot(v) > 1e-6 * gn * v.norm()) return true;
    }
    return false;
}

Vec restricted_covector(const Metric& m, const Vec& p, const Vec& v, const Mat& basis) {
    return basis.transpose() * m.grad(p, v);
}

struct KernelSolveProblem {
    const Metric* target;
    Vec p;
    Mat pi_basis;  // the solution's dL must annihilate these columns
    Vec omega;     // normalization covector, unit Euclidean norm
    // Lightlike-trace rows have tangent solutions, which are double roots of
    // the lightlikeness constraint. There the tangency row grad_f . v = 0
    // replaces L(v) = 0 (re-checked afterwards) to keep Newton quadratic.
    bool tangent_variant = false;
    Vec grad_f;
};

struct Candidate {
    Vec v;
    double residual;
};

// Damped Newton on {dL(v)(pi_j) = 0, L(v) = 0, omega . v = 1}.
std::optional<Candidate> newton_solve(const KernelSolveProblem& prob, const Vec& seed,
                                      const Tolerances& tol) {
    const Metric& m = *prob.target;
    const int d = m.dim();
    const int npi = static_cast<int>(prob.pi_basis.cols());

    Vec v = seed;
    const double ov = prob.omega.dot(v);
    if (!(ov > 0.0)) return std::nullopt;
    v /= ov;

    auto scaled_residual = [&](const Vec& f, double scale) {
        double r = std::abs(f(npi)) / (1.0 + scale);  // L or tangency row
        for (int j = 0; j < npi; ++j) r = std::max(r, std::abs(f(j)) / (1.0 + scale));
        r = std::max(r, std::abs(f(npi + 1)));
        return r;
    };

    auto eval_f = [&](const Vec& w) {
        Vec f(npi + 2);
        const Vec g = m.grad(prob.p, w);
        for (int j = 0; j < npi; ++j) f(j) = prob.pi_basis.col(j).dot(g);
        f(npi) = prob.tangent_variant ? prob.grad_f.dot(w) : m.eval(prob.p, w);
        f(npi + 1) = prob.omega.dot(w) - 1.0;
        return f;
    };

    Vec f = eval_f(v);
    double scale = std::max(1.0, m.quadratic_scale(prob.p, v));
    double res = scaled_residual(f, scale);

    for (int it = 0; it < 50 && res > tol.newton_residual; ++it) {
        Mat jac(npi + 2, d);
        const Mat g2 = m.fundamental_tensor(prob.p, v);
        for (int j = 0; j < npi; ++j) jac.row(j) = 2.0 * (g2 * prob.pi_basis.col(j)).transpose();
        if (prob.tangent_variant)
            jac.row(npi) = prob.grad_f.transpose();
        else
            jac.row(npi) = m.grad(prob.p, v).transpose();
        jac.row(npi + 1) = prob.omega.transpose();

        if (jac.rows() != d) return std::nullopt;
        Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) return std::nullopt;
        const Vec step = lu.solve(-f);

        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 10; ++bt) {
            Vec vn = v + alpha * step;
            Vec fn;
            try {
                fn = eval_f(vn);
            } catch (const Error&) {
                alpha *= 0.5;
                continue;
            }
            const double sn = std::max(1.0, m.quadratic_scale(prob.p, vn));
            const double rn = scaled_residual(fn, sn);
            if (rn < res) {
                v = vn;
                f = fn;
                scale = sn;
                res = rn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    if (res > tol.newton_residual) return std::nullopt;
    return Candidate{v, res};
}

// Closed-form candidates for a constant quadratic approximation of the
// target metric: the matched covector lies in the two-dimensional annihilator
// of the trace subspace, spanned by the incident covector and the interface
// conormal.
std::vector<Vec> quadratic_seeds(const Metric& target, const Vec& p, const Vec& rho_full,
                                 const Vec& conormal, const Vec& omega) {
    std::vector<Vec> seeds;
    Mat g;
    try {
        const ConeTriple triple = target.cone_triple_at(p);
        g = target.fundamental_tensor(p, triple.timelike());
    } catch (const Error&) {
        return seeds;
    }
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible()) return seeds;
    const Vec gr = lu.solve(rho_full);
    const Vec gp = lu.solve(conormal);
    const double a = rho_full.dot(gr);
    const double b = 2.0 * rho_full.dot(gp);
    const double c = conormal.dot(gp);

    auto add = [&](double alpha, double beta) {
        Vec v = alpha * gr + beta * gp;
        const double ov = omega.dot(v);
        if (std::abs(ov) < 1e-14 * v.norm()) return;
        v /= ov;
        seeds.push_back(v);
    };

    if (std::abs(a) < 1e-14 * (std::abs(b) + std::abs(c) + 1.0)) {
        add(1.0, 0.0);
        if (std::abs(b) > 0.0) add(-c / b, 1.0);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double root = std::sqrt(disc);
            add((-b + root) / (2.0 * a), 1.0);
            add((-b - root) / (2.0 * a), 1.0);
        }
    }
    return seeds;
}

struct SolveConfig {
    const Metric* incident_metric;
    const Metric* target;
    double side_sign;  // +1 refraction (far side), -1 reflection (near side)
    bool tangent_expected = false;
};

// Shared machinery of solve_refraction / solve_reflection: Newton multistart,
// dedup, side filter, flags.
std::vector<SnellDirection> kernel_match_directions(const SolveConfig& cfg,
                                                    const IncidentData& inc,
                                                    const Tolerances& tol) {
    const Metric& target = *cfg.target;
    const Vec& p = inc.p;

    KernelSolveProblem prob;
    prob.target = &target;
    prob.p = p;
    prob.pi_basis = inc.pi_basis;
    prob.omega = target.time_covector(p).normalized();
    prob.tangent_variant = cfg.tangent_expected;
    prob.grad_f = inc.grad_f;

    std::vector<Vec> seeds = quadratic_seeds(target, p, cfg.incident_metric->grad(p, inc.u),
                                             inc.grad_f, prob.omega);
    try {
        auto samples = indicatrix_sample(target, p, 16);
        seeds.insert(seeds.end(), samples.begin(), samples.end());
    } catch (const Error&) {
    }

    std::vector<Candidate> found;
    for (const auto& seed : seeds) {
        auto cand = newton_solve(prob, seed, tol);
        if (!cand) continue;
        bool dup = false;
        for (const auto& other : found) {
            if (euclidean_angle(cand->v, other.v) <= tol.dedupe_angle) {
                dup = true;
                break;
            }
        }
        if (!dup) found.push_back(*cand);
    }

    const Vec rho1 = restricted_covector(*cfg.incident_metric, p, inc.u, inc.eta_basis);
    const double gn = inc.grad_f.norm();

    std::vector<SnellDirection> out;
    for (const auto& cand : found) {
        // The tangent variant drops the lightlikeness row; enforce it here.
        if (prob.tangent_variant) {
            const double scale = std::max(1.0, target.quadratic_scale(p, cand.v));
            if (std::abs(target.eval(p, cand.v)) > 1e-8 * scale) continue;
        }
        const Vec gt = target.grad(p, cand.v);
        const Vec rho_t = inc.eta_basis.transpose() * gt;
        // A vanishing restricted covector marks the cone-interface tangency
        // direction, never a proper solution; the exceptional path reports it.
        if (rho_t.norm() <= 1e-8 * gt.norm()) continue;

        const double sideval = inc.grad_f.dot(cand.v);
        if (cfg.side_sign * sideval < -tol.side * gn * cand.v.norm()) continue;

        SnellDirection dir;
        dir.dir = cand.v;
        dir.tangent_to_eta = std::abs(sideval) <= 1e-7 * gn * cand.v.norm();
        dir.lambda = gt.dot(inc.pi_completing);  // dL1(u)(z_c) = 1 by construction
        const double lam_ls = rho1.dot(rho_t) / rho1.squaredNorm();
        dir.residual = (rho_t - lam_ls * rho1).norm() / std::max(rho_t.norm(), 1e-300);
        out.push_back(std::move(dir));
    }
    return out;
}

// Direction along which the target cone is tangent to the interface tangent
// space (dL vanishing on all of it), if one exists.
std::optional<Vec> cone_tangency_direction(const Metric& target, const IncidentData& inc,
                                           const Tolerances& tol) {
    KernelSolveProblem prob;
    prob.target = &target;
    prob.p = inc.p;
    prob.pi_basis = inc.eta_basis.leftCols(inc.eta_basis.cols() - 1);
    prob.omega = target.time_covector(inc.p).normalized();

    std::vector<Vec> seeds;
    try {
        seeds = indicatrix_sample(target, inc.p, 32);
    } catch (const Error&) {
        return std::nullopt;
    }
    for (const auto& seed : seeds) {
        auto cand = newton_solve(prob, seed, tol);
        if (!cand) continue;
        const Vec gt = target.grad(inc.p, cand->v);
        const Vec rho = inc.eta_basis.transpose() * gt;
        if (rho.norm() <= 1e-7 * gt.norm()) return cand->v;
    }
    return std::nullopt;
}

}  // namespace

RefractionCase classify_refraction_case(const IncidentData& inc) {
    const CausalChar etac = inc.eta_char_2.character;
    const CausalChar pic = inc.pi_char_2.character;
    if (etac == CausalChar::Timelike) {
        return pic == CausalChar::Spacelike    ? RefractionCase::A_i
               : pic == CausalChar::Lightlike ? RefractionCase::A_ii
                                              : RefractionCase::A_iii_NoCriticalPoints;
    }
    if (etac == CausalChar::Lightlike) {
        if (pic == CausalChar::Spacelike)
            return inc.cone2_crosses ? RefractionCase::B_i : RefractionCase::ExceptionalOnly;
        if (pic == CausalChar::Lightlike) return RefractionCase::B_ii_Exceptional;
        return RefractionCase::NotPossible;
    }
    if (pic != CausalChar::Spacelike) return RefractionCase::NotPossible;
    return inc.cone2_crosses ? RefractionCase::C_Two : RefractionCase::NoCrossing;
}

ReflectionCase classify_reflection_case(const IncidentData& inc) {
    const CausalChar etac = inc.eta_char_1.character;
    const CausalChar pic = inc.pi_char_1.character;
    if (pic == CausalChar::Timelike)
        throw InternalConsistencyError(
            "classify_reflection_case: trace subspace cannot be timelike for the incident cone");
    if (etac == CausalChar::Timelike)
        return pic == CausalChar::Spacelike ? ReflectionCase::Astar_i
                                            : ReflectionCase::Astar_ii_Unbroken;
    if (etac == CausalChar::Lightlike) return ReflectionCase::Bstar_Exceptional;
    return ReflectionCase::NoReturning;
}

IncidentData incident_data(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                           const Vec& p, const Vec& u, const Tolerances& tol) {
    IncidentData inc;
    inc.p = p;

    const double l1 = m1.eval(p, u);
    const double scale = std::max(1.0, m1.quadratic_scale(p, u));
    if (std::abs(l1) > 1e-6 * scale)
        throw InvalidInputError("incident_data: u is not lightlike for medium 1");
    inc.u = project_to_cone(m1, p, u, tol);
    if (m1.time_covector(p).dot(inc.u) <= 0.0)
        throw InvalidInputError("incident_data: u is not future-directed");

    inc.grad_f = eta.gradient(p);
    const double gn = inc.grad_f.norm();
    inc.eta_basis = kernel_basis(inc.grad_f);
    inc.transverse = inc.grad_f / gn;

    const double uside = inc.grad_f.dot(inc.u);
    inc.u_tangent = std::abs(uside) <= 1e-7 * gn * inc.u.norm();
    if (uside < -1e-7 * gn * inc.u.norm())
        throw InvalidInputError("incident_data: u does not point toward medium 2");

    const Vec rho1 = restricted_covector(m1, p, inc.u, inc.eta_basis);
    const double g1n = m1.grad(p, inc.u).norm();
    if (rho1.norm() <= 1e-10 * g1n)
        throw NonTransverseError(
            "incident_data: orthogonal hyperplane of u equals the interface tangent space");
    inc.transversal_ok = true;

    const Mat pi_coords = kernel_basis(rho1);
    inc.pi_basis = inc.eta_basis * pi_coords;
    inc.pi_completing = inc.eta_basis * (rho1 / rho1.squaredNorm());

    inc.eta_char_1 = classify_subspace(m1, p, inc.eta_basis, tol);
    inc.eta_char_2 = classify_subspace(m2, p, inc.eta_basis, tol);
    inc.pi_char_1 = classify_subspace(m1, p, inc.pi_basis, tol);
    inc.pi_char_2 = classify_subspace(m2, p, inc.pi_basis, tol);

    const int density = 2048;
    inc.cone2_crosses = cone_meets_side(m2, p, inc.grad_f, +1.0, density);
    inc.cone1_returns = cone_meets_side(m1, p, inc.grad_f, -1.0, density);
    return inc;
}

SnellOutcome solve_refraction(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                              const IncidentData& inc, const Tolerances& tol) {
    if (!inc.transversal_ok) throw NonTransverseError("solve_refraction: non-transverse incident");

    SnellOutcome out;
    out.is_reflection = false;
    out.borderline = inc.eta_char_2.borderline || inc.pi_char_2.borderline;
    out.refraction_case = classify_refraction_case(inc);

    if (out.refraction_case == RefractionCase::NotPossible)
        throw InternalConsistencyError(
            "solve_refraction: incompatible causal characters of interface and trace subspace");

    SolveConfig cfg{&m1, &m2, +1.0, inc.pi_char_2.character == CausalChar::Lightlike};
    std::vector<SnellDirection> dirs;
    if (out.expected_count() > 0) dirs = kernel_match_directions(cfg, inc, tol);

    if (static_cast<int>(dirs.size()) != out.expected_count()) {
        if (dirs.empty() && out.expected_count() > 0)
            throw SolverError("solve_refraction: no solution found from any seed for case " +
                              out.case_label());
        std::ostringstream os;
        os << "solve_refraction: found " << dirs.size() << " directions, case " << out.case_label()
           << " requires " << out.expected_count();
        throw InternalConsistencyError(os.str());
    }
    if (out.refraction_case == RefractionCase::A_i || out.refraction_case == RefractionCase::B_i ||
        out.refraction_case == RefractionCase::C_Two) {
        for (const auto& d : dirs)
            if (d.tangent_to_eta)
                throw InternalConsistencyError("solve_refraction: unexpected tangent solution in " +
                                               out.case_label());
    }
    if (out.refraction_case == RefractionCase::A_ii && !dirs.front().tangent_to_eta)
        throw InternalConsistencyError("solve_refraction: case A_ii solution is not tangent");

    for (auto& d : dirs)
        d.straight_oriented = orientation_is_straight(m1, m2, eta, inc.p, inc.u, d.dir, 2, tol);

    // Tangency directions of the target cone for the lightlike-interface rows.
    if (out.refraction_case == RefractionCase::B_ii_Exceptional ||
        out.refraction_case == RefractionCase::ExceptionalOnly) {
        auto vhat = cone_tangency_direction(m2, inc, tol);
        if (vhat) {
            SnellDirection d;
            d.dir = *vhat;
            d.tangent_to_eta = true;
            d.exceptional = true;
            d.lambda = 0.0;
            d.residual = snell_residual(m1, m2, eta, inc.p, inc.u, *vhat, 2);
            dirs.push_back(std::move(d));
        }
    }

    out.directions = std::move(dirs);
    return out;
}

SnellOutcome solve_reflection(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                              const IncidentData& inc, const Tolerances& tol) {
    if (!inc.transversal_ok) throw NonTransverseError("solve_reflection: non-transverse incident");

    SnellOutcome out;
    out.is_reflection = true;
    out.borderline = inc.eta_char_1.borderline || inc.pi_char_1.borderline;
    out.reflection_case = classify_reflection_case(inc);

    SolveConfig cfg{&m1, &m1, -1.0, inc.pi_char_1.character == CausalChar::Lightlike};
    std::vector<SnellDirection> dirs;
    if (out.expected_count() > 0) dirs = kernel_match_directions(cfg, inc, tol);

    if (static_cast<int>(dirs.size()) != out.expected_count()) {
        if (dirs.empty() && out.expected_count() > 0)
            throw SolverError("solve_reflection: no solution found from any seed for case " +
                              out.case_label());
        std::ostringstream os;
        os << "solve_reflection: found " << dirs.size() << " directions, case " << out.case_label()
           << " requires " << out.expected_count();
        throw InternalConsistencyError(os.str());
    }
    if (out.reflection_case == ReflectionCase::Astar_ii_Unbroken && !dirs.empty()) {
        Vec u_norm = inc.u / m1.time_covector(inc.p).normalized().dot(inc.u);
        if (euclidean_angle(dirs.front().dir, u_norm) > 1e-5)
            throw InternalConsistencyError(
                "solve_reflection: tangent reflection does not coincide with the incident "
                "direction");
    }

    for (auto& d : dirs)
        d.straight_oriented = orientation_is_straight(m1, m2, eta, inc.p, inc.u, d.dir, 1, tol);

    if (out.reflection_case == ReflectionCase::Bstar_Exceptional && !inc.cone1_returns) {
        auto what = cone_tangency_direction(m1, inc, tol);
        if (what) {
            SnellDirection d;
            d.dir = *what;
            d.tangent_to_eta = true;
            d.exceptional = true;
            d.residual = snell_residual(m1, m2, eta, inc.p, inc.u, *what, 1);
            dirs.push_back(std::move(d));
        }
    }

    out.directions = std::move(dirs);
    return out;
}

bool orientation_is_straight(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                             const Vec& p, const Vec& u, const Vec& r, int medium,
                             const Tolerances& tol) {
    (void)tol;
    const Metric& target = medium == 2 ? m2 : m1;
    const Vec grad = eta.gradient(p);
    const Vec nu = grad / grad.norm();
    const Mat eta_basis = kernel_basis(grad);

    const Vec du = m1.grad(p, u);
    const Vec dr = target.grad(p, r);
    const Vec rho1 = eta_basis.transpose() * du;
    const Vec rho_r = eta_basis.transpose() * dr;
    if (rho1.norm() <= 1e-10 * du.norm() || rho_r.norm() <= 1e-10 * dr.norm())
        throw NonTransverseError("orientation: an orthogonal hyperplane equals the tangent space");

    // Quotient by the shared trace subspace: coordinates (a, b) = (psi, phi)
    // where phi has kernel the interface tangent space with phi(nu) = 1 and
    // psi has kernel (trace + span nu) with psi(z_c) = 1.
    const int n = static_cast<int>(p.size()) - 1;
    const Mat pi = eta_basis * kernel_basis(rho1);
    const Vec z_c = eta_basis * (rho1 / rho1.squaredNorm());
    Mat b(p.size(), p.size());
    b.leftCols(n - 1) = pi;
    b.col(n - 1) = z_c;
    b.col(n) = nu;
    Eigen::FullPivLU<Mat> lu(b);
    if (!lu.isInvertible()) throw InternalConsistencyError("orientation: degenerate quotient frame");
    const Mat binv = lu.inverse();
    const Vec psi = binv.row(n - 1);
    const Vec phi = binv.row(n);

    auto quotient_ray = [&](const Vec& dl, double half_sign) {
        // Any kernel vector of dl with a nonzero phi-component spans the
        // quotient image of the orthogonal hyperplane; half_sign selects the
        // half on the requested side of the interface.
        const Mat ker = kernel_basis(dl);
        int best = 0;
        double best_phi = 0.0;
        for (int j = 0; j < ker.cols(); ++j) {
            const double ph = phi.dot(ker.col(j));
            if (std::abs(ph) > std::abs(best_phi)) {
                best_phi = ph;
                best = j;
            }
        }
        Vec xi = ker.col(best);
        if (half_sign * best_phi < 0.0) xi = -xi;
        return Eigen::Vector2d(psi.dot(xi), phi.dot(xi));
    };

    const Eigen::Vector2d ray_u = quotient_ray(du, -1.0);
    const Eigen::Vector2d ray_r = quotient_ray(dr, medium == 2 ? +1.0 : -1.0);

    // Descend the two covectors to the quotient plane, oriented toward the
    // respective cone interiors.
    auto quotient_covector = [&](const Metric& m, const Vec& dl) {
        Eigen::Vector2d w(dl.dot(z_c), dl.dot(nu));
        const ConeTriple triple = m.cone_triple_at(p);
        if (dl.dot(triple.timelike()) < 0.0) w = -w;
        return w;
    };
    const Eigen::Vector2d w_u = quotient_covector(m1, du);
    const Eigen::Vector2d w_r = quotient_covector(target, dr);

    auto perp_ccw = [](const Eigen::Vector2d& d) { return Eigen::Vector2d(-d.y(), d.x()); };

    const double cross = ray_u.x() * ray_r.y() - ray_u.y() * ray_r.x();
    if (std::abs(cross) <= 1e-9 * ray_u.norm() * ray_r.norm()) {
        // Collinear rays: the broken hyperplane is flat. Straight iff the two
        // cone orientations agree across it.
        const Eigen::Vector2d t = perp_ccw(ray_u);
        return w_u.dot(t) * w_r.dot(t) > 0.0;
    }
    const double s_u = w_u.dot(perp_ccw(ray_u));
    const double s_r = w_r.dot(perp_ccw(ray_r));
    // Rotating each ray toward its cone side selects one of the two angular
    // sectors; opposite rotation senses select the same sector.
    return s_u * s_r < 0.0;
}

double snell_residual(const Metric& m1, const Metric& m2, const InterfaceSpec& eta, const Vec& p,
                      const Vec& u, const Vec& r, int medium) {
    const Metric& target = medium == 2 ? m2 : m1;
    const Mat eta_basis = kernel_basis(eta.gradient(p));
    const Vec rho1 = eta_basis.transpose() * m1.grad(p, u);
    const Vec rho_r = eta_basis.transpose() * target.grad(p, r);
    if (rho_r.norm() <= 1e-300) return rho1.norm() <= 1e-300 ? 0.0 : 1.0;
    const double lam = rho1.dot(rho_r) / rho1.squaredNorm();
    return (rho_r - lam * rho1).norm() / rho_r.norm();
}

std::optional<double> critical_angle(double n1, double n2) {
    if (!(n1 > 0.0) || !(n2 > 0.0)) throw InvalidInputError("critical_angle: indices must be > 0");
    if (n2 > n1) return std::nullopt;
    return std::asin(n2 / n1);
}

bool total_reflection_check(const IncidentData& inc) {
    if (inc.eta_char_1.character != CausalChar::Timelike ||
        inc.eta_char_2.character != CausalChar::Timelike)
        throw InvalidInputError("total_reflection_check: interface must be doubly timelike");
    return inc.pi_char_2.character == CausalChar::Timelike;
}

ReceiverCheck receiver_check_curve(const Metric& m, const Vec& x, const Vec& v,
                                   const Vec& curve_tangent) {
    if (curve_tangent.size() != v.size())
        throw InvalidInputError("receiver_check_curve: dimension mismatch");
    const Vec dl = m.grad(x, v);
    ReceiverCheck chk;
    chk.residual = std::abs(dl.dot(curve_tangent)) / (dl.norm() * curve_tangent.norm());
    chk.ok = chk.residual > 1e-8;
    return chk;
}

ReceiverCheck receiver_check_submanifold(const Metric& m, const Vec& x, const Vec& v,
                                         const Mat& kernel_basis_dtB) {
    if (kernel_basis_dtB.rows() != v.size())
        throw InvalidInputError("receiver_check_submanifold: dimension mismatch");
    const Vec dl = m.grad(x, v);
    ReceiverCheck chk;
    double worst = 0.0;
    for (int j = 0; j < kernel_basis_dtB.cols(); ++j) {
        const Vec k = kernel_basis_dtB.col(j);
        worst = std::max(worst, std::abs(dl.dot(k)) / (dl.norm() * k.norm()));
    }
    chk.residual = worst;
    chk.ok = worst <= 1e-8;
    return chk;
}

std::vector<Vec> sweep_solutions_2d(const Metric& m1, const Metric& target,
                                    const InterfaceSpec& eta, const Vec& p, const Vec& u,
                                    bool far_side, int samples, const Tolerances& tol) {
    if (p.size() != 3) throw InvalidInputError("sweep_solutions_2d: requires spatial dimension 2");
    const ConeTriple triple = target.cone_triple_at(p);
    const Mat& sb = triple.spatial_basis();
    const Vec grad = eta.gradient(p);
    const Mat eta_basis = kernel_basis(grad);
    const Vec rho1 = eta_basis.transpose() * m1.grad(p, u);

    auto dir_at = [&](double th) {
        Vec z = std::cos(th) * sb.col(0) + std::sin(th) * sb.col(1);
        return (triple.timelike() + z / triple.norm(z)).eval();
    };
    auto align = [&](double th) {
        const Vec rho = eta_basis.transpose() * target.grad(p, dir_at(th));
        return rho(0) * rho1(1) - rho(1) * rho1(0);
    };

    std::vector<Vec> sols;
    double prev = align(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double th = 2.0 * M_PI * i / samples;
        const double cur = align(th);
        if (prev == 0.0 || prev * cur < 0.0) {
            double lo = 2.0 * M_PI * (i - 1) / samples, hi = th;
            double flo = prev;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = align(mid);
                if (flo * fm <= 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            const Vec v = dir_at(0.5 * (lo + hi));
            const Vec gt = target.grad(p, v);
            const Vec rho_t = eta_basis.transpose() * gt;
            bool keep = rho_t.norm() > 1e-7 * gt.norm();
            if (keep) {
                const double sideval = grad.dot(v) * (far_side ? 1.0 : -1.0);
                keep = sideval >= -tol.side * grad.norm() * v.norm();
            }
            if (keep) keep = snell_residual(m1, target, eta, p, u, v, far_side ? 2 : 1) <= 1e-6;
            if (keep) {
                bool dup = false;
                for (const auto& other : sols)
                    if (euclidean_angle(v, other) <= 1e-7) dup = true;
                if (!dup) sols.push_back(v);
            }
        }
        prev = cur;
    }
    return sols;
}

}  // namespace lfray
