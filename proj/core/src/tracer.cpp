#include "lfray/tracer.hpp"

#include <cmath>
#include <sstream>

namespace lfray {

const char* to_string(TraceStatus s) {
    switch (s) {
        case TraceStatus::ReceiverHit:
            return "receiver_hit";
        case TraceStatus::BoundsExit:
            return "bounds_exit";
        case TraceStatus::MaxEvents:
            return "max_events";
        case TraceStatus::MaxSteps:
            return "max_steps";
        case TraceStatus::Unresolvable:
            return "unresolvable";
    }
    return "?";
}

namespace {

InterfaceSpec negated(const InterfaceSpec& spec) {
    InterfaceSpec copy = spec;
    return InterfaceSpec::custom([copy](const Vec& x) { return -copy.level(x); },
                                 [copy](const Vec& x) { return (-copy.gradient(x)).eval(); });
}

int other_medium(int m) { return m == 1 ? 2 : 1; }

struct LegResult {
    Segment seg;
    std::optional<CrossingEvent> crossing;
    TraceStatus status = TraceStatus::MaxSteps;
    std::optional<double> arrival;
};

double receiver_tube(const SceneConfig& scene) {
    return scene.tol.receiver_tube * std::max(1.0, scene.chart.diameter());
}

// Integrate one smooth leg inside a single medium, stopping at the first
// interface sign change, receiver-tube entry, chart exit or step budget.
LegResult run_leg(const SceneConfig& scene, int medium, const Vec& x0, const Vec& dir, double s0) {
    const Metric& m = scene.metric_for_side(medium == 2 ? Side::Medium2 : Side::Medium1);
    const InterfaceSpec& eta = scene.interface_spec;
    const double tube = receiver_tube(scene);

    const double arm_band = 1e-7 * eta.local_scale(x0);
    bool armed = std::abs(eta.level(x0)) > arm_band;

    StopPredicate pred = [&](const GeodesicState& prev,
                             const GeodesicState& cur) -> std::optional<StopReason> {
        if (!scene.chart.contains(cur.x)) return StopReason::BoundsExit;
        if (scene.receiver &&
            scene.receiver->segment_distance(prev.x, cur.x) < tube)
            return StopReason::ReceiverHit;
        const double fc = eta.level(cur.x);
        if (!armed) {
            if (std::abs(fc) > arm_band) armed = true;
            return std::nullopt;
        }
        if (eta.level(prev.x) * fc < 0.0) return StopReason::InterfaceHit;
        return std::nullopt;
    };

    GeodesicState start{x0, dir, s0};
    LegResult leg;
    leg.seg = integrate_geodesic(m, start, pred, scene.integrator, medium);

    switch (leg.seg.stop_reason) {
        case StopReason::InterfaceHit: {
            CrossingEvent ev = locate_crossing(eta, m, leg.seg, scene.tol);
            // Trim the overshooting sample onto the interface.
            leg.seg.samples.back() = GeodesicState{ev.point, ev.incoming, ev.tau};
            leg.crossing = std::move(ev);
            return leg;
        }
        case StopReason::ReceiverHit: {
            // Refine the final step to the closest approach of the receiver.
            auto& smp = leg.seg.samples;
            if (smp.size() >= 2 && scene.receiver) {
                const GeodesicState base = smp[smp.size() - 2];
                const double hfull = smp.back().s - base.s;
                double lo = 0.0, hi = hfull;
                const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                auto at = [&](double h) {
                    const GeodesicState st = h > 0.0 ? rk4_step(m, base, h) : base;
                    return scene.receiver->distance(st.x).first;
                };
                double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
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
                const double h = 0.5 * (lo + hi);
                if (h > 0.0) smp.back() = rk4_step(m, base, h);
            }
            leg.status = TraceStatus::ReceiverHit;
            leg.arrival = scene.receiver->distance(leg.seg.samples.back().x).second;
            return leg;
        }
        case StopReason::BoundsExit:
            leg.status = TraceStatus::BoundsExit;
            return leg;
        case StopReason::MaxSteps:
            leg.status = TraceStatus::MaxSteps;
            return leg;
    }
    return leg;
}

struct EventResolution {
    TraceEvent event;
    bool resolved = false;
};

// Resolve one interface event per the branch policy; used by trace and by the
// branch enumerator with an override for the chosen index.
EventResolution resolve_event(const SceneConfig& scene, int medium, const CrossingEvent& crossing) {
    EventResolution res;
    TraceEvent& ev = res.event;
    ev.crossing = crossing;
    ev.from_medium = medium;
    ev.to_medium = other_medium(medium);

    const Metric& m_in = scene.metric_for_side(medium == 2 ? Side::Medium2 : Side::Medium1);
    const Metric& m_out =
        scene.metric_for_side(ev.to_medium == 2 ? Side::Medium2 : Side::Medium1);
    const InterfaceSpec eta_or =
        medium == 1 ? scene.interface_spec : negated(scene.interface_spec);

    const IncidentData inc =
        incident_data(m_in, m_out, eta_or, crossing.point, crossing.incoming, scene.tol);

    if (scene.branch_policy == BranchPolicy::ReflectOnly) {
        ev.reflection = solve_reflection(m_in, m_out, eta_or, inc, scene.tol);
        for (size_t i = 0; i < ev.reflection->directions.size(); ++i) {
            if (!ev.reflection->directions[i].exceptional) {
                ev.chosen_branch = static_cast<int>(i);
                ev.chose_reflection = true;
                ev.to_medium = medium;
                res.resolved = true;
                return res;
            }
        }
        return res;
    }

    ev.refraction = solve_refraction(m_in, m_out, eta_or, inc, scene.tol);

    int pick = -1;
    for (size_t i = 0; i < ev.refraction->directions.size(); ++i) {
        const auto& d = ev.refraction->directions[i];
        if (!d.exceptional && d.straight_oriented) {
            pick = static_cast<int>(i);
            break;
        }
    }
    if (pick >= 0) {
        ev.chosen_branch = pick;
        res.resolved = true;
        return res;
    }

    // No locally time-minimizing refraction: fall back to reflection. This is
    // total reflection when the refraction case reports no critical points.
    ev.reflection = solve_reflection(m_in, m_out, eta_or, inc, scene.tol);
    for (size_t i = 0; i < ev.reflection->directions.size(); ++i) {
        if (!ev.reflection->directions[i].exceptional) {
            ev.chosen_branch = static_cast<int>(i);
            ev.chose_reflection = true;
            ev.to_medium = medium;
            ev.total_reflection =
                ev.refraction->refraction_case == RefractionCase::A_iii_NoCriticalPoints;
            res.resolved = true;
            return res;
        }
    }
    return res;
}

}  // namespace

Trajectory trace(const SceneConfig& scene, const Vec& start, const Vec& dir, int max_events) {
    if (max_events < 0) max_events = scene.max_events;
    Trajectory traj;

    Vec x = start;
    Vec v = dir;
    const Side s0 = side(scene.interface_spec, start, scene.tol);
    int medium = s0 == Side::Medium2 ? 2 : 1;
    if (s0 == Side::OnInterface)
        medium = scene.interface_spec.gradient(start).dot(dir) > 0.0 ? 2 : 1;
    double s_acc = 0.0;

    for (int e = 0; e <= max_events; ++e) {
        LegResult leg = run_leg(scene, medium, x, v, s_acc);
        s_acc = leg.seg.samples.back().s;
        traj.segments.push_back(std::move(leg.seg));

        if (!leg.crossing) {
            traj.status = leg.status;
            traj.arrival = leg.arrival;
            return traj;
        }
        if (e == max_events) {
            traj.status = TraceStatus::MaxEvents;
            return traj;
        }

        EventResolution res;
        try {
            res = resolve_event(scene, medium, *leg.crossing);
        } catch (const Error& err) {
            std::ostringstream os;
            os << "event " << traj.events.size() << ": " << err.what();
            throw Error(err.code(), os.str());
        }
        traj.events.push_back(res.event);
        if (!res.resolved) {
            traj.status = TraceStatus::Unresolvable;
            return traj;
        }

        const TraceEvent& ev = traj.events.back();
        x = ev.crossing.point;
        v = ev.chosen_direction().dir;
        medium = ev.to_medium;
    }
    traj.status = TraceStatus::MaxEvents;
    return traj;
}

std::vector<Trajectory> trace_all(const SceneConfig& scene, const Vec& start, const Vec& dir,
                                  int max_events, int max_branches) {
    if (max_events < 0) max_events = scene.max_events;
    std::vector<Trajectory> done;

    struct Pending {
        Trajectory prefix;
        Vec x;
        Vec v;
        int medium;
        int events_used;
        double s_acc;
    };

    std::vector<Pending> queue;
    {
        const Side s0 = side(scene.interface_spec, start, scene.tol);
        int medium = s0 == Side::Medium2 ? 2 : 1;
        if (s0 == Side::OnInterface)
            medium = scene.interface_spec.gradient(start).dot(dir) > 0.0 ? 2 : 1;
        queue.push_back({Trajectory{}, start, dir, medium, 0, 0.0});
    }

    while (!queue.empty() && static_cast<int>(done.size()) < max_branches) {
        Pending cur = std::move(queue.back());
        queue.pop_back();

        LegResult leg = run_leg(scene, cur.medium, cur.x, cur.v, cur.s_acc);
        cur.s_acc = leg.seg.samples.back().s;
        cur.prefix.segments.push_back(leg.seg);

        if (!leg.crossing) {
            cur.prefix.status = leg.status;
            cur.prefix.arrival = leg.arrival;
            done.push_back(std::move(cur.prefix));
            continue;
        }
        if (cur.events_used == max_events) {
            cur.prefix.status = TraceStatus::MaxEvents;
            done.push_back(std::move(cur.prefix));
            continue;
        }

        EventResolution res = resolve_event(scene, cur.medium, *leg.crossing);
        const bool fork_refraction = scene.branch_policy != BranchPolicy::ReflectOnly &&
                                     res.event.refraction &&
                                     !res.event.refraction->directions.empty();
        std::vector<std::pair<bool, int>> branches;  // (reflection?, index)
        if (fork_refraction) {
            for (size_t i = 0; i < res.event.refraction->directions.size(); ++i)
                if (!res.event.refraction->directions[i].exceptional)
                    branches.push_back({false, static_cast<int>(i)});
        }
        if (branches.empty() && res.resolved) branches.push_back({res.event.chose_reflection, res.event.chosen_branch});
        if (branches.empty()) {
            cur.prefix.events.push_back(res.event);
            cur.prefix.status = TraceStatus::Unresolvable;
            done.push_back(std::move(cur.prefix));
            continue;
        }

        for (const auto& [refl, idx] : branches) {
            Pending next = cur;
            TraceEvent ev = res.event;
            ev.chose_reflection = refl;
            ev.chosen_branch = idx;
            ev.to_medium = refl ? cur.medium : other_medium(cur.medium);
            next.prefix.events.push_back(ev);
            next.x = ev.crossing.point;
            next.v = ev.chosen_direction().dir;
            next.medium = ev.to_medium;
            next.events_used = cur.events_used + 1;
            queue.push_back(std::move(next));
        }
    }
    return done;
}

double arrival_time(const Trajectory& traj, const ReceiverSpec& receiver, const Tolerances& tol) {
    const Vec& x = traj.terminal().x;
    const auto [d, t] = receiver.distance(x);
    const double tube = tol.receiver_tube;
    if (d > 1e3 * std::max(tube, 1e-12) * (1.0 + x.norm()))
        throw NoArrivalError("arrival_time: terminal point is off the receiver");
    return t;
}

double source_orthogonality_check(const SceneConfig& scene, const Trajectory& traj) {
    if (scene.source.is_point()) return 0.0;
    const GeodesicState& first = traj.segments.front().samples.front();
    const Metric& m1 = scene.metric1;
    const Vec dl = m1.grad(first.x, first.y);
    double worst = 0.0;
    for (int j = 0; j < scene.source.basis.cols(); ++j) {
        const Vec b = scene.source.basis.col(j);
        worst = std::max(worst, std::abs(dl.dot(b)) / (dl.norm() * b.norm()));
    }
    return worst;
}

namespace {

// Smallest receiver parameter whose displacement from q is lightlike and
// future for the metric; empty when no connection exists.
std::optional<double> connect_to_curve(const Metric& m, const Vec& eval_point, const Vec& q,
                                       const ReceiverSpec& rec) {
    const Vec omega = m.time_covector(eval_point);
    const Vec w = rec.velocity;
    const double t_proj = (q - rec.origin).dot(w) / w.squaredNorm();
    const double gap = (q - rec.position(t_proj)).norm() / w.norm();
    const double span = 8.0 * std::max(1e-6, gap) + 1e-3;

    const int samples = 1024;
    double prev_t = t_proj - span;
    double prev_l = m.eval(eval_point, rec.position(prev_t) - q);
    std::optional<double> best;
    for (int i = 1; i <= samples; ++i) {
        const double t = t_proj - span + 2.0 * span * i / samples;
        const double l = m.eval(eval_point, rec.position(t) - q);
        if (prev_l * l <= 0.0 && l != prev_l) {
            double lo = prev_t, hi = t, flo = prev_l;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = m.eval(eval_point, rec.position(mid) - q);
                if (flo * fm <= 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            const double t_root = 0.5 * (lo + hi);
            const Vec disp = rec.position(t_root) - q;
            if (omega.dot(disp) > 0.0 && (!best || t_root < *best)) best = t_root;
        }
        prev_t = t;
        prev_l = l;
    }
    return best;
}

std::optional<double> ray_to_level_set(const InterfaceSpec& eta, const Vec& from, const Vec& dir,
                                       double s_max) {
    if (eta.kind() == InterfaceSpec::Kind::Plane) {
        const double denom = eta.plane_normal().dot(dir);
        if (std::abs(denom) < 1e-14) return std::nullopt;
        const double s = (eta.plane_offset() - eta.plane_normal().dot(from)) / denom;
        if (s <= 1e-12 || s > s_max) return std::nullopt;
        return s;
    }
    const int samples = 256;
    double prev_s = 0.0, prev_f = eta.level(from);
    for (int i = 1; i <= samples; ++i) {
        const double s = s_max * i / samples;
        const double f = eta.level(from + s * dir);
        if (prev_f * f < 0.0) {
            double lo = prev_s, hi = s, flo = prev_f;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = eta.level(from + mid * dir);
                if (flo * fm <= 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_s = s;
        prev_f = f;
    }
    return std::nullopt;
}

}  // namespace

FermatOracleResult fermat_oracle(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                                 const Vec& source, const ReceiverSpec& receiver, int grid,
                                 int rounds) {
    if (!m1.constant_coefficients() || !m2.constant_coefficients())
        throw InvalidInputError("fermat_oracle: media must be constant-coefficient");
    if (receiver.kind != ReceiverSpec::Kind::Curve || receiver.path)
        throw InvalidInputError("fermat_oracle: receiver must be an affine curve");

    const ConeTriple triple = m1.cone_triple_at(source);
    const Mat& sb = triple.spatial_basis();
    const int nsp = static_cast<int>(sb.cols());
    const double reach =
        4.0 * ((receiver.origin - source).norm() + 1.0);

    auto evaluate = [&](const Vec& unit_spatial)
        -> std::optional<std::tuple<double, Vec, Vec>> {
        const Vec z = sb * unit_spatial;
        const Vec d = triple.timelike() + z / triple.norm(z);
        const auto s = ray_to_level_set(eta, source, d, reach);
        if (!s) return std::nullopt;
        const Vec q = source + *s * d;
        const auto t = connect_to_curve(m2, source, q, receiver);
        if (!t) return std::nullopt;
        return std::make_tuple(*t, q, d);
    };

    double best_time = std::numeric_limits<double>::infinity();
    Vec best_q, best_d;

    if (nsp == 2) {
        auto time_at = [&](double th) {
            Vec c(2);
            c << std::cos(th), std::sin(th);
            auto r = evaluate(c);
            return r ? std::get<0>(*r) : std::numeric_limits<double>::infinity();
        };
        double center = 0.0, halfwidth = M_PI;
        for (int round = 0; round < rounds; ++round) {
            double round_best_th = center;
            for (int i = 0; i < grid; ++i) {
                const double th = center - halfwidth + 2.0 * halfwidth * (i + 0.5) / grid;
                Vec c(2);
                c << std::cos(th), std::sin(th);
                auto r = evaluate(c);
                if (r && std::get<0>(*r) < best_time) {
                    std::tie(best_time, best_q, best_d) = *r;
                    round_best_th = th;
                }
            }
            center = round_best_th;
            halfwidth = 2.0 * (2.0 * halfwidth / grid);
        }
        // golden-section polish of the final bracket
        double lo = center - halfwidth, hi = center + halfwidth;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
        double f1 = time_at(c1), f2 = time_at(c2);
        for (int it = 0; it < 80; ++it) {
            if (f1 > f2) {
                lo = c1;
                c1 = c2;
                f1 = f2;
                c2 = lo + gr * (hi - lo);
                f2 = time_at(c2);
            } else {
                hi = c2;
                c2 = c1;
                f2 = f1;
                c1 = hi - gr * (hi - lo);
                f1 = time_at(c1);
            }
        }
        Vec c(2);
        c << std::cos(0.5 * (lo + hi)), std::sin(0.5 * (lo + hi));
        if (auto r = evaluate(c); r && std::get<0>(*r) < best_time)
            std::tie(best_time, best_q, best_d) = *r;
    } else {
        // Spherical grid in (polar, azimuth...) coordinates, refined around
        // the best cell.
        const int npar = nsp - 1;
        Vec center = Vec::Zero(npar);
        center(0) = M_PI / 2.0;
        Vec halfwidth = Vec::Constant(npar, M_PI);
        auto unit_from_angles = [&](const Vec& ang) {
            Vec c(nsp);
            double sprod = 1.0;
            for (int i = 0; i < npar; ++i) {
                c(i) = sprod * std::cos(ang(i));
                sprod *= std::sin(ang(i));
            }
            c(npar) = sprod;
            return c;
        };
        for (int round = 0; round < rounds; ++round) {
            Vec best_ang = center;
            std::vector<int> idx(npar, 0);
            const long total = static_cast<long>(std::pow(grid, npar));
            for (long flat = 0; flat < total; ++flat) {
                long rem = flat;
                Vec ang(npar);
                for (int i = 0; i < npar; ++i) {
                    const int k = rem % grid;
                    rem /= grid;
                    ang(i) = center(i) - halfwidth(i) + 2.0 * halfwidth(i) * (k + 0.5) / grid;
                }
                auto r = evaluate(unit_from_angles(ang).normalized());
                if (r && std::get<0>(*r) < best_time) {
                    std::tie(best_time, best_q, best_d) = *r;
                    best_ang = ang;
                }
            }
            center = best_ang;
            halfwidth *= 4.0 / grid;
        }
    }

    if (!std::isfinite(best_time))
        throw InfeasibleError("fermat_oracle: no lightlike connection found on any grid cell");
    return {best_q, best_time, best_d};
}

bool timelike_connector_found(const Metric& m_in, const Metric& m_out, const InterfaceSpec& eta,
                              const Vec& p, const Vec& q_before, const Vec& q_after,
                              int grid_per_axis, double radius_factor) {
    const int dim = static_cast<int>(p.size());
    const Mat z = kernel_basis(eta.gradient(p));
    const int npar = static_cast<int>(z.cols());
    const int per_axis = dim <= 3 ? grid_per_axis : std::min(grid_per_axis, 40);
    const double radius =
        radius_factor * std::max((q_before - p).norm(), (q_after - p).norm());

    const Vec omega_in = m_in.time_covector(p);
    const Vec omega_out = m_out.time_covector(p);

    // Same-side endpoints (reflection): a broken timelike path inside one
    // medium exists iff the direct chord is already timelike, because the
    // future timelike cone is convex. Curves detouring across the interface
    // touch it more than once and do not count.
    const Vec grad_p = eta.gradient(p);
    if (grad_p.dot(q_before - p) * grad_p.dot(q_after - p) > 0.0) {
        const Vec chord = q_after - q_before;
        if (omega_in.dot(chord) <= 0.0) return false;
        return m_in.eval(p, chord) > 1e-9 * std::max(1.0, m_in.quadratic_scale(p, chord));
    }

    // Normalized timelikeness margin of both legs through the interface point
    // with patch coordinates c; positive iff a strict connector exists there.
    auto margin = [&](const Vec& c) -> double {
        Vec y = p + z * c;
        for (int it = 0; it < 3; ++it) {
            const Vec g = eta.gradient(y);
            y -= eta.level(y) / g.squaredNorm() * g;
        }
        const Vec leg1 = y - q_before;
        const Vec leg2 = q_after - y;
        if (leg1.norm() == 0.0 || leg2.norm() == 0.0) return -1.0;
        if (omega_in.dot(leg1) <= 0.0 || omega_out.dot(leg2) <= 0.0) return -1.0;
        const double m1 = m_in.eval(p, leg1) / std::max(1.0, m_in.quadratic_scale(p, leg1));
        const double m2 = m_out.eval(p, leg2) / std::max(1.0, m_out.quadratic_scale(p, leg2));
        return std::min(m1, m2) - 1e-9;
    };

    // Coarse scan; the timelike overlap can be a thin sliver between two
    // tangent horismos traces, so the best cells are refined recursively.
    struct Cell {
        double val;
        Vec c;
    };
    std::vector<Cell> best;
    const long total = static_cast<long>(std::pow(per_axis, npar));
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        Vec c(npar);
        for (int i = 0; i < npar; ++i) {
            const int k = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            c(i) = radius * (2.0 * (k + 0.5) / per_axis - 1.0);
        }
        const double v = margin(c);
        if (v > 0.0) return true;
        best.push_back({v, c});
    }
    std::partial_sort(best.begin(), best.begin() + std::min<size_t>(best.size(), 32), best.end(),
                      [](const Cell& a, const Cell& b) { return a.val > b.val; });
    best.resize(std::min<size_t>(best.size(), 32));

    double h = radius / per_axis;
    const int sub = 7;
    for (int round = 0; round < 4; ++round) {
        std::vector<Cell> next;
        for (const auto& cell : best) {
            const long subtotal = static_cast<long>(std::pow(sub, npar));
            for (long flat = 0; flat < subtotal; ++flat) {
                long rem = flat;
                Vec c = cell.c;
                for (int i = 0; i < npar; ++i) {
                    const int k = static_cast<int>(rem % sub);
                    rem /= sub;
                    c(i) += h * (2.0 * (k + 0.5) / sub - 1.0);
                }
                const double v = margin(c);
                if (v > 0.0) return true;
                next.push_back({v, c});
            }
        }
        std::partial_sort(next.begin(), next.begin() + std::min<size_t>(next.size(), 32),
                          next.end(), [](const Cell& a, const Cell& b) { return a.val > b.val; });
        next.resize(std::min<size_t>(next.size(), 32));
        best = std::move(next);
        h /= sub;
    }
    return false;
}

CriticalityReport fermat_criticality_check(const SceneConfig& scene, const Trajectory& traj,
                                           double probe_offset) {
    if (traj.events.empty())
        throw InvalidInputError("fermat_criticality_check: trajectory has no interface event");
    const TraceEvent& ev = traj.events.back();
    const Vec& p = ev.crossing.point;
    const Vec u = ev.crossing.incoming;
    const Vec r = ev.chosen_direction().dir;

    const Metric m_in =
        scene.metric_for_side(ev.from_medium == 2 ? Side::Medium2 : Side::Medium1).frozen_at(p);
    const Metric m_out =
        scene.metric_for_side(ev.to_medium == 2 ? Side::Medium2 : Side::Medium1).frozen_at(p);

    const double rho =
        probe_offset > 0.0 ? probe_offset : 1e-2 * std::max(1.0, scene.chart.diameter());
    const Vec q_before = p - rho * u.normalized();
    const Vec q_after = p + rho * r.normalized();

    CriticalityReport rep;

    // Proxy receiver: a timelike line through a point on the outgoing ray.
    ReceiverSpec proxy;
    proxy.kind = ReceiverSpec::Kind::Curve;
    proxy.origin = q_after;
    proxy.velocity = m_out.cone_triple_at(p).timelike();

    const ConeTriple triple = m_in.cone_triple_at(p);
    const Mat& sb = triple.spatial_basis();
    const Vec pi_u = u - triple.omega().dot(u) * triple.timelike();
    Vec c0 = sb.transpose() * pi_u;
    c0.normalize();
    const Mat frame = complete_basis(c0);  // tangent directions on the spatial sphere

    auto arrival_at = [&](const Vec& eps) -> std::optional<double> {
        Vec c = c0;
        for (int i = 0; i < frame.cols(); ++i) c += eps(i) * frame.col(i);
        c.normalize();
        const Vec z = sb * c;
        const Vec d = triple.timelike() + z / triple.norm(z);
        const auto s = ray_to_level_set(scene.interface_spec, q_before, d, 8.0 * rho);
        if (!s) return std::nullopt;
        const Vec y = q_before + *s * d;
        return connect_to_curve(m_out, p, y, proxy);
    };

    const int npar = static_cast<int>(frame.cols());
    const double delta = 1e-3;
    const auto t0 = arrival_at(Vec::Zero(npar));
    if (!t0) {
        rep.inconclusive = true;
        return rep;
    }

    Vec grad(npar);
    Mat hess = Mat::Zero(npar, npar);
    bool fail = false;
    std::vector<double> plus(npar), minus(npar);
    for (int i = 0; i < npar && !fail; ++i) {
        const auto tp = arrival_at(delta * Vec::Unit(npar, i));
        const auto tm = arrival_at(-delta * Vec::Unit(npar, i));
        if (!tp || !tm) {
            fail = true;
            break;
        }
        plus[i] = *tp;
        minus[i] = *tm;
        grad(i) = (*tp - *tm) / (2.0 * delta);
        hess(i, i) = (*tp - 2.0 * *t0 + *tm) / (delta * delta);
    }
    for (int i = 0; i < npar && !fail; ++i) {
        for (int j = i + 1; j < npar && !fail; ++j) {
            const auto tpp = arrival_at(delta * (Vec::Unit(npar, i) + Vec::Unit(npar, j)));
            const auto tpm = arrival_at(delta * (Vec::Unit(npar, i) - Vec::Unit(npar, j)));
            const auto tmp = arrival_at(delta * (-Vec::Unit(npar, i) + Vec::Unit(npar, j)));
            const auto tmm = arrival_at(-delta * (Vec::Unit(npar, i) + Vec::Unit(npar, j)));
            if (!tpp || !tpm || !tmp || !tmm) {
                fail = true;
                break;
            }
            hess(i, j) = hess(j, i) = (*tpp - *tpm - *tmp + *tmm) / (4.0 * delta * delta);
        }
    }
    if (fail) {
        rep.inconclusive = true;
        return rep;
    }

    const double scale_t = std::max(rho, std::abs(*t0));
    rep.gradient_norm = grad.norm() / scale_t;
    rep.critical = rep.gradient_norm <= 1e-4;

    Eigen::SelfAdjointEigenSolver<Mat> es(hess);
    const double hmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (hmax < 1e-10 * scale_t) {
        rep.signature = CriticalityReport::Signature::Flat;
    } else if (es.eigenvalues().minCoeff() > 1e-6 * hmax) {
        rep.signature = CriticalityReport::Signature::Minimum;
    } else if (es.eigenvalues().maxCoeff() < -1e-6 * hmax) {
        rep.signature = CriticalityReport::Signature::Maximum;
    } else {
        rep.signature = CriticalityReport::Signature::Saddle;
    }

    const InterfaceSpec eta_or =
        ev.from_medium == 1 ? scene.interface_spec : negated(scene.interface_spec);
    rep.not_minimizing =
        timelike_connector_found(m_in, m_out, eta_or, p, q_before, q_after, 200);
    return rep;
}

}  // namespace lfray
